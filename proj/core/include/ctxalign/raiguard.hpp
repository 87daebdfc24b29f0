#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ctxalign/types.hpp"

namespace ctxalign::rai {

/// One detector match: the pack entry that fired, the matched text and its
/// byte offset within the scanned text.
struct Hit {
  std::string name;
  std::string text;
  std::size_t offset = 0;

  bool operator==(const Hit&) const = default;
};

struct PhiPattern {
  std::string name;
  std::string regex;
};

/// Heuristic packs backing the verifier. Defaults are mirrored in
/// data/packs/ so operators can edit them without a rebuild.
struct Packs {
  std::vector<std::string> definitive_phrases;
  std::vector<PhiPattern> phi_patterns;
  std::vector<std::string> hedging_lexicon;
  std::vector<std::string> unsafe_terms;

  static const Packs& defaults();

  /// Loads definitive_phrases.txt, phi_patterns.tsv, hedging_lexicon.txt,
  /// unsafe_terms.txt from a directory. `#` comments and blank lines are
  /// skipped; PHI lines are name<TAB>regex.
  static Packs load_dir(const std::string& dir);
};

struct VerificationReport {
  bool schema_ok = false;
  bool uncertainty_in_range = false;
  bool has_limitations = false;
  bool has_safety_note = false;
  std::vector<Hit> definitive_claims;
  std::vector<Hit> phi_hits;
  std::vector<Hit> unsafe_hits;
  std::size_t uncertainty_marker_count = 0;
  bool passed = false;
};

/// A parsed response, or (when absent) the raw text of an unparseable one.
struct VerifyInput {
  std::optional<StructuredResponse> response;
  std::string raw_text;
};

/// Total and non-throwing: any input yields a report. Unparseable inputs
/// fail schema_ok; detectors still scan the raw text. passed is the
/// conjunction of schema_ok, uncertainty_in_range, has_limitations,
/// has_safety_note, and empty definitive_claims.
VerificationReport verify(const VerifyInput& input, const Packs& packs);

/// Case-insensitive whole-word matches against the definitive phrase pack.
std::vector<Hit> detect_definitive_claims(const std::string& text, const Packs& packs);

/// Regex pack over dates, ages over 89, record-number shapes, and name
/// salutations. Digit runs shorter than six never fire the record-number
/// pattern, exempting ordinary measurements.
std::vector<Hit> detect_phi(const std::string& text, const Packs& packs);

std::vector<Hit> detect_unsafe(const std::string& text, const Packs& packs);

/// Total occurrences of hedging lexicon entries, whole-word, case-insensitive.
std::size_t count_uncertainty_markers(const std::string& text, const Packs& packs);

/// Presence = non-empty and at least three whitespace words.
bool field_present(const std::string& field);

struct RaiAggregate {
  std::size_t n = 0;
  double phi_rate_pct = 0.0;     // share of responses with >=1 PHI hit, percent
  double unsafe_rate_pct = 0.0;  // likewise for unsafe hits
  double uncertainty_marker_rate = 0.0;  // share with >=1 marker, in [0,1]
  double limitations_rate = 0.0;
  double safety_rate = 0.0;
  double passed_rate = 0.0;
};

/// Batch rates over n responses. Throws EmptyBatch when n == 0.
RaiAggregate batch_rai_report(const std::vector<VerificationReport>& reports, std::size_t n);

std::string rai_table_text(const RaiAggregate& agg);
std::string rai_table_json(const RaiAggregate& agg);

std::string report_to_json(const VerificationReport& report, const std::string& study_id);

}  // namespace ctxalign::rai
