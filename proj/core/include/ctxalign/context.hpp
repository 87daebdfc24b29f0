#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxalign/radiomics.hpp"
#include "ctxalign/xai.hpp"

namespace ctxalign::context {

/// Curated radiology terms, canonical lowercase; multi-word entries keep a
/// single space between words.
struct Vocabulary {
  std::set<std::string> terms;
};

/// Vocabulary terms matched in a report, unique, in first-occurrence order.
struct SemanticAnchors {
  std::vector<std::string> matched;
};

/// Serialized evidence bundle injected verbatim into prompts.
struct FeatureCard {
  std::optional<radiomics::RadiomicFeatures> radiomics;
  std::optional<xai::ActivationSummary> xai;
  std::optional<SemanticAnchors> anchors;
  std::string rendered;
};

/// One term per line, trimmed, lowercased, deduplicated; blank lines and
/// `#` comments skipped. Throws EmptyVocabulary or IoError.
Vocabulary load_vocabulary(const std::string& path);

Vocabulary parse_vocabulary(const std::string& text);

/// Case-insensitive whole-word matching; multi-word terms match across
/// single spaces. Letters and digits delimit words.
SemanticAnchors extract_anchors(const std::string& report, const Vocabulary& vocab);

/// Renders the fixed-order plain-text card. Sections appear as
/// [RADIOMICS], [XAI], [VOCAB]; numbers carry exactly 4 decimals; absent
/// sections are omitted. Byte-identical across runs. Throws EmptyCard.
FeatureCard serialize_card(const std::optional<radiomics::RadiomicFeatures>& rad,
                           const std::optional<xai::ActivationSummary>& xai_summary,
                           const std::optional<SemanticAnchors>& anchors);

/// Renders one section in isolation (used to build step-limited prompts).
std::string render_radiomics_section(const radiomics::RadiomicFeatures& rad);
std::string render_xai_section(const xai::ActivationSummary& summary);
std::string render_vocab_section(const SemanticAnchors& anchors);

}  // namespace ctxalign::context
