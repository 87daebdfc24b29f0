#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctxalign/config.hpp"
#include "ctxalign/context.hpp"
#include "ctxalign/types.hpp"

namespace ctxalign::reason {

struct ImageAttachment {
  std::string mime;                 // "image/png"
  std::vector<std::uint8_t> bytes;  // encoded image
};

struct ChatRequest {
  std::string system_text;
  std::string user_text;
  std::vector<ImageAttachment> images;  // 0-2, frontal then lateral
};

/// One reasoning step: the raw assistant text plus the parsed response when
/// parsing succeeded. Parse failures keep the raw text and a failure note.
struct StepRecord {
  int step = 0;
  std::string raw_text;
  std::optional<StructuredResponse> response;
  std::string parse_error;  // set when response is absent
};

struct ReasoningTrace {
  std::string study_id;
  ReasoningMode mode = ReasoningMode::single_shot;
  std::vector<StepRecord> steps;
  // final minus baseline; absent when either end failed to parse
  std::optional<double> uncertainty_delta;
  std::optional<long> evidence_length_delta;  // words
};

/// Recomputes both deltas from the first and last step, overwriting any
/// stored values.
void recompute_deltas(ReasoningTrace& trace);

/// Step 0 sends the report only; step 1 adds the [RADIOMICS] section; step 2
/// sends the full card. The system text carries the output schema and the
/// responsible-use instructions; images attach frontal-then-lateral.
ChatRequest build_prompt(const Study& study, const std::optional<context::FeatureCard>& card,
                         int step);

/// One chat-completion call with retries on transient failures (5xx,
/// connection errors). Returns the assistant text verbatim. Throws Timeout,
/// HttpError, or RetriesExhausted.
std::string complete(const EndpointConfig& cfg, const ChatRequest& req);

/// Extracts the first balanced JSON object from the raw text (code fences
/// and surrounding prose tolerated), maps the five schema keys
/// case-insensitively, and coerces a numeric-string uncertainty. No
/// clamping: out-of-range uncertainty parses fine and fails verification.
/// Throws NoJsonFound, MissingField, or NonNumericUncertainty.
StructuredResponse parse_structured(const std::string& raw);

/// Parse variant that never throws; failures land in StepRecord.parse_error.
StepRecord parse_step(int step, const std::string& raw);

/// One step-2-style call carrying the full card; the trace holds a single
/// step with index 0.
ReasoningTrace run_single_shot(const Study& study, const context::FeatureCard& card,
                               const EndpointConfig& cfg);

/// Three sequential calls with progressively richer context. A transport or
/// endpoint failure aborts the trace; the thrown error names the failing
/// step. Parse failures do not abort: they are recorded in the step.
ReasoningTrace run_stepwise(const Study& study, const context::FeatureCard& card,
                            const EndpointConfig& cfg);

/// NDJSON (de)serialization for trace streams.
std::string trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const std::string& line);

}  // namespace ctxalign::reason
