#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctxalign::cli {

/// Tristate exit protocol: 0 success, 1 partial per-study failures, 2 fatal.
struct CommandOutcome {
  int exit_code = 0;
  std::string summary;
  std::vector<std::string> artifacts_written;
};

struct CommonOptions {
  std::string config_path;           // empty = built-in defaults
  std::optional<std::uint64_t> seed; // overrides config seed
  std::string out_dir = "out";
};

struct ExtractOptions {
  std::string openi_root;     // exactly one of openi_root / chexpert_csv
  std::string chexpert_csv;
  std::string image_root;     // required with chexpert_csv
};

struct ReasonOptions {
  std::string features_path;
  std::string mode;  // empty = config
  std::optional<std::size_t> limit;
  int jobs = 1;
  std::string base_url_override;
};

struct VerifyOptions {
  std::string traces_path;
  std::string packs_dir;  // empty = built-in defaults
  std::string format = "text";
};

struct AblateOptions {
  std::string features_path;
  std::string embeddings_path;
  std::string configurations_path;  // empty = the six default rows
  std::string label_name = "label";
  std::string format = "text";
};

struct ReportOptions {
  std::string traces_path;
  std::string features_path;  // optional: enables hallucination + rouge
  std::string format = "text";
};

struct MockServeOptions {
  std::string script_path;
  int port = 8080;
};

CommandOutcome cmd_extract(const CommonOptions& common, const ExtractOptions& opts);
CommandOutcome cmd_reason(const CommonOptions& common, const ReasonOptions& opts);
CommandOutcome cmd_verify(const CommonOptions& common, const VerifyOptions& opts);
CommandOutcome cmd_ablate(const CommonOptions& common, const AblateOptions& opts);
CommandOutcome cmd_report(const CommonOptions& common, const ReportOptions& opts);
CommandOutcome cmd_mock_serve(const CommonOptions& common, const MockServeOptions& opts);

}  // namespace ctxalign::cli
