#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctxalign {

/// Gray-level co-occurrence matrix parameters. Angles are degrees from
/// {0, 45, 90, 135}; all configured angles accumulate into one matrix.
struct GlcmConfig {
  int distance = 1;
  std::vector<int> angles = {0, 45, 90, 135};
  int levels = 16;
  bool symmetric = true;
};

struct LbpConfig {
  int neighbors = 8;
  int radius = 1;
  int histogram_bins = 256;
};

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string model_name = "qwen2-vl-2b-instruct";
  double timeout_s = 30.0;
  int max_retries = 2;
  double temperature = 0.0;  // 0 for reproducibility
  int max_output_tokens = 512;
};

enum class ReasoningMode { single_shot, stepwise };

std::string to_string(ReasoningMode mode);
ReasoningMode reasoning_mode_from_string(const std::string& s);

/// Every free parameter of the pipeline, read from one JSON file.
/// Unknown keys are rejected at any nesting level.
struct PipelineConfig {
  GlcmConfig glcm;
  LbpConfig lbp;
  std::vector<double> percentiles = {10, 25, 50, 75, 90};
  double top_mass_fraction = 0.10;
  std::string vocabulary_path = "data/vocabulary.txt";
  EndpointConfig endpoint;
  ReasoningMode mode = ReasoningMode::single_shot;
  std::uint64_t seed = 42;
};

/// Parses a config from JSON text. Throws BadConfig on unknown keys,
/// type errors, or invariant violations.
PipelineConfig parse_config(const std::string& json_text);

/// Reads and parses the config file. Throws IoError if unreadable.
PipelineConfig load_config(const std::string& path);

/// Validates all PipelineConfig invariants; throws BadConfig.
void validate_config(const PipelineConfig& cfg);

}  // namespace ctxalign
