#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxalign/context.hpp"
#include "ctxalign/reason.hpp"

namespace ctxalign::eval {

/// Named half-open column span inside a FeatureMatrix.
struct ColumnBlock {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Row-major design matrix whose columns are partitioned into named blocks
/// (radiomics, xai, text_embedding, vocab_indicator).
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<ColumnBlock> blocks;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

/// Throws when block spans do not partition [0, cols) or values are non-finite.
void validate_matrix(const FeatureMatrix& X);

/// Copies the named blocks into a new matrix (block order = argument order).
/// Throws UnknownBlock.
FeatureMatrix slice_blocks(const FeatureMatrix& X, const std::vector<std::string>& names);

struct TrainConfig {
  double learning_rate = 0.1;
  double l2_lambda = 1e-3;
  int epochs = 500;
  std::uint64_t seed = 0;
};

struct LogisticModel {
  std::vector<double> weights;  // raw feature space; dropped columns carry 0
  double bias = 0.0;
  TrainConfig train_config;
  std::vector<double> loss_history;  // one entry per epoch, non-increasing
};

/// Full-batch gradient descent on L2-regularized log-loss over per-column
/// standardized features (zero-variance columns dropped). The step is halved
/// within an epoch whenever it would increase the loss, so loss_history is
/// non-increasing. Deterministic under a fixed seed.
LogisticModel train_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                             const TrainConfig& cfg);

std::vector<double> predict(const LogisticModel& model, const FeatureMatrix& X);

/// Rank-based (Mann-Whitney) AUC; ties contribute 1/2. Throws SingleClass.
double auc(std::span<const double> scores, std::span<const int> labels);

struct AblationConfigRow {
  std::string name;
  std::vector<std::string> blocks;
};

struct AblationResult {
  std::string name;
  std::vector<std::string> blocks;
  bool ok = false;
  double auc = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::string error;  // set when !ok
};

/// Per configuration: slice columns, stratified 80/20 split under the config
/// seed, train, score AUC on the held-out rows. Failing configurations
/// produce an error row without aborting the others.
std::vector<AblationResult> run_ablation(const FeatureMatrix& X, const std::vector<int>& y,
                                         const std::vector<AblationConfigRow>& configurations,
                                         const TrainConfig& cfg, double test_fraction = 0.2);

std::string ablation_table_text(const std::vector<AblationResult>& results);
std::string ablation_table_json(const std::vector<AblationResult>& results);

/// Mean count per study of vocabulary terms present (whole-word) in the
/// generated text but absent from the reference. Throws LengthMismatch.
double hallucination_rate(const std::vector<std::string>& generated,
                          const std::vector<std::string>& references,
                          const context::Vocabulary& keyword_vocab);

std::size_t hallucinated_keyword_count(const std::string& generated, const std::string& reference,
                                       const context::Vocabulary& keyword_vocab);

struct StepStats {
  int step = 0;
  std::size_t parsed = 0;
  std::size_t parse_failures = 0;
  double uncertainty_mean = 0.0;
  double uncertainty_std = 0.0;  // population std
  double evidence_words_mean = 0.0;
  double evidence_words_std = 0.0;
  double limitations_rate = 0.0;
  double safety_rate = 0.0;
};

struct AgenticReport {
  std::vector<StepStats> steps;
  // first -> last step shifts over the per-step aggregates
  double delta_uncertainty = 0.0;
  double delta_evidence_words = 0.0;
  double delta_limitations_rate = 0.0;
  double delta_safety_rate = 0.0;
};

/// Aggregates traces per step: mean/std uncertainty and evidence word count
/// (parse failures excluded and counted), limitation/safety presence rates.
/// Throws EmptyBatch.
AgenticReport agentic_metrics(const std::vector<reason::ReasoningTrace>& traces);

std::string agentic_table_text(const AgenticReport& report);
std::string agentic_table_json(const AgenticReport& report);

struct RougeScores {
  double r1 = 0.0;
  double r2 = 0.0;
  double rl = 0.0;
};

/// F1 variants over lowercased, punctuation-stripped, whitespace-split
/// tokens; R-L uses longest common subsequence. Empty vs anything is 0.
RougeScores rouge(const std::string& candidate, const std::string& reference);

}  // namespace ctxalign::eval
