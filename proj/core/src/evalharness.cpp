#include "ctxalign/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ctxalign/errors.hpp"
#include "ctxalign/raiguard.hpp"
#include "ctxalign/text.hpp"

namespace ctxalign::eval {

namespace {

using nlohmann::json;

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  ms.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - ms.mean) * (x - ms.mean);
  ms.std = std::sqrt(sq / static_cast<double>(xs.size()));
  return ms;
}

void check_labels(const std::vector<int>& y) {
  bool has0 = false;
  bool has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw Error(Errc::dimension_mismatch, "labels must be 0 or 1, got " + std::to_string(v));
  }
  if (!has0 || !has1) throw Error(Errc::single_class, "both classes must be present");
}

}  // namespace

void validate_matrix(const FeatureMatrix& X) {
  if (X.values.size() != X.rows * X.cols) {
    throw Error(Errc::dimension_mismatch, "matrix buffer does not match rows*cols");
  }
  std::size_t cursor = 0;
  for (const ColumnBlock& b : X.blocks) {
    if (b.begin != cursor || b.end < b.begin || b.end > X.cols) {
      throw Error(Errc::dimension_mismatch, "block '" + b.name + "' breaks the column partition");
    }
    cursor = b.end;
  }
  if (cursor != X.cols) {
    throw Error(Errc::dimension_mismatch, "blocks do not cover all columns");
  }
  for (double v : X.values) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "matrix contains a non-finite value");
  }
}

FeatureMatrix slice_blocks(const FeatureMatrix& X, const std::vector<std::string>& names) {
  std::vector<const ColumnBlock*> selected;
  for (const std::string& name : names) {
    const auto it = std::find_if(X.blocks.begin(), X.blocks.end(),
                                 [&](const ColumnBlock& b) { return b.name == name; });
    if (it == X.blocks.end()) throw Error(Errc::unknown_block, name);
    selected.push_back(&*it);
  }
  FeatureMatrix out;
  out.rows = X.rows;
  for (const ColumnBlock* b : selected) out.cols += b->end - b->begin;
  out.values.resize(out.rows * out.cols);
  std::size_t offset = 0;
  for (const ColumnBlock* b : selected) {
    const std::size_t width = b->end - b->begin;
    for (std::size_t r = 0; r < X.rows; ++r) {
      std::copy_n(X.values.data() + r * X.cols + b->begin, width,
                  out.values.data() + r * out.cols + offset);
    }
    out.blocks.push_back({b->name, offset, offset + width});
    offset += width;
  }
  return out;
}

LogisticModel train_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                             const TrainConfig& cfg) {
  if (y.size() != X.rows) {
    throw Error(Errc::dimension_mismatch, std::to_string(y.size()) + " labels for " +
                                              std::to_string(X.rows) + " rows");
  }
  if (X.rows < 2) throw Error(Errc::single_class, "need at least 2 rows");
  check_labels(y);

  const std::size_t n = X.rows;
  const std::size_t d = X.cols;

  // per-column standardization; zero-variance columns dropped
  std::vector<double> mean(d, 0.0), std_dev(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += X.at(r, c);
    mean[c] = s / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double diff = X.at(r, c) - mean[c];
      sq += diff * diff;
    }
    std_dev[c] = std::sqrt(sq / static_cast<double>(n));
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < d; ++c) {
    if (std_dev[c] > 0.0) kept.push_back(c);
  }
  const std::size_t k = kept.size();

  std::vector<double> Z(n * k);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t c = kept[j];
      Z[r * k + j] = (X.at(r, c) - mean[c]) / std_dev[c];
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  std::vector<double> w(k);
  for (double& wi : w) wi = init(rng);
  double b = 0.0;

  auto loss_at = [&](const std::vector<double>& wv, double bv) {
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double z = bv;
      const double* row = Z.data() + r * k;
      for (std::size_t j = 0; j < k; ++j) z += wv[j] * row[j];
      // log(1+exp(-m)) with the numerically safe branch
      const double m = y[r] == 1 ? z : -z;
      loss += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double wi : wv) reg += wi * wi;
    return loss + 0.5 * cfg.l2_lambda * reg;
  };

  LogisticModel model;
  model.train_config = cfg;
  double current_loss = loss_at(w, b);

  std::vector<double> grad_w(k);
  std::vector<double> w_next(k);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double z = b;
      const double* row = Z.data() + r * k;
      for (std::size_t j = 0; j < k; ++j) z += w[j] * row[j];
      const double residual = sigmoid(z) - static_cast<double>(y[r]);
      for (std::size_t j = 0; j < k; ++j) grad_w[j] += residual * row[j];
      grad_b += residual;
    }
    for (std::size_t j = 0; j < k; ++j) {
      grad_w[j] = grad_w[j] / static_cast<double>(n) + cfg.l2_lambda * w[j];
    }
    grad_b /= static_cast<double>(n);

    // halve the step until the loss stops increasing; keeps loss_history
    // non-increasing on every run
    double lr = cfg.learning_rate;
    double next_loss = current_loss;
    double b_next = b;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t j = 0; j < k; ++j) w_next[j] = w[j] - lr * grad_w[j];
      b_next = b - lr * grad_b;
      next_loss = loss_at(w_next, b_next);
      if (next_loss <= current_loss) break;
      lr *= 0.5;
    }
    if (next_loss <= current_loss) {
      w.swap(w_next);
      b = b_next;
      current_loss = next_loss;
    }
    model.loss_history.push_back(current_loss);
  }

  // fold the standardization back into raw-space weights
  model.weights.assign(d, 0.0);
  model.bias = b;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t c = kept[j];
    model.weights[c] = w[j] / std_dev[c];
    model.bias -= w[j] * mean[c] / std_dev[c];
  }
  return model;
}

std::vector<double> predict(const LogisticModel& model, const FeatureMatrix& X) {
  if (model.weights.size() != X.cols) {
    throw Error(Errc::dimension_mismatch, std::to_string(model.weights.size()) +
                                              " weights for " + std::to_string(X.cols) + " columns");
  }
  std::vector<double> scores(X.rows);
  for (std::size_t r = 0; r < X.rows; ++r) {
    double z = model.bias;
    const auto row = X.row(r);
    for (std::size_t c = 0; c < X.cols; ++c) z += model.weights[c] * row[c];
    scores[r] = sigmoid(z);
  }
  return scores;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::length_mismatch, "scores and labels differ in length");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y == 1) ++n_pos;
    else ++n_neg;
  }
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::single_class, "both classes required for AUC");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks across ties (1-based)
  std::vector<double> rank(scores.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] == 1) pos_rank_sum += rank[t];
  }
  const double u = pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

Split stratified_split(const std::vector<int>& y, double test_fraction, std::uint64_t seed) {
  Split split;
  std::mt19937_64 rng(seed);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(members.size()))));
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < n_test ? split.test : split.train).push_back(members[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

FeatureMatrix take_rows(const FeatureMatrix& X, const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.rows = rows.size();
  out.cols = X.cols;
  out.blocks = X.blocks;
  out.values.resize(out.rows * out.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(X.values.data() + rows[r] * X.cols, X.cols, out.values.data() + r * X.cols);
  }
  return out;
}

AblationResult run_one_configuration(const FeatureMatrix& X, const std::vector<int>& y,
                                     const AblationConfigRow& row, const TrainConfig& cfg,
                                     double test_fraction) {
  AblationResult result;
  result.name = row.name;
  result.blocks = row.blocks;
  try {
    const FeatureMatrix sliced = slice_blocks(X, row.blocks);
    const Split split = stratified_split(y, test_fraction, cfg.seed);
    const FeatureMatrix train_X = take_rows(sliced, split.train);
    const FeatureMatrix test_X = take_rows(sliced, split.test);
    std::vector<int> train_y, test_y;
    for (std::size_t i : split.train) train_y.push_back(y[i]);
    for (std::size_t i : split.test) test_y.push_back(y[i]);

    const LogisticModel model = train_logistic(train_X, train_y, cfg);
    const std::vector<double> scores = predict(model, test_X);
    result.auc = auc(scores, test_y);
    result.n_train = train_y.size();
    result.n_test = test_y.size();
    result.ok = true;
  } catch (const Error& e) {
    result.error = e.what();
  }
  return result;
}

}  // namespace

std::vector<AblationResult> run_ablation(const FeatureMatrix& X, const std::vector<int>& y,
                                         const std::vector<AblationConfigRow>& configurations,
                                         const TrainConfig& cfg, double test_fraction) {
  if (configurations.empty()) throw Error(Errc::empty_batch, "no ablation configurations");
  validate_matrix(X);
  if (y.size() != X.rows) {
    throw Error(Errc::dimension_mismatch, "label count does not match matrix rows");
  }
  // independent training jobs; one async task per configuration
  std::vector<std::future<AblationResult>> jobs;
  jobs.reserve(configurations.size());
  for (const AblationConfigRow& row : configurations) {
    jobs.push_back(std::async(std::launch::async, [&X, &y, row, cfg, test_fraction] {
      return run_one_configuration(X, y, row, cfg, test_fraction);
    }));
  }
  std::vector<AblationResult> results;
  results.reserve(jobs.size());
  for (auto& job : jobs) results.push_back(job.get());
  return results;
}

std::string ablation_table_text(const std::vector<AblationResult>& results) {
  std::ostringstream out;
  out << "Feature Configuration            AUC\n";
  for (const AblationResult& r : results) {
    out << r.name;
    for (std::size_t i = r.name.size(); i < 30; ++i) out << ' ';
    if (r.ok) {
      out << "  " << fixed4(r.auc) << "  (train " << r.n_train << ", test " << r.n_test << ")";
    } else {
      out << "  error: " << r.error;
    }
    out << "\n";
  }
  return out.str();
}

std::string ablation_table_json(const std::vector<AblationResult>& results) {
  json arr = json::array();
  for (const AblationResult& r : results) {
    json row;
    row["name"] = r.name;
    row["blocks"] = r.blocks;
    if (r.ok) {
      row["auc"] = r.auc;
      row["n_train"] = r.n_train;
      row["n_test"] = r.n_test;
    } else {
      row["error"] = r.error;
    }
    arr.push_back(row);
  }
  return arr.dump();
}

std::size_t hallucinated_keyword_count(const std::string& generated, const std::string& reference,
                                       const context::Vocabulary& keyword_vocab) {
  std::size_t count = 0;
  for (const std::string& term : keyword_vocab.terms) {
    if (ctxalign::text::contains_whole_word(generated, term) &&
        !ctxalign::text::contains_whole_word(reference, term)) {
      ++count;
    }
  }
  return count;
}

double hallucination_rate(const std::vector<std::string>& generated,
                          const std::vector<std::string>& references,
                          const context::Vocabulary& keyword_vocab) {
  if (generated.size() != references.size()) {
    throw Error(Errc::length_mismatch, std::to_string(generated.size()) + " responses vs " +
                                           std::to_string(references.size()) + " references");
  }
  if (generated.empty()) throw Error(Errc::empty_batch, "no responses");
  double total = 0.0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    total += static_cast<double>(hallucinated_keyword_count(generated[i], references[i], keyword_vocab));
  }
  return total / static_cast<double>(generated.size());
}

AgenticReport agentic_metrics(const std::vector<reason::ReasoningTrace>& traces) {
  if (traces.empty()) throw Error(Errc::empty_batch, "no traces");
  std::size_t n_steps = 0;
  for (const auto& t : traces) n_steps = std::max(n_steps, t.steps.size());
  if (n_steps == 0) throw Error(Errc::empty_batch, "traces carry no steps");

  AgenticReport report;
  for (std::size_t s = 0; s < n_steps; ++s) {
    StepStats stats;
    stats.step = static_cast<int>(s);
    std::vector<double> uncertainties;
    std::vector<double> evidence_words;
    std::size_t limitations = 0, safety = 0;
    for (const auto& trace : traces) {
      if (s >= trace.steps.size()) continue;
      const reason::StepRecord& step = trace.steps[s];
      if (!step.response) {
        ++stats.parse_failures;
        continue;
      }
      ++stats.parsed;
      uncertainties.push_back(step.response->uncertainty);
      evidence_words.push_back(static_cast<double>(ctxalign::text::word_count(step.response->evidence)));
      limitations += rai::field_present(step.response->limitations) ? 1 : 0;
      safety += rai::field_present(step.response->safety_note) ? 1 : 0;
    }
    const MeanStd unc = mean_std(uncertainties);
    const MeanStd evid = mean_std(evidence_words);
    stats.uncertainty_mean = unc.mean;
    stats.uncertainty_std = unc.std;
    stats.evidence_words_mean = evid.mean;
    stats.evidence_words_std = evid.std;
    if (stats.parsed > 0) {
      stats.limitations_rate = static_cast<double>(limitations) / static_cast<double>(stats.parsed);
      stats.safety_rate = static_cast<double>(safety) / static_cast<double>(stats.parsed);
    }
    report.steps.push_back(stats);
  }

  const StepStats& first = report.steps.front();
  const StepStats& last = report.steps.back();
  report.delta_uncertainty = last.uncertainty_mean - first.uncertainty_mean;
  report.delta_evidence_words = last.evidence_words_mean - first.evidence_words_mean;
  report.delta_limitations_rate = last.limitations_rate - first.limitations_rate;
  report.delta_safety_rate = last.safety_rate - first.safety_rate;
  return report;
}

std::string agentic_table_text(const AgenticReport& report) {
  std::ostringstream out;
  out << "Metric                        ";
  for (const StepStats& s : report.steps) out << "Step " << s.step << "           ";
  out << "Delta(first->last)\n";

  out << "Uncertainty (mean+/-std)      ";
  for (const StepStats& s : report.steps) {
    out << fixed2(s.uncertainty_mean) << " +/- " << fixed2(s.uncertainty_std) << "   ";
  }
  out << fixed4(report.delta_uncertainty) << "\n";

  out << "Evidence words (mean+/-std)   ";
  for (const StepStats& s : report.steps) {
    out << fixed2(s.evidence_words_mean) << " +/- " << fixed2(s.evidence_words_std) << "  ";
  }
  out << fixed4(report.delta_evidence_words) << "\n";

  out << "Limitations presence          ";
  for (const StepStats& s : report.steps) out << fixed2(s.limitations_rate) << "           ";
  out << fixed4(report.delta_limitations_rate) << "\n";

  out << "Safety-note presence          ";
  for (const StepStats& s : report.steps) out << fixed2(s.safety_rate) << "           ";
  out << fixed4(report.delta_safety_rate) << "\n";

  out << "Parse failures                ";
  for (const StepStats& s : report.steps) out << s.parse_failures << "              ";
  out << "\n";
  return out.str();
}

std::string agentic_table_json(const AgenticReport& report) {
  json steps = json::array();
  for (const StepStats& s : report.steps) {
    json row;
    row["step"] = s.step;
    row["parsed"] = s.parsed;
    row["parse_failures"] = s.parse_failures;
    row["uncertainty_mean"] = s.uncertainty_mean;
    row["uncertainty_std"] = s.uncertainty_std;
    row["evidence_words_mean"] = s.evidence_words_mean;
    row["evidence_words_std"] = s.evidence_words_std;
    row["limitations_rate"] = s.limitations_rate;
    row["safety_rate"] = s.safety_rate;
    steps.push_back(row);
  }
  json j;
  j["steps"] = steps;
  j["delta_uncertainty"] = report.delta_uncertainty;
  j["delta_evidence_words"] = report.delta_evidence_words;
  j["delta_limitations_rate"] = report.delta_limitations_rate;
  j["delta_safety_rate"] = report.delta_safety_rate;
  return j.dump();
}

namespace {

double f1_from_overlap(double overlap, double cand_total, double ref_total) {
  if (cand_total <= 0.0 || ref_total <= 0.0 || overlap <= 0.0) return 0.0;
  const double precision = overlap / cand_total;
  const double recall = overlap / ref_total;
  return 2.0 * precision * recall / (precision + recall);
}

double ngram_f1(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                std::size_t n) {
  if (cand.size() < n || ref.size() < n) return 0.0;
  auto grams = [n](const std::vector<std::string>& tokens) {
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t j = 1; j < n; ++j) g += " " + tokens[i + j];
      ++counts[g];
    }
    return counts;
  };
  const auto cand_grams = grams(cand);
  const auto ref_grams = grams(ref);
  std::size_t overlap = 0;
  for (const auto& [g, c] : cand_grams) {
    const auto it = ref_grams.find(g);
    if (it != ref_grams.end()) overlap += std::min(c, it->second);
  }
  return f1_from_overlap(static_cast<double>(overlap),
                         static_cast<double>(cand.size() - n + 1),
                         static_cast<double>(ref.size() - n + 1));
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    prev.swap(cur);
  }
  return prev[b.size()];
}

}  // namespace

RougeScores rouge(const std::string& candidate, const std::string& reference) {
  const auto cand = ctxalign::text::match_tokens(candidate);
  const auto ref = ctxalign::text::match_tokens(reference);
  RougeScores scores;
  if (cand.empty() || ref.empty()) return scores;
  scores.r1 = ngram_f1(cand, ref, 1);
  scores.r2 = ngram_f1(cand, ref, 2);
  scores.rl = f1_from_overlap(static_cast<double>(lcs_length(cand, ref)),
                              static_cast<double>(cand.size()), static_cast<double>(ref.size()));
  return scores;
}

}  // namespace ctxalign::eval
