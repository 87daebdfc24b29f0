#include "pipeline_commands.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ctxalign/artifacts.hpp"
#include "ctxalign/config.hpp"
#include "ctxalign/errors.hpp"
#include "ctxalign/evalharness.hpp"
#include "ctxalign/image_io.hpp"
#include "ctxalign/ingest.hpp"
#include "ctxalign/mock_endpoint.hpp"
#include "ctxalign/raiguard.hpp"
#include "ctxalign/reason.hpp"

namespace ctxalign::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PipelineConfig effective_config(const CommonOptions& common) {
  PipelineConfig cfg =
      common.config_path.empty() ? PipelineConfig{} : load_config(common.config_path);
  if (common.seed) cfg.seed = *common.seed;
  return cfg;
}

std::string out_path(const CommonOptions& common, const std::string& name) {
  fs::create_directories(common.out_dir);
  return (fs::path(common.out_dir) / name).string();
}

std::string quantity(std::size_t n, const std::string& noun) {
  return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
}

}  // namespace

CommandOutcome cmd_extract(const CommonOptions& common, const ExtractOptions& opts) {
  const PipelineConfig cfg = effective_config(common);
  const context::Vocabulary vocab = context::load_vocabulary(cfg.vocabulary_path);

  const bool use_chexpert = !opts.chexpert_csv.empty();
  const ingest::DatasetManifest manifest =
      use_chexpert ? ingest::parse_chexpert_manifest(opts.chexpert_csv, opts.image_root)
                   : ingest::parse_openi_manifest(opts.openi_root);
  if (manifest.entries.empty()) {
    return {2, "dataset has no entries", {}};
  }

  const std::string features_path = out_path(common, "features.ndjson");
  artifacts::NdjsonWriter writer(features_path);
  std::size_t written = 0;
  std::size_t failed = 0;

  for (const ingest::ManifestEntry& entry : manifest.entries) {
    try {
      const Study study = ingest::load_study(manifest, entry);
      const GrayImage& primary =
          study.frontal_image ? *study.frontal_image : *study.lateral_image;

      artifacts::FeatureRecord record;
      record.study_id = study.id;
      record.report = study.report;
      record.labels = study.labels;
      const fs::path root(manifest.root);
      if (!entry.frontal_path.empty()) record.frontal_path = (root / entry.frontal_path).string();
      if (!entry.lateral_path.empty()) record.lateral_path = (root / entry.lateral_path).string();

      record.radiomics = radiomics::extract_radiomics(primary, cfg);
      if (!entry.acts_path.empty() && !entry.grads_path.empty()) {
        const xai::Tensor3 acts = ingest::load_tensor((root / entry.acts_path).string());
        const xai::Tensor3 grads = ingest::load_tensor((root / entry.grads_path).string());
        record.xai = xai::gradcam_summary(acts, grads, cfg.top_mass_fraction);
      }
      record.anchors = context::extract_anchors(study.report, vocab);

      const context::FeatureCard card =
          context::serialize_card(record.radiomics, record.xai, record.anchors);
      record.card = card.rendered;

      writer.write_line(artifacts::record_to_json(record));
      ++written;
    } catch (const Error& e) {
      std::cerr << "extract: study '" << entry.study_id << "' failed: " << e.what() << "\n";
      ++failed;
    }
  }
  writer.commit();

  CommandOutcome outcome;
  outcome.exit_code = failed == 0 ? 0 : 1;
  outcome.summary = "extracted " + quantity(written, "record") + ", " +
                    quantity(failed, "failure");
  outcome.artifacts_written = {features_path};
  return outcome;
}

CommandOutcome cmd_reason(const CommonOptions& common, const ReasonOptions& opts) {
  PipelineConfig cfg = effective_config(common);
  if (!opts.mode.empty()) cfg.mode = reasoning_mode_from_string(opts.mode);
  if (!opts.base_url_override.empty()) cfg.endpoint.base_url = opts.base_url_override;

  std::vector<artifacts::FeatureRecord> records;
  std::size_t malformed = 0;
  for (const std::string& line : artifacts::read_ndjson(opts.features_path)) {
    try {
      records.push_back(artifacts::record_from_json(line));
    } catch (const std::exception& e) {
      std::cerr << "reason: malformed feature record skipped: " << e.what() << "\n";
      ++malformed;
    }
  }
  if (records.empty()) {
    return {2, "no feature records in " + opts.features_path, {}};
  }
  if (opts.limit && records.size() > *opts.limit) records.resize(*opts.limit);

  struct Slot {
    std::string trace_json;
    std::string study_error;
    bool fatal = false;
    Errc fatal_code = Errc::http_error;
    std::string fatal_message;
  };
  std::vector<Slot> slots(records.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort_flag{false};

  auto worker = [&] {
    while (!abort_flag.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      const artifacts::FeatureRecord& record = records[i];
      try {
        Study study;
        study.id = record.study_id;
        study.report = record.report;
        study.labels = record.labels;
        if (!record.frontal_path.empty()) {
          study.frontal_image = image_io::decode_image(record.frontal_path);
        }
        if (!record.lateral_path.empty()) {
          study.lateral_image = image_io::decode_image(record.lateral_path);
        }
        validate_study(study);

        const context::FeatureCard card =
            context::serialize_card(record.radiomics, record.xai, record.anchors);
        const reason::ReasoningTrace trace =
            cfg.mode == ReasoningMode::stepwise
                ? reason::run_stepwise(study, card, cfg.endpoint)
                : reason::run_single_shot(study, card, cfg.endpoint);
        slots[i].trace_json = reason::trace_to_json(trace);
      } catch (const Error& e) {
        // an unusable endpoint poisons every study; stop instead of burning retries
        if (e.code() == Errc::timeout || e.code() == Errc::retries_exhausted) {
          slots[i].fatal = true;
          slots[i].fatal_code = e.code();
          slots[i].fatal_message = e.what();
          abort_flag.store(true);
          return;
        }
        slots[i].study_error = e.what();
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  for (const Slot& slot : slots) {
    if (slot.fatal) {
      return {2, "endpoint failure: " + slot.fatal_message, {}};
    }
  }

  const std::string traces_path = out_path(common, "traces.ndjson");
  artifacts::NdjsonWriter writer(traces_path);
  std::size_t written = 0;
  std::size_t failed = malformed;
  for (const Slot& slot : slots) {
    if (!slot.trace_json.empty()) {
      writer.write_line(slot.trace_json);
      ++written;
    } else {
      std::cerr << "reason: " << slot.study_error << "\n";
      ++failed;
    }
  }
  writer.commit();

  CommandOutcome outcome;
  outcome.exit_code = failed == 0 ? 0 : 1;
  outcome.summary = "wrote " + quantity(written, "trace") + " (" + to_string(cfg.mode) + "), " +
                    quantity(failed, "failure");
  outcome.artifacts_written = {traces_path};
  return outcome;
}

CommandOutcome cmd_verify(const CommonOptions& common, const VerifyOptions& opts) {
  const rai::Packs packs =
      opts.packs_dir.empty() ? rai::Packs::defaults() : rai::Packs::load_dir(opts.packs_dir);

  const std::vector<std::string> lines = artifacts::read_ndjson(opts.traces_path);
  if (lines.empty()) return {2, "no traces in " + opts.traces_path, {}};

  const std::string reports_path = out_path(common, "verifications.ndjson");
  artifacts::NdjsonWriter writer(reports_path);
  std::vector<rai::VerificationReport> reports;
  std::size_t malformed = 0;

  for (const std::string& line : lines) {
    reason::ReasoningTrace trace;
    try {
      trace = reason::trace_from_json(line);
      if (trace.steps.empty()) throw Error(Errc::bad_header, "trace has no steps");
    } catch (const std::exception& e) {
      std::cerr << "verify: malformed trace line skipped: " << e.what() << "\n";
      ++malformed;
      continue;
    }
    const reason::StepRecord& final_step = trace.steps.back();
    rai::VerifyInput input;
    input.response = final_step.response;
    input.raw_text = final_step.raw_text;
    const rai::VerificationReport report = rai::verify(input, packs);
    reports.push_back(report);
    writer.write_line(rai::report_to_json(report, trace.study_id));
  }
  writer.commit();

  CommandOutcome outcome;
  if (reports.empty()) {
    outcome.exit_code = 2;
    outcome.summary = "all trace lines malformed";
    return outcome;
  }
  const rai::RaiAggregate agg = rai::batch_rai_report(reports, reports.size());
  const std::string summary_path = out_path(common, "rai_summary.json");
  {
    std::ofstream out(summary_path, std::ios::binary);
    out << rai::rai_table_json(agg) << "\n";
  }
  std::cout << (opts.format == "json" ? rai::rai_table_json(agg) + "\n" : rai::rai_table_text(agg));

  outcome.exit_code = malformed == 0 ? 0 : 1;
  outcome.summary = "verified " + quantity(reports.size(), "response") + ", " +
                    quantity(malformed, "malformed line");
  outcome.artifacts_written = {reports_path, summary_path};
  return outcome;
}

namespace {

std::vector<eval::AblationConfigRow> default_configurations() {
  return {
      {"radiomics", {"radiomics"}},
      {"xai", {"xai"}},
      {"text", {"text_embedding"}},
      {"radiomics+text", {"radiomics", "text_embedding"}},
      {"xai+text", {"xai", "text_embedding"}},
      {"radiomics+xai+text", {"radiomics", "xai", "text_embedding"}},
  };
}

std::vector<eval::AblationConfigRow> load_configurations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read configurations file '" + path + "'");
  json root = json::parse(in, nullptr, false);
  if (root.is_discarded() || !root.is_array()) {
    throw Error(Errc::bad_config, "configurations file must hold a JSON array");
  }
  std::vector<eval::AblationConfigRow> rows;
  for (const json& item : root) {
    eval::AblationConfigRow row;
    row.name = item.at("name").get<std::string>();
    row.blocks = item.at("blocks").get<std::vector<std::string>>();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::bad_config, "configurations file holds no rows");
  return rows;
}

}  // namespace

CommandOutcome cmd_ablate(const CommonOptions& common, const AblateOptions& opts) {
  const PipelineConfig cfg = effective_config(common);
  const context::Vocabulary vocab = context::load_vocabulary(cfg.vocabulary_path);

  std::vector<artifacts::FeatureRecord> records;
  for (const std::string& line : artifacts::read_ndjson(opts.features_path)) {
    records.push_back(artifacts::record_from_json(line));
  }
  const ingest::EmbeddingTable embeddings = ingest::load_embeddings(opts.embeddings_path);

  const artifacts::MatrixAssembly assembly =
      artifacts::assemble_feature_matrix(records, embeddings, vocab, opts.label_name);
  if (assembly.X.rows == 0) {
    return {2, "no usable rows (skipped " + std::to_string(assembly.skipped) + ")", {}};
  }
  if (assembly.skipped > 0) {
    std::cerr << "ablate: skipped " << assembly.skipped << " rows without label/radiomics/embedding\n";
  }
  if (assembly.missing_xai > 0) {
    std::cerr << "ablate: " << assembly.missing_xai << " rows lack xai summaries (zero-filled)\n";
  }

  const std::vector<eval::AblationConfigRow> rows = opts.configurations_path.empty()
                                                        ? default_configurations()
                                                        : load_configurations(opts.configurations_path);
  eval::TrainConfig train_cfg;
  train_cfg.seed = cfg.seed;
  const std::vector<eval::AblationResult> results =
      eval::run_ablation(assembly.X, assembly.y, rows, train_cfg);

  const std::string json_path = out_path(common, "ablation.json");
  {
    std::ofstream out(json_path, std::ios::binary);
    out << eval::ablation_table_json(results) << "\n";
  }
  std::cout << (opts.format == "json" ? eval::ablation_table_json(results) + "\n"
                                      : eval::ablation_table_text(results));

  std::size_t failed = 0;
  for (const eval::AblationResult& r : results) {
    if (!r.ok) ++failed;
  }
  CommandOutcome outcome;
  outcome.exit_code = failed == 0 ? 0 : 1;
  outcome.summary = quantity(results.size() - failed, "configuration") + " scored, " +
                    quantity(failed, "failure") + " over " + std::to_string(assembly.X.rows) +
                    " rows";
  outcome.artifacts_written = {json_path};
  return outcome;
}

CommandOutcome cmd_report(const CommonOptions& common, const ReportOptions& opts) {
  const PipelineConfig cfg = effective_config(common);

  std::vector<reason::ReasoningTrace> traces;
  std::size_t malformed = 0;
  for (const std::string& line : artifacts::read_ndjson(opts.traces_path)) {
    try {
      traces.push_back(reason::trace_from_json(line));
    } catch (const std::exception& e) {
      std::cerr << "report: malformed trace line skipped: " << e.what() << "\n";
      ++malformed;
    }
  }
  if (traces.empty()) return {2, "no traces in " + opts.traces_path, {}};

  const eval::AgenticReport agentic = eval::agentic_metrics(traces);
  const std::string agentic_path = out_path(common, "agentic.json");
  {
    std::ofstream out(agentic_path, std::ios::binary);
    out << eval::agentic_table_json(agentic) << "\n";
  }
  std::cout << (opts.format == "json" ? eval::agentic_table_json(agentic) + "\n"
                                      : eval::agentic_table_text(agentic));

  CommandOutcome outcome;
  outcome.artifacts_written = {agentic_path};

  if (!opts.features_path.empty()) {
    const context::Vocabulary vocab = context::load_vocabulary(cfg.vocabulary_path);
    std::map<std::string, artifacts::FeatureRecord> by_id;
    for (const std::string& line : artifacts::read_ndjson(opts.features_path)) {
      artifacts::FeatureRecord record = artifacts::record_from_json(line);
      by_id[record.study_id] = std::move(record);
    }
    std::vector<std::string> generated;
    std::vector<std::string> references;
    double r1 = 0.0, r2 = 0.0, rl = 0.0;
    for (const reason::ReasoningTrace& trace : traces) {
      if (trace.steps.empty() || !trace.steps.back().response) continue;
      const auto it = by_id.find(trace.study_id);
      if (it == by_id.end()) continue;
      const StructuredResponse& resp = *trace.steps.back().response;
      generated.push_back(resp.impression + " " + resp.evidence);
      references.push_back(it->second.report);
      const eval::RougeScores scores = eval::rouge(generated.back(), references.back());
      r1 += scores.r1;
      r2 += scores.r2;
      rl += scores.rl;
    }
    if (!generated.empty()) {
      const double hr = eval::hallucination_rate(generated, references, vocab);
      const double n = static_cast<double>(generated.size());
      json quality;
      quality["n"] = generated.size();
      quality["hallucination_rate"] = hr;
      quality["rouge1_mean"] = r1 / n;
      quality["rouge2_mean"] = r2 / n;
      quality["rougeL_mean"] = rl / n;
      const std::string quality_path = out_path(common, "quality.json");
      {
        std::ofstream out(quality_path, std::ios::binary);
        out << quality.dump() << "\n";
      }
      if (opts.format == "json") {
        std::cout << quality.dump() << "\n";
      } else {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "Hallucination rate (HR)       %.4f\n"
                      "ROUGE-1 / ROUGE-2 / ROUGE-L   %.4f / %.4f / %.4f  (n=%zu)\n",
                      hr, r1 / n, r2 / n, rl / n, generated.size());
        std::cout << buf;
      }
      outcome.artifacts_written.push_back(quality_path);
    }
  }

  outcome.exit_code = malformed == 0 ? 0 : 1;
  outcome.summary = "reported on " + quantity(traces.size(), "trace") + ", " +
                    quantity(malformed, "malformed line");
  return outcome;
}

namespace {
volatile std::sig_atomic_t g_stop_requested = 0;
void handle_stop(int) { g_stop_requested = 1; }
}  // namespace

CommandOutcome cmd_mock_serve(const CommonOptions&, const MockServeOptions& opts) {
  mock::validate_mock_script(opts.script_path);
  mock::MockServer server(opts.script_path, opts.port);
  std::cout << "listening on 127.0.0.1:" << opts.port << std::endl;

  std::signal(SIGINT, handle_stop);
  std::signal(SIGTERM, handle_stop);
  while (!g_stop_requested) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server.stop();
  return {0, "mock endpoint stopped", {}};
}

}  // namespace ctxalign::cli
