#include <iostream>

#include <CLI11.hpp>

#include "ctxalign/errors.hpp"
#include "pipeline_commands.hpp"

int main(int argc, char** argv) {
  using namespace ctxalign::cli;

  CLI::App app{"Context-aligned multimodal reasoning pipeline"};
  app.require_subcommand(1);

  CommonOptions common;
  std::uint64_t seed_value = 0;
  app.add_option("--config", common.config_path, "Pipeline config JSON file");
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the config seed");
  app.add_option("--out", common.out_dir, "Output directory (default: out)");

  ExtractOptions extract_opts;
  auto* extract = app.add_subcommand("extract", "Extract per-study feature records");
  auto* openi = extract->add_option("--openi", extract_opts.openi_root, "OpenI-style dataset root");
  auto* chexpert =
      extract->add_option("--chexpert", extract_opts.chexpert_csv, "CheXpert-style label CSV");
  extract->add_option("--image-root", extract_opts.image_root, "Image root for --chexpert");
  openi->excludes(chexpert);

  ReasonOptions reason_opts;
  auto* reason = app.add_subcommand("reason", "Drive the endpoint over feature records");
  reason->add_option("--features", reason_opts.features_path, "features.ndjson from extract")
      ->required();
  reason->add_option("--mode", reason_opts.mode, "single|stepwise (default: config)");
  std::size_t limit_value = 0;
  auto* limit_opt = reason->add_option("--limit", limit_value, "Process at most N studies");
  reason->add_option("--jobs", reason_opts.jobs, "Concurrent studies in flight (default 1)");
  reason->add_option("--base-url", reason_opts.base_url_override, "Override endpoint base URL");

  VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Verify responsible-AI constraints on traces");
  verify->add_option("--traces", verify_opts.traces_path, "traces.ndjson from reason")->required();
  verify->add_option("--packs", verify_opts.packs_dir, "Heuristic pack directory");
  verify->add_option("--format", verify_opts.format, "text|json (default text)");

  AblateOptions ablate_opts;
  auto* ablate = app.add_subcommand("ablate", "Logistic-regression ablation over feature blocks");
  ablate->add_option("--features", ablate_opts.features_path, "features.ndjson from extract")
      ->required();
  ablate->add_option("--embeddings", ablate_opts.embeddings_path, "Embeddings CSV")->required();
  ablate->add_option("--configurations", ablate_opts.configurations_path,
                     "JSON array of {name, blocks} rows");
  ablate->add_option("--label", ablate_opts.label_name, "Label column (default: label)");
  ablate->add_option("--format", ablate_opts.format, "text|json (default text)");

  ReportOptions report_opts;
  auto* report = app.add_subcommand("report", "Aggregate agentic metrics over traces");
  report->add_option("--traces", report_opts.traces_path, "traces.ndjson from reason")->required();
  report->add_option("--features", report_opts.features_path,
                     "features.ndjson (enables hallucination rate and ROUGE)");
  report->add_option("--format", report_opts.format, "text|json (default text)");

  MockServeOptions mock_opts;
  auto* mock = app.add_subcommand("mock-serve", "Run the deterministic mock endpoint");
  mock->add_option("--script", mock_opts.script_path, "Mock script JSON")->required();
  mock->add_option("--port", mock_opts.port, "Port to bind (default 8080)");

  CLI11_PARSE(app, argc, argv);

  if (!seed_opt->empty()) common.seed = seed_value;
  if (!limit_opt->empty()) reason_opts.limit = limit_value;

  try {
    CommandOutcome outcome;
    if (extract->parsed()) {
      if (extract_opts.openi_root.empty() && extract_opts.chexpert_csv.empty()) {
        std::cerr << "extract: provide --openi or --chexpert\n";
        return 2;
      }
      outcome = cmd_extract(common, extract_opts);
    } else if (reason->parsed()) {
      outcome = cmd_reason(common, reason_opts);
    } else if (verify->parsed()) {
      outcome = cmd_verify(common, verify_opts);
    } else if (ablate->parsed()) {
      outcome = cmd_ablate(common, ablate_opts);
    } else if (report->parsed()) {
      outcome = cmd_report(common, report_opts);
    } else if (mock->parsed()) {
      outcome = cmd_mock_serve(common, mock_opts);
    }
    std::cout << outcome.summary << "\n";
    for (const std::string& path : outcome.artifacts_written) {
      std::cout << "wrote " << path << "\n";
    }
    return outcome.exit_code;
  } catch (const ctxalign::Error& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 2;
  }
}
