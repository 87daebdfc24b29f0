#include "ctxalign/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ctxalign/errors.hpp"

namespace ctxalign {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& scope) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw Error(Errc::bad_config, "unknown key '" + key + "' in " + scope);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& scope) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, scope + "." + key + ": " + e.what());
  }
}

GlcmConfig parse_glcm(const json& obj) {
  reject_unknown_keys(obj, {"distance", "angles", "levels", "symmetric"}, "glcm");
  GlcmConfig cfg;
  read_field(obj, "distance", cfg.distance, "glcm");
  read_field(obj, "angles", cfg.angles, "glcm");
  read_field(obj, "levels", cfg.levels, "glcm");
  read_field(obj, "symmetric", cfg.symmetric, "glcm");
  return cfg;
}

LbpConfig parse_lbp(const json& obj) {
  reject_unknown_keys(obj, {"neighbors", "radius", "histogram_bins"}, "lbp");
  LbpConfig cfg;
  read_field(obj, "neighbors", cfg.neighbors, "lbp");
  read_field(obj, "radius", cfg.radius, "lbp");
  read_field(obj, "histogram_bins", cfg.histogram_bins, "lbp");
  return cfg;
}

EndpointConfig parse_endpoint(const json& obj) {
  reject_unknown_keys(obj,
                      {"base_url", "model_name", "timeout_s", "max_retries", "temperature",
                       "max_output_tokens"},
                      "endpoint");
  EndpointConfig cfg;
  read_field(obj, "base_url", cfg.base_url, "endpoint");
  read_field(obj, "model_name", cfg.model_name, "endpoint");
  read_field(obj, "timeout_s", cfg.timeout_s, "endpoint");
  read_field(obj, "max_retries", cfg.max_retries, "endpoint");
  read_field(obj, "temperature", cfg.temperature, "endpoint");
  read_field(obj, "max_output_tokens", cfg.max_output_tokens, "endpoint");
  return cfg;
}

}  // namespace

std::string to_string(ReasoningMode mode) {
  return mode == ReasoningMode::single_shot ? "single_shot" : "stepwise";
}

ReasoningMode reasoning_mode_from_string(const std::string& s) {
  if (s == "single_shot" || s == "single") return ReasoningMode::single_shot;
  if (s == "stepwise") return ReasoningMode::stepwise;
  throw Error(Errc::bad_config, "mode must be 'single_shot' or 'stepwise', got '" + s + "'");
}

PipelineConfig parse_config(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(Errc::bad_config, "config is not a JSON object");
  }
  reject_unknown_keys(root,
                      {"glcm", "lbp", "percentiles", "top_mass_fraction", "vocabulary_path",
                       "endpoint", "mode", "seed"},
                      "config");
  PipelineConfig cfg;
  if (root.contains("glcm")) cfg.glcm = parse_glcm(root.at("glcm"));
  if (root.contains("lbp")) cfg.lbp = parse_lbp(root.at("lbp"));
  read_field(root, "percentiles", cfg.percentiles, "config");
  read_field(root, "top_mass_fraction", cfg.top_mass_fraction, "config");
  read_field(root, "vocabulary_path", cfg.vocabulary_path, "config");
  if (root.contains("endpoint")) cfg.endpoint = parse_endpoint(root.at("endpoint"));
  if (root.contains("mode")) {
    std::string mode;
    read_field(root, "mode", mode, "config");
    cfg.mode = reasoning_mode_from_string(mode);
  }
  read_field(root, "seed", cfg.seed, "config");
  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const PipelineConfig& cfg) {
  if (cfg.glcm.levels < 2) throw Error(Errc::bad_config, "glcm.levels must be >= 2");
  if (cfg.glcm.distance < 1) throw Error(Errc::bad_config, "glcm.distance must be >= 1");
  if (cfg.glcm.angles.empty()) throw Error(Errc::bad_config, "glcm.angles must be non-empty");
  for (int angle : cfg.glcm.angles) {
    if (angle != 0 && angle != 45 && angle != 90 && angle != 135) {
      throw Error(Errc::bad_config, "glcm.angles entries must be in {0,45,90,135}");
    }
  }
  if (cfg.lbp.neighbors != 8) throw Error(Errc::bad_config, "lbp.neighbors must be 8");
  if (cfg.lbp.radius < 1) throw Error(Errc::bad_config, "lbp.radius must be >= 1");
  if (cfg.percentiles.empty()) throw Error(Errc::bad_config, "percentiles must be non-empty");
  for (std::size_t i = 0; i < cfg.percentiles.size(); ++i) {
    const double p = cfg.percentiles[i];
    if (p <= 0.0 || p >= 100.0) throw Error(Errc::bad_config, "percentiles must lie in (0,100)");
    if (i > 0 && p <= cfg.percentiles[i - 1]) {
      throw Error(Errc::bad_config, "percentiles must be strictly increasing");
    }
  }
  if (cfg.top_mass_fraction <= 0.0 || cfg.top_mass_fraction > 1.0) {
    throw Error(Errc::bad_config, "top_mass_fraction must lie in (0,1]");
  }
  if (cfg.endpoint.timeout_s <= 0.0) throw Error(Errc::bad_config, "endpoint.timeout_s must be > 0");
  if (cfg.endpoint.max_retries < 0) throw Error(Errc::bad_config, "endpoint.max_retries must be >= 0");
  if (cfg.endpoint.temperature < 0.0) throw Error(Errc::bad_config, "endpoint.temperature must be >= 0");
  if (cfg.endpoint.max_output_tokens < 1) {
    throw Error(Errc::bad_config, "endpoint.max_output_tokens must be >= 1");
  }
}

}  // namespace ctxalign
