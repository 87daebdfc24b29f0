#include "ctxalign/artifacts.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ctxalign/errors.hpp"

namespace ctxalign::artifacts {

namespace {

using nlohmann::json;

json labels_to_json(const std::map<std::string, Label>& labels) {
  json j = json::object();
  for (const auto& [name, label] : labels) {
    if (label == Label::unknown) {
      j[name] = nullptr;
    } else {
      j[name] = static_cast<int>(label);
    }
  }
  return j;
}

std::map<std::string, Label> labels_from_json(const json& j) {
  std::map<std::string, Label> labels;
  for (const auto& [name, value] : j.items()) {
    if (value.is_null()) {
      labels[name] = Label::unknown;
    } else {
      labels[name] = value.get<int>() == 1 ? Label::positive : Label::negative;
    }
  }
  return labels;
}

json radiomics_to_json(const radiomics::RadiomicFeatures& f) {
  json percentiles = json::object();
  for (const auto& [p, v] : f.intensity.percentiles) {
    char key[64];
    std::snprintf(key, sizeof(key), "%g", p);
    percentiles[key] = v;
  }
  json j;
  j["mean"] = f.intensity.mean;
  j["variance"] = f.intensity.variance;
  j["std"] = f.intensity.std;
  j["min"] = f.intensity.min;
  j["max"] = f.intensity.max;
  j["range"] = f.intensity.range;
  j["percentiles"] = percentiles;
  j["glcm_contrast"] = f.glcm_contrast;
  j["glcm_homogeneity"] = f.glcm_homogeneity;
  j["lbp_histogram"] = f.lbp_histogram;
  return j;
}

radiomics::RadiomicFeatures radiomics_from_json(const json& j) {
  radiomics::RadiomicFeatures f;
  f.intensity.mean = j.at("mean").get<double>();
  f.intensity.variance = j.at("variance").get<double>();
  f.intensity.std = j.at("std").get<double>();
  f.intensity.min = j.at("min").get<double>();
  f.intensity.max = j.at("max").get<double>();
  f.intensity.range = j.at("range").get<double>();
  for (const auto& [key, value] : j.at("percentiles").items()) {
    f.intensity.percentiles[std::stod(key)] = value.get<double>();
  }
  f.glcm_contrast = j.at("glcm_contrast").get<double>();
  f.glcm_homogeneity = j.at("glcm_homogeneity").get<double>();
  f.lbp_histogram = j.at("lbp_histogram").get<std::vector<double>>();
  return f;
}

}  // namespace

std::string record_to_json(const FeatureRecord& record) {
  json j;
  j["study_id"] = record.study_id;
  j["report"] = record.report;
  j["frontal_path"] = record.frontal_path.empty() ? json(nullptr) : json(record.frontal_path);
  j["lateral_path"] = record.lateral_path.empty() ? json(nullptr) : json(record.lateral_path);
  j["labels"] = labels_to_json(record.labels);
  j["radiomics"] = record.radiomics ? radiomics_to_json(*record.radiomics) : json(nullptr);
  if (record.xai) {
    j["xai"] = {{"mean", record.xai->mean},
                {"max", record.xai->max},
                {"entropy", record.xai->entropy},
                {"top_mass", record.xai->top_mass}};
  } else {
    j["xai"] = nullptr;
  }
  if (record.anchors) {
    j["anchors"] = record.anchors->matched;
  } else {
    j["anchors"] = nullptr;
  }
  j["card"] = record.card;
  return j.dump();
}

FeatureRecord record_from_json(const std::string& line) {
  json j = json::parse(line);
  FeatureRecord record;
  record.study_id = j.at("study_id").get<std::string>();
  record.report = j.at("report").get<std::string>();
  if (j.contains("frontal_path") && !j.at("frontal_path").is_null()) {
    record.frontal_path = j.at("frontal_path").get<std::string>();
  }
  if (j.contains("lateral_path") && !j.at("lateral_path").is_null()) {
    record.lateral_path = j.at("lateral_path").get<std::string>();
  }
  if (j.contains("labels")) record.labels = labels_from_json(j.at("labels"));
  if (j.contains("radiomics") && !j.at("radiomics").is_null()) {
    record.radiomics = radiomics_from_json(j.at("radiomics"));
  }
  if (j.contains("xai") && !j.at("xai").is_null()) {
    const json& x = j.at("xai");
    xai::ActivationSummary s;
    s.mean = x.at("mean").get<double>();
    s.max = x.at("max").get<double>();
    s.entropy = x.at("entropy").get<double>();
    s.top_mass = x.at("top_mass").get<double>();
    record.xai = s;
  }
  if (j.contains("anchors") && !j.at("anchors").is_null()) {
    context::SemanticAnchors anchors;
    anchors.matched = j.at("anchors").get<std::vector<std::string>>();
    record.anchors = std::move(anchors);
  }
  record.card = j.value("card", "");
  return record;
}

NdjsonWriter::NdjsonWriter(const std::string& path)
    : path_(path), tmp_path_(path + ".tmp"), stream_(new std::ofstream(tmp_path_, std::ios::binary)) {
  if (!static_cast<std::ofstream*>(stream_)->good()) {
    delete static_cast<std::ofstream*>(stream_);
    stream_ = nullptr;
    throw Error(Errc::io_error, "cannot write '" + tmp_path_ + "'");
  }
}

NdjsonWriter::~NdjsonWriter() {
  auto* out = static_cast<std::ofstream*>(stream_);
  if (out) {
    out->close();
    delete out;
  }
  if (!committed_) {
    std::error_code ec;
    std::filesystem::remove(tmp_path_, ec);
  }
}

void NdjsonWriter::write_line(const std::string& line) {
  auto* out = static_cast<std::ofstream*>(stream_);
  (*out) << line << '\n';
  if (!out->good()) throw Error(Errc::io_error, "short write to '" + tmp_path_ + "'");
}

void NdjsonWriter::commit() {
  auto* out = static_cast<std::ofstream*>(stream_);
  out->flush();
  out->close();
  std::error_code ec;
  std::filesystem::rename(tmp_path_, path_, ec);
  if (ec) throw Error(Errc::io_error, "cannot move '" + tmp_path_ + "' to '" + path_ + "'");
  committed_ = true;
}

std::vector<std::string> read_ndjson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

MatrixAssembly assemble_feature_matrix(const std::vector<FeatureRecord>& records,
                                       const ingest::EmbeddingTable& embeddings,
                                       const context::Vocabulary& vocab,
                                       const std::string& label_name) {
  MatrixAssembly out;

  // column layout per row: radiomics | xai | text_embedding | vocab_indicator
  std::size_t rad_dim = 0;
  for (const FeatureRecord& r : records) {
    if (r.radiomics) {
      rad_dim = 8 + r.radiomics->intensity.percentiles.size() + r.radiomics->lbp_histogram.size();
      break;
    }
  }
  if (rad_dim == 0) return out;
  const std::size_t xai_dim = 4;
  const std::size_t emb_dim = embeddings.dim;
  const std::size_t voc_dim = vocab.terms.size();
  const std::size_t cols = rad_dim + xai_dim + emb_dim + voc_dim;

  for (const FeatureRecord& r : records) {
    const auto label_it = r.labels.find(label_name);
    const auto emb_it = embeddings.vectors.find(r.study_id);
    if (label_it == r.labels.end() || label_it->second == Label::unknown || !r.radiomics ||
        emb_it == embeddings.vectors.end()) {
      ++out.skipped;
      continue;
    }
    const radiomics::RadiomicFeatures& rad = *r.radiomics;
    std::vector<double> row;
    row.reserve(cols);
    row.push_back(rad.intensity.mean);
    row.push_back(rad.intensity.variance);
    row.push_back(rad.intensity.std);
    row.push_back(rad.intensity.min);
    row.push_back(rad.intensity.max);
    row.push_back(rad.intensity.range);
    for (const auto& [p, v] : rad.intensity.percentiles) row.push_back(v);
    row.push_back(rad.glcm_contrast);
    row.push_back(rad.glcm_homogeneity);
    for (double v : rad.lbp_histogram) row.push_back(v);
    if (row.size() != rad_dim) {
      throw Error(Errc::dimension_mismatch,
                  "study '" + r.study_id + "' has an inconsistent radiomics layout");
    }
    if (r.xai) {
      row.push_back(r.xai->mean);
      row.push_back(r.xai->max);
      row.push_back(r.xai->entropy);
      row.push_back(r.xai->top_mass);
    } else {
      ++out.missing_xai;
      row.insert(row.end(), xai_dim, 0.0);
    }
    row.insert(row.end(), emb_it->second.begin(), emb_it->second.end());
    for (const std::string& term : vocab.terms) {
      const bool hit = r.anchors && std::find(r.anchors->matched.begin(), r.anchors->matched.end(),
                                              term) != r.anchors->matched.end();
      row.push_back(hit ? 1.0 : 0.0);
    }

    out.X.values.insert(out.X.values.end(), row.begin(), row.end());
    out.y.push_back(label_it->second == Label::positive ? 1 : 0);
    out.study_ids.push_back(r.study_id);
    ++out.X.rows;
  }

  out.X.cols = cols;
  out.X.blocks = {
      {"radiomics", 0, rad_dim},
      {"xai", rad_dim, rad_dim + xai_dim},
      {"text_embedding", rad_dim + xai_dim, rad_dim + xai_dim + emb_dim},
      {"vocab_indicator", rad_dim + xai_dim + emb_dim, cols},
  };
  return out;
}

}  // namespace ctxalign::artifacts
