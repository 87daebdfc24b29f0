#pragma once

// Shared test fixtures: RNG data generators, temp directories, synthetic
// datasets, and the ablation fixture (label lives in the embedding block).

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ctxalign/artifacts.hpp"
#include "ctxalign/evalharness.hpp"
#include "ctxalign/image_io.hpp"
#include "ctxalign/ingest.hpp"
#include "ctxalign/types.hpp"
#include "ctxalign/xai.hpp"

namespace fixtures {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("ctxalign_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& rel = "") const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  fs::path path_;
};

inline ctxalign::GrayImage random_image(std::mt19937_64& rng, int width, int height,
                                        int lo = 0, int hi = 255) {
  std::uniform_int_distribution<int> dist(lo, hi);
  ctxalign::GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(std::size_t(width) * height);
  for (auto& p : img.pixels) p = std::uint8_t(dist(rng));
  return img;
}

inline ctxalign::GrayImage constant_image(int width, int height, std::uint8_t value) {
  ctxalign::GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(std::size_t(width) * height, value);
  return img;
}

inline ctxalign::xai::Tensor3 random_tensor(std::mt19937_64& rng, int k, int h, int w,
                                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ctxalign::xai::Tensor3 t;
  t.channels = k;
  t.height = h;
  t.width = w;
  t.values.resize(std::size_t(k) * h * w);
  for (auto& v : t.values) v = dist(rng);
  return t;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

/// OpenI-style dataset: n studies with PGM frontals and reports cycling a few
/// vocabulary phrases; a binary `label` column alternates 0/1.
inline void write_synthetic_openi(const std::string& root, int n, std::uint64_t seed,
                                  int image_side = 16) {
  std::mt19937_64 rng(seed);
  fs::create_directories(root);
  std::string manifest = "study_id,frontal,lateral,report_file,label\n";
  const char* reports[] = {
      "No focal consolidation, pleural effusion, or pneumothorax identified.",
      "Mild cardiomegaly with clear lung fields.",
      "No active disease.",
      "Stable appearance of the cardiac silhouette; no edema.",
  };
  for (int i = 0; i < n; ++i) {
    const std::string id = "s" + std::to_string(i);
    const std::string img_name = id + ".pgm";
    const std::string rep_name = id + ".txt";
    ctxalign::image_io::write_pgm((fs::path(root) / img_name).string(),
                                  random_image(rng, image_side, image_side));
    write_file((fs::path(root) / rep_name).string(), reports[i % 4]);
    manifest += id + "," + img_name + ",," + rep_name + "," + std::to_string(i % 2) + "\n";
  }
  write_file((fs::path(root) / "manifest.csv").string(), manifest);
}

/// The scripted Table-3 shape: 0.70 / 0.70 / 0.68.
inline std::string table3_mock_script() {
  return R"({
  "steps": {
    "0": {"impression":"No obvious radiographic evidence of active cardiopulmonary abnormality.","evidence":"Lung fields clear. Cardiac silhouette within normal limits.","uncertainty":0.70,"limitations":"Single frontal radiograph without prior comparison.","safety_note":"For research use only; not a substitute for expert interpretation."},
    "1": {"impression":"No obvious radiographic evidence of active cardiopulmonary abnormality.","evidence":"Lung fields clear. Cardiac silhouette within normal limits.","uncertainty":0.70,"limitations":"Single frontal radiograph without prior comparison.","safety_note":"For research use only; not a substitute for expert interpretation."},
    "2": {"impression":"No obvious radiographic evidence of active cardiopulmonary abnormality.","evidence":"Lung fields clear. Cardiac silhouette within normal limits.","uncertainty":0.68,"limitations":"Single frontal radiograph without prior comparison.","safety_note":"For research use only; not a substitute for expert interpretation."}
  }
})";
}

struct AblationFixture {
  std::vector<ctxalign::artifacts::FeatureRecord> records;
  ctxalign::ingest::EmbeddingTable embeddings;
};

/// n studies where the embedding block separates the classes and the image
/// blocks are pure noise; anchors are random vocabulary picks.
inline AblationFixture make_ablation_fixture(int n, std::uint64_t seed,
                                             const std::set<std::string>& vocab_terms,
                                             int embedding_dim = 8) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> vocab(vocab_terms.begin(), vocab_terms.end());

  AblationFixture fixture;
  fixture.embeddings.dim = std::size_t(embedding_dim);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    ctxalign::artifacts::FeatureRecord record;
    record.study_id = "f" + std::to_string(i);
    record.report = "synthetic";
    record.labels["label"] = label == 1 ? ctxalign::Label::positive : ctxalign::Label::negative;

    ctxalign::radiomics::RadiomicFeatures rad;
    rad.intensity.mean = noise(rng) * 10 + 120;
    rad.intensity.variance = std::abs(noise(rng)) * 100;
    rad.intensity.std = std::sqrt(rad.intensity.variance);
    rad.intensity.min = 0;
    rad.intensity.max = 255;
    rad.intensity.range = 255;
    for (double p : {10.0, 25.0, 50.0, 75.0, 90.0}) {
      rad.intensity.percentiles[p] = noise(rng) * 5 + p;
    }
    rad.glcm_contrast = std::abs(noise(rng));
    rad.glcm_homogeneity = unit(rng);
    rad.lbp_histogram.assign(256, 0.0);
    for (int b = 0; b < 256; ++b) rad.lbp_histogram[b] = unit(rng);
    double lbp_sum = 0.0;
    for (double v : rad.lbp_histogram) lbp_sum += v;
    for (double& v : rad.lbp_histogram) v /= lbp_sum;
    record.radiomics = rad;

    ctxalign::xai::ActivationSummary xs;
    xs.mean = unit(rng);
    xs.max = 1.0;
    xs.entropy = unit(rng);
    xs.top_mass = unit(rng);
    record.xai = xs;

    ctxalign::context::SemanticAnchors anchors;
    if (!vocab.empty() && unit(rng) < 0.5) {
      anchors.matched.push_back(vocab[std::size_t(rng() % vocab.size())]);
    }
    record.anchors = anchors;
    record.card = "[RADIOMICS]\nsynthetic\n";

    std::vector<double> emb(std::size_t(embedding_dim));
    for (double& v : emb) v = noise(rng);
    // the first two coordinates carry the class signal
    emb[0] += label == 1 ? 1.5 : -1.5;
    emb[1] += label == 1 ? 1.0 : -1.0;
    fixture.embeddings.vectors[record.study_id] = std::move(emb);

    fixture.records.push_back(std::move(record));
  }
  return fixture;
}

inline void write_records_ndjson(const std::string& path,
                                 const std::vector<ctxalign::artifacts::FeatureRecord>& records) {
  ctxalign::artifacts::NdjsonWriter writer(path);
  for (const auto& r : records) writer.write_line(ctxalign::artifacts::record_to_json(r));
  writer.commit();
}

inline void write_embeddings_csv(const std::string& path,
                                 const ctxalign::ingest::EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  out.precision(17);
  for (const auto& [id, vec] : table.vectors) {
    out << id;
    for (double v : vec) out << "," << v;
    out << "\n";
  }
}

}  // namespace fixtures
