#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxalign/context.hpp"
#include "ctxalign/evalharness.hpp"
#include "ctxalign/ingest.hpp"
#include "ctxalign/types.hpp"

namespace ctxalign::artifacts {

/// Per-study output of the extract phase and input to reason/ablate:
/// everything downstream stages need without re-touching the dataset.
struct FeatureRecord {
  std::string study_id;
  std::string report;
  std::string frontal_path;  // resolved; empty = absent
  std::string lateral_path;
  std::map<std::string, Label> labels;
  std::optional<radiomics::RadiomicFeatures> radiomics;
  std::optional<xai::ActivationSummary> xai;
  std::optional<context::SemanticAnchors> anchors;
  std::string card;  // rendered feature card
};

std::string record_to_json(const FeatureRecord& record);
FeatureRecord record_from_json(const std::string& line);

/// Line-atomic NDJSON writing: content accumulates in <path>.tmp and moves
/// into place on commit, so readers never observe a partial line.
class NdjsonWriter {
 public:
  explicit NdjsonWriter(const std::string& path);
  ~NdjsonWriter();

  void write_line(const std::string& line);
  void commit();

 private:
  std::string path_;
  std::string tmp_path_;
  void* stream_;  // std::ofstream, kept out of the header
  bool committed_ = false;
};

/// Non-empty lines of an NDJSON file. Throws IoError.
std::vector<std::string> read_ndjson(const std::string& path);

struct MatrixAssembly {
  eval::FeatureMatrix X;
  std::vector<int> y;
  std::vector<std::string> study_ids;
  std::size_t skipped = 0;       // unknown label or missing radiomics/embedding
  std::size_t missing_xai = 0;   // rows whose xai block is zero-filled
};

/// Builds the ablation design matrix with blocks radiomics / xai /
/// text_embedding / vocab_indicator. Rows lacking a usable label, radiomic
/// features, or an embedding vector are skipped; a missing activation
/// summary zero-fills the xai block and is counted.
MatrixAssembly assemble_feature_matrix(const std::vector<FeatureRecord>& records,
                                       const ingest::EmbeddingTable& embeddings,
                                       const context::Vocabulary& vocab,
                                       const std::string& label_name);

}  // namespace ctxalign::artifacts
