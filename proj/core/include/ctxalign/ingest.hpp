#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxalign/types.hpp"
#include "ctxalign/xai.hpp"

namespace ctxalign::ingest {

/// One manifest row before any file is touched. Paths are resolved against
/// the manifest root; empty cells mean "absent".
struct ManifestEntry {
  std::string study_id;
  std::string frontal_path;
  std::string lateral_path;
  std::string report_path;
  std::string acts_path;   // optional XTEN activations
  std::string grads_path;  // optional XTEN gradients
  std::map<std::string, Label> labels;
};

struct DatasetManifest {
  std::string root;
  std::vector<ManifestEntry> entries;
};

struct EmbeddingTable {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> vectors;
};

/// Parses root/manifest.csv. Required columns: study_id, frontal, lateral,
/// report_file. Optional columns acts and grads name XTEN tensor files; any
/// further column is a ternary label ("1"/"0"/"-1"/blank). No referenced
/// file is opened here. Throws ManifestMissing or CsvParseError.
DatasetManifest parse_openi_manifest(const std::string& root);

/// Materializes one entry: decodes images, reads the report. Throws
/// BrokenReference or DecodeError; the result passes validate_study.
Study load_study(const DatasetManifest& manifest, const ManifestEntry& entry);

/// Strict whole-dataset load (first broken row aborts).
std::vector<Study> load_openi(const std::string& root);

/// CheXpert-style CSV: a Path column plus label columns valued
/// {1.0, 0.0, -1.0, blank}; -1.0 and blank map to unknown. Metadata columns
/// (Sex, Age, Frontal/Lateral, AP/PA) are skipped. Reports are empty.
DatasetManifest parse_chexpert_manifest(const std::string& csv_path, const std::string& image_root);

std::vector<Study> load_chexpert(const std::string& csv_path, const std::string& image_root);

/// Lines of `study_id,v1,v2,...`; every row must share one dimension and
/// carry finite values. Throws RaggedRows or NonFinite.
EmbeddingTable load_embeddings(const std::string& path);

/// XTEN tensor file: header `XTEN <K> <h> <w>`, then K*h*w whitespace-
/// separated decimal reals, channel-major row-major. Throws BadHeader,
/// CountMismatch, or NonFinite.
xai::Tensor3 load_tensor(const std::string& path);

void write_tensor(const std::string& path, const xai::Tensor3& tensor);

}  // namespace ctxalign::ingest
