#include "ctxalign/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ctxalign/errors.hpp"
#include "ctxalign/image_io.hpp"

namespace ctxalign::ingest {

namespace fs = std::filesystem;

namespace {

// Minimal RFC-4180 row splitter: quoted fields with "" escapes.
std::vector<std::string> split_csv_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (!field.empty()) {
        throw Error(Errc::csv_parse_error, "stray quote at line " + std::to_string(line_no));
      }
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw Error(Errc::csv_parse_error, "unterminated quote at line " + std::to_string(line_no));
  }
  fields.push_back(std::move(field));
  return fields;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

Label parse_label_cell(const std::string& cell, std::size_t line_no) {
  if (cell.empty()) return Label::unknown;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    if (v == 1.0) return Label::positive;
    if (v == 0.0) return Label::negative;
    if (v == -1.0) return Label::unknown;
  } catch (const std::exception&) {
  }
  throw Error(Errc::csv_parse_error,
              "label cell '" + cell + "' at line " + std::to_string(line_no));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::broken_reference, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

DatasetManifest parse_openi_manifest(const std::string& root) {
  const std::string manifest_path = (fs::path(root) / "manifest.csv").string();
  if (!fs::exists(manifest_path)) {
    throw Error(Errc::manifest_missing, manifest_path);
  }
  const std::vector<std::string> lines = read_lines(manifest_path);
  if (lines.empty()) throw Error(Errc::csv_parse_error, "manifest has no header row");

  const std::vector<std::string> header = split_csv_row(lines[0], 1);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = column("study_id");
  const auto frontal_col = column("frontal");
  const auto lateral_col = column("lateral");
  const auto report_col = column("report_file");
  if (!id_col || !frontal_col || !lateral_col || !report_col) {
    throw Error(Errc::csv_parse_error,
                "manifest header must contain study_id, frontal, lateral, report_file");
  }
  const auto acts_col = column("acts");
  const auto grads_col = column("grads");
  const std::set<std::size_t> known = [&] {
    std::set<std::size_t> s{*id_col, *frontal_col, *lateral_col, *report_col};
    if (acts_col) s.insert(*acts_col);
    if (grads_col) s.insert(*grads_col);
    return s;
  }();

  DatasetManifest manifest;
  manifest.root = root;
  std::set<std::string> seen_ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i] == "\r") continue;
    const std::vector<std::string> cells = split_csv_row(lines[i], i + 1);
    if (cells.size() != header.size()) {
      throw Error(Errc::csv_parse_error, "row at line " + std::to_string(i + 1) + " has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(header.size()));
    }
    ManifestEntry entry;
    entry.study_id = cells[*id_col];
    if (entry.study_id.empty()) {
      throw Error(Errc::csv_parse_error, "empty study_id at line " + std::to_string(i + 1));
    }
    if (!seen_ids.insert(entry.study_id).second) {
      throw Error(Errc::csv_parse_error,
                  "duplicate study_id '" + entry.study_id + "' at line " + std::to_string(i + 1));
    }
    entry.frontal_path = cells[*frontal_col];
    entry.lateral_path = cells[*lateral_col];
    entry.report_path = cells[*report_col];
    if (acts_col) entry.acts_path = cells[*acts_col];
    if (grads_col) entry.grads_path = cells[*grads_col];
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (known.contains(c)) continue;
      entry.labels[header[c]] = parse_label_cell(cells[c], i + 1);
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

Study load_study(const DatasetManifest& manifest, const ManifestEntry& entry) {
  Study study;
  study.id = entry.study_id;
  study.labels = entry.labels;
  const fs::path root(manifest.root);

  auto resolve = [&](const std::string& rel) { return (root / rel).string(); };

  if (!entry.frontal_path.empty()) {
    study.frontal_image = image_io::decode_image(resolve(entry.frontal_path));
  }
  if (!entry.lateral_path.empty()) {
    study.lateral_image = image_io::decode_image(resolve(entry.lateral_path));
  }
  if (!entry.report_path.empty()) {
    const std::string path = resolve(entry.report_path);
    if (!fs::exists(path)) throw Error(Errc::broken_reference, path);
    study.report = read_text_file(path);
  }
  validate_study(study);
  return study;
}

std::vector<Study> load_openi(const std::string& root) {
  const DatasetManifest manifest = parse_openi_manifest(root);
  std::vector<Study> studies;
  studies.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    studies.push_back(load_study(manifest, entry));
  }
  return studies;
}

DatasetManifest parse_chexpert_manifest(const std::string& csv_path,
                                        const std::string& image_root) {
  if (!fs::exists(csv_path)) throw Error(Errc::manifest_missing, csv_path);
  const std::vector<std::string> lines = read_lines(csv_path);
  if (lines.empty()) throw Error(Errc::csv_parse_error, "CSV has no header row");

  const std::vector<std::string> header = split_csv_row(lines[0], 1);
  const auto path_it = std::find(header.begin(), header.end(), "Path");
  if (path_it == header.end()) {
    throw Error(Errc::csv_parse_error, "CheXpert CSV must contain a Path column");
  }
  const auto path_col = static_cast<std::size_t>(path_it - header.begin());
  const std::set<std::string> metadata = {"Path", "Sex", "Age", "Frontal/Lateral", "AP/PA"};

  DatasetManifest manifest;
  manifest.root = image_root;
  std::set<std::string> seen_ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i] == "\r") continue;
    const std::vector<std::string> cells = split_csv_row(lines[i], i + 1);
    if (cells.size() != header.size()) {
      throw Error(Errc::csv_parse_error, "row at line " + std::to_string(i + 1) + " has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(header.size()));
    }
    ManifestEntry entry;
    entry.study_id = cells[path_col];
    entry.frontal_path = cells[path_col];
    if (entry.study_id.empty()) {
      throw Error(Errc::csv_parse_error, "empty Path at line " + std::to_string(i + 1));
    }
    if (!seen_ids.insert(entry.study_id).second) {
      throw Error(Errc::csv_parse_error,
                  "duplicate Path '" + entry.study_id + "' at line " + std::to_string(i + 1));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (metadata.contains(header[c])) continue;
      entry.labels[header[c]] = parse_label_cell(cells[c], i + 1);
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

std::vector<Study> load_chexpert(const std::string& csv_path, const std::string& image_root) {
  const DatasetManifest manifest = parse_chexpert_manifest(csv_path, image_root);
  std::vector<Study> studies;
  studies.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    studies.push_back(load_study(manifest, entry));
  }
  return studies;
}

EmbeddingTable load_embeddings(const std::string& path) {
  EmbeddingTable table;
  for (std::size_t i = 0; const std::string& line : read_lines(path)) {
    ++i;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv_row(line, i);
    if (cells.size() < 2) {
      throw Error(Errc::ragged_rows, "line " + std::to_string(i) + " has no vector");
    }
    std::vector<double> vec;
    vec.reserve(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
      } catch (const std::exception&) {
        throw Error(Errc::non_finite,
                    "value '" + cells[c] + "' at line " + std::to_string(i) + " is not a real");
      }
      if (!std::isfinite(v)) {
        throw Error(Errc::non_finite, "non-finite value at line " + std::to_string(i));
      }
      vec.push_back(v);
    }
    if (table.dim == 0) {
      table.dim = vec.size();
    } else if (vec.size() != table.dim) {
      throw Error(Errc::ragged_rows, "line " + std::to_string(i) + " has dim " +
                                         std::to_string(vec.size()) + ", expected " +
                                         std::to_string(table.dim));
    }
    table.vectors[cells[0]] = std::move(vec);
  }
  return table;
}

xai::Tensor3 load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read tensor file '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "XTEN") throw Error(Errc::bad_header, "missing XTEN magic in '" + path + "'");
  xai::Tensor3 tensor;
  if (!(in >> tensor.channels >> tensor.height >> tensor.width) || tensor.channels <= 0 ||
      tensor.height <= 0 || tensor.width <= 0) {
    throw Error(Errc::bad_header, "bad XTEN dimensions in '" + path + "'");
  }
  const std::size_t expected = static_cast<std::size_t>(tensor.channels) *
                               static_cast<std::size_t>(tensor.height) *
                               static_cast<std::size_t>(tensor.width);
  tensor.values.reserve(expected);
  double v = 0.0;
  while (in >> v) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "non-finite tensor value in '" + path + "'");
    tensor.values.push_back(v);
    if (tensor.values.size() > expected) break;
  }
  if (!in.eof() && tensor.values.size() <= expected) {
    throw Error(Errc::count_mismatch, "unparseable tensor value in '" + path + "'");
  }
  if (tensor.values.size() != expected) {
    throw Error(Errc::count_mismatch, "header claims " + std::to_string(expected) +
                                          " values, file has " +
                                          std::to_string(tensor.values.size()) + " or more");
  }
  return tensor;
}

void write_tensor(const std::string& path, const xai::Tensor3& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "XTEN " << tensor.channels << " " << tensor.height << " " << tensor.width << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < tensor.values.size(); ++i) {
    out << tensor.values[i] << ((i + 1) % 16 == 0 ? "\n" : " ");
  }
  out << "\n";
  if (!out) throw Error(Errc::io_error, "short write to '" + path + "'");
}

}  // namespace ctxalign::ingest
