#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctxalign {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t size() const { return pixels.size(); }
  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

/// Ternary study label as produced by automated report parsing.
enum class Label : int { negative = 0, positive = 1, unknown = -1 };

/// One clinical case: up to two radiographs, a report, optional labels.
struct Study {
  std::string id;
  std::optional<GrayImage> frontal_image;
  std::optional<GrayImage> lateral_image;
  std::string report;
  std::map<std::string, Label> labels;
};

/// The five-field structured clinical output.
struct StructuredResponse {
  std::string impression;
  std::string evidence;
  double uncertainty = 0.0;
  std::string limitations;
  std::string safety_note;

  bool operator==(const StructuredResponse&) const = default;
};

/// Checks Study invariants; returns the study unchanged when they hold.
/// Throws MissingImage or BadPixelBuffer.
const Study& validate_study(const Study& study);

/// Serializes the five fields as a compact JSON object (the output schema
/// the model is prompted for). Round-trips losslessly through
/// reason::parse_structured.
std::string to_json_string(const StructuredResponse& response);

}  // namespace ctxalign
