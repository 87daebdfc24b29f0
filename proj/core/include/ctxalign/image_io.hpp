#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctxalign/types.hpp"

namespace ctxalign::image_io {

/// Decodes a PNG or PGM file to 8-bit grayscale. Color inputs convert by
/// Rec. 601 luminance; 16-bit inputs rescale to 8-bit. Throws
/// BrokenReference when the file is missing and DecodeError on bad content.
GrayImage decode_image(const std::string& path);

/// 8-bit grayscale PNG encoding (prompt image attachments).
std::vector<std::uint8_t> encode_png(const GrayImage& img);

/// Binary PGM (P5, maxval 255) used by fixtures and helper tooling.
void write_pgm(const std::string& path, const GrayImage& img);

}  // namespace ctxalign::image_io
