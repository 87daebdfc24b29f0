#pragma once

#include <map>
#include <vector>

#include "ctxalign/config.hpp"
#include "ctxalign/types.hpp"

namespace ctxalign::radiomics {

/// First-order intensity statistics. Variance uses the population divisor
/// (H*W); percentiles interpolate linearly between closest ranks.
struct IntensityStats {
  double mean = 0.0;
  double variance = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  std::map<double, double> percentiles;
};

/// Normalized co-occurrence matrix over quantized gray levels, entries sum to 1.
struct Glcm {
  int levels = 0;
  std::vector<double> p;  // levels x levels, row-major

  double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

struct TextureStats {
  double contrast = 0.0;
  double homogeneity = 0.0;
};

struct RadiomicFeatures {
  IntensityStats intensity;
  double glcm_contrast = 0.0;
  double glcm_homogeneity = 0.0;
  std::vector<double> lbp_histogram;
};

/// Quantizes a pixel into one of `levels` equal-width bins over [0,255].
inline int quantize(std::uint8_t pixel, int levels) {
  return static_cast<int>(static_cast<unsigned>(pixel) * static_cast<unsigned>(levels) / 256u);
}

IntensityStats intensity_stats(const GrayImage& img, const std::vector<double>& percentiles);

/// Pair counts accumulated over all configured angles at the configured
/// distance; when symmetric, transposed pairs are counted too. Throws
/// DegenerateImage when no valid pixel pair exists.
Glcm compute_glcm(const GrayImage& img, const GlcmConfig& cfg);

/// Contrast = sum (i-j)^2 P(i,j); homogeneity = sum P(i,j) / (1+|i-j|).
/// Throws NotNormalized when |sum P - 1| > 1e-6.
TextureStats glcm_texture(const Glcm& glcm);

/// Classic 8-neighbor LBP over interior pixels. A neighbor >= center encodes
/// bit 1; bit 7 is the top-left neighbor, proceeding clockwise down to bit 0
/// at the left neighbor. Border pixels (width `radius`) are skipped.
std::vector<double> lbp_histogram(const GrayImage& img, const LbpConfig& cfg);

RadiomicFeatures extract_radiomics(const GrayImage& img, const PipelineConfig& cfg);

}  // namespace ctxalign::radiomics
