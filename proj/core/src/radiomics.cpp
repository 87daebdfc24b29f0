#include "ctxalign/radiomics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ctxalign/errors.hpp"

namespace ctxalign::radiomics {

namespace {

// Displacement (row, col) per angle at distance d. With the symmetric flag
// the reversed pair is counted as well, making the sign convention moot.
std::pair<int, int> angle_offset(int angle, int d) {
  switch (angle) {
    case 0: return {0, d};
    case 45: return {-d, d};
    case 90: return {-d, 0};
    case 135: return {-d, -d};
    default:
      throw Error(Errc::bad_config, "GLCM angle must be one of 0,45,90,135");
  }
}

}  // namespace

IntensityStats intensity_stats(const GrayImage& img, const std::vector<double>& percentiles) {
  const std::size_t n = img.pixels.size();
  if (n == 0) throw Error(Errc::empty_image, "image has no pixels");

  IntensityStats stats;
  double sum = 0.0;
  for (std::uint8_t p : img.pixels) sum += p;
  stats.mean = sum / static_cast<double>(n);

  double sq = 0.0;
  for (std::uint8_t p : img.pixels) {
    const double d = p - stats.mean;
    sq += d * d;
  }
  stats.variance = sq / static_cast<double>(n);
  stats.std = std::sqrt(stats.variance);

  std::vector<std::uint8_t> sorted(img.pixels);
  std::sort(sorted.begin(), sorted.end());
  stats.min = sorted.front();
  stats.max = sorted.back();
  stats.range = stats.max - stats.min;

  for (double p : percentiles) {
    const double rank = p / 100.0 * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(rank);
    double value = sorted[lo];
    if (lo + 1 < n) value += (rank - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
    stats.percentiles[p] = value;
  }
  return stats;
}

Glcm compute_glcm(const GrayImage& img, const GlcmConfig& cfg) {
  if (img.pixels.empty()) throw Error(Errc::empty_image, "image has no pixels");
  const int levels = cfg.levels;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(levels) * levels, 0);
  std::uint64_t total = 0;

  for (int angle : cfg.angles) {
    const auto [dr, dc] = angle_offset(angle, cfg.distance);
    for (int r = 0; r < img.height; ++r) {
      const int r2 = r + dr;
      if (r2 < 0 || r2 >= img.height) continue;
      for (int c = 0; c < img.width; ++c) {
        const int c2 = c + dc;
        if (c2 < 0 || c2 >= img.width) continue;
        const int i = quantize(img.at(r, c), levels);
        const int j = quantize(img.at(r2, c2), levels);
        counts[static_cast<std::size_t>(i) * levels + j] += 1;
        ++total;
        if (cfg.symmetric) {
          counts[static_cast<std::size_t>(j) * levels + i] += 1;
          ++total;
        }
      }
    }
  }
  if (total == 0) {
    throw Error(Errc::degenerate_image, "no valid pixel pair at distance " +
                                            std::to_string(cfg.distance));
  }

  Glcm glcm;
  glcm.levels = levels;
  glcm.p.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    glcm.p[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  return glcm;
}

TextureStats glcm_texture(const Glcm& glcm) {
  double sum = 0.0;
  for (double v : glcm.p) sum += v;
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error(Errc::not_normalized, "GLCM entries sum to " + std::to_string(sum));
  }

  TextureStats stats;
  for (int i = 0; i < glcm.levels; ++i) {
    for (int j = 0; j < glcm.levels; ++j) {
      const double p = glcm.at(i, j);
      const double diff = i - j;
      stats.contrast += diff * diff * p;
      stats.homogeneity += p / (1.0 + std::abs(diff));
    }
  }
  return stats;
}

std::vector<double> lbp_histogram(const GrayImage& img, const LbpConfig& cfg) {
  const int r = cfg.radius;
  if (img.width < 2 * r + 1 || img.height < 2 * r + 1) {
    throw Error(Errc::image_too_small, std::to_string(img.width) + "x" +
                                           std::to_string(img.height) + " has no interior at radius " +
                                           std::to_string(r));
  }
  // Clockwise from top-left; bit 7 first.
  const int offsets[8][2] = {{-r, -r}, {-r, 0}, {-r, r}, {0, r},
                             {r, r},   {r, 0},  {r, -r}, {0, -r}};

  std::vector<std::uint64_t> counts(256, 0);
  std::uint64_t total = 0;
  for (int row = r; row < img.height - r; ++row) {
    for (int col = r; col < img.width - r; ++col) {
      const std::uint8_t center = img.at(row, col);
      unsigned code = 0;
      for (int k = 0; k < 8; ++k) {
        const std::uint8_t neighbor = img.at(row + offsets[k][0], col + offsets[k][1]);
        code = (code << 1) | (neighbor >= center ? 1u : 0u);
      }
      counts[code] += 1;
      ++total;
    }
  }

  std::vector<double> hist(256, 0.0);
  for (int k = 0; k < 256; ++k) {
    hist[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  return hist;
}

RadiomicFeatures extract_radiomics(const GrayImage& img, const PipelineConfig& cfg) {
  RadiomicFeatures features;
  features.intensity = intensity_stats(img, cfg.percentiles);
  const TextureStats texture = glcm_texture(compute_glcm(img, cfg.glcm));
  features.glcm_contrast = texture.contrast;
  features.glcm_homogeneity = texture.homogeneity;
  features.lbp_histogram = lbp_histogram(img, cfg.lbp);
  return features;
}

}  // namespace ctxalign::radiomics
