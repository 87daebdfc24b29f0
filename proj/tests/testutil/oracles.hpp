#pragma once

// Brute-force reference implementations, written straight from the
// definitions and kept independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ctxalign/config.hpp"
#include "ctxalign/types.hpp"
#include "ctxalign/xai.hpp"

namespace oracle {

struct IntensityOracle {
  double mean = 0.0;
  double variance = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::map<double, double> percentiles;
};

inline IntensityOracle intensity(const ctxalign::GrayImage& img,
                                 const std::vector<double>& percentiles) {
  IntensityOracle out;
  const std::size_t n = img.pixels.size();
  double sum = 0.0;
  for (auto p : img.pixels) sum += p;
  out.mean = sum / double(n);
  double sq = 0.0;
  for (auto p : img.pixels) sq += (double(p) - out.mean) * (double(p) - out.mean);
  out.variance = sq / double(n);
  std::vector<double> sorted(img.pixels.begin(), img.pixels.end());
  std::sort(sorted.begin(), sorted.end());
  out.min = sorted.front();
  out.max = sorted.back();
  for (double p : percentiles) {
    const double h = p / 100.0 * double(n - 1);
    const auto lo = std::size_t(h);
    double v = sorted[lo];
    if (lo + 1 < n) v += (h - double(lo)) * (sorted[lo + 1] - sorted[lo]);
    out.percentiles[p] = v;
  }
  return out;
}

// Naive pair enumeration: for every pixel and every angle, walk to the
// displaced pixel and count the quantized pair (plus its transpose when
// symmetric). Matches the documented displacement table.
inline std::vector<double> naive_glcm(const ctxalign::GrayImage& img,
                                      const ctxalign::GlcmConfig& cfg) {
  const int L = cfg.levels;
  std::vector<std::uint64_t> counts(std::size_t(L) * L, 0);
  std::uint64_t total = 0;
  auto bin = [&](std::uint8_t p) { return int(unsigned(p) * unsigned(L) / 256u); };
  for (int angle : cfg.angles) {
    int dr = 0, dc = 0;
    const int d = cfg.distance;
    if (angle == 0) { dr = 0; dc = d; }
    else if (angle == 45) { dr = -d; dc = d; }
    else if (angle == 90) { dr = -d; dc = 0; }
    else { dr = -d; dc = -d; }
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width; ++c) {
        const int r2 = r + dr, c2 = c + dc;
        if (r2 < 0 || r2 >= img.height || c2 < 0 || c2 >= img.width) continue;
        const int i = bin(img.at(r, c)), j = bin(img.at(r2, c2));
        counts[std::size_t(i) * L + j]++;
        ++total;
        if (cfg.symmetric) {
          counts[std::size_t(j) * L + i]++;
          ++total;
        }
      }
    }
  }
  std::vector<double> p(counts.size(), 0.0);
  if (total == 0) return p;
  for (std::size_t k = 0; k < counts.size(); ++k) p[k] = double(counts[k]) / double(total);
  return p;
}

inline double glcm_contrast_oracle(const std::vector<double>& p, int levels) {
  double v = 0.0;
  for (int i = 0; i < levels; ++i)
    for (int j = 0; j < levels; ++j) v += double(i - j) * double(i - j) * p[std::size_t(i) * levels + j];
  return v;
}

inline double glcm_homogeneity_oracle(const std::vector<double>& p, int levels) {
  double v = 0.0;
  for (int i = 0; i < levels; ++i)
    for (int j = 0; j < levels; ++j) v += p[std::size_t(i) * levels + j] / (1.0 + std::abs(i - j));
  return v;
}

// Per-pixel LBP: bit 7 = top-left neighbor, clockwise; neighbor >= center
// encodes 1; border skipped.
inline std::vector<double> naive_lbp(const ctxalign::GrayImage& img, int radius) {
  const int off[8][2] = {{-radius, -radius}, {-radius, 0}, {-radius, radius}, {0, radius},
                         {radius, radius},   {radius, 0},  {radius, -radius}, {0, -radius}};
  std::vector<std::uint64_t> counts(256, 0);
  std::uint64_t total = 0;
  for (int r = radius; r < img.height - radius; ++r) {
    for (int c = radius; c < img.width - radius; ++c) {
      unsigned code = 0;
      for (int k = 0; k < 8; ++k) {
        const bool bit = img.at(r + off[k][0], c + off[k][1]) >= img.at(r, c);
        code |= unsigned(bit) << (7 - k);
      }
      counts[code]++;
      ++total;
    }
  }
  std::vector<double> hist(256, 0.0);
  for (int k = 0; k < 256; ++k) hist[k] = double(counts[k]) / double(total);
  return hist;
}

inline std::vector<double> naive_gradcam_weights(const ctxalign::xai::Tensor3& grads) {
  std::vector<double> alpha(grads.channels, 0.0);
  for (int k = 0; k < grads.channels; ++k) {
    double sum = 0.0;
    for (int i = 0; i < grads.height; ++i)
      for (int j = 0; j < grads.width; ++j) sum += grads.at(k, i, j);
    alpha[k] = sum / (double(grads.height) * double(grads.width));
  }
  return alpha;
}

inline std::vector<double> naive_gradcam_map(const std::vector<double>& alpha,
                                             const ctxalign::xai::Tensor3& acts) {
  std::vector<double> map(std::size_t(acts.height) * acts.width, 0.0);
  for (int i = 0; i < acts.height; ++i) {
    for (int j = 0; j < acts.width; ++j) {
      double v = 0.0;
      for (int k = 0; k < acts.channels; ++k) v += alpha[std::size_t(k)] * acts.at(k, i, j);
      map[std::size_t(i) * acts.width + j] = v > 0.0 ? v : 0.0;
    }
  }
  return map;
}

inline double entropy_oracle(const std::vector<double>& map) {
  double total = 0.0;
  for (double v : map) total += v;
  if (total <= 0.0 || map.size() < 2) return 0.0;
  double h = 0.0;
  for (double v : map) {
    if (v > 0.0) {
      const double p = v / total;
      h -= p * std::log(p);
    }
  }
  return h / std::log(double(map.size()));
}

inline double top_mass_oracle(const std::vector<double>& map, double fraction) {
  double total = 0.0;
  for (double v : map) total += v;
  if (total <= 0.0) return 0.0;
  std::vector<double> sorted(map);
  std::sort(sorted.rbegin(), sorted.rend());
  const auto cells = std::size_t(std::ceil(fraction * double(map.size())));
  double top = 0.0;
  for (std::size_t i = 0; i < std::min(cells, sorted.size()); ++i) top += sorted[i];
  return top / total;
}

// O(n^2) pair counting with half credit for ties.
inline double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / double(pairs);
}

}  // namespace oracle
