#include "ctxalign/xai.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctxalign/errors.hpp"

namespace ctxalign::xai {

void validate_tensor(const Tensor3& t) {
  if (t.channels <= 0 || t.height <= 0 || t.width <= 0 || t.values.empty()) {
    throw Error(Errc::empty_tensor, "tensor has no elements");
  }
  const auto expected = static_cast<std::size_t>(t.channels) * t.height * t.width;
  if (t.values.size() != expected) {
    throw Error(Errc::shape_mismatch, std::to_string(t.values.size()) + " values for " +
                                          std::to_string(t.channels) + "x" +
                                          std::to_string(t.height) + "x" + std::to_string(t.width));
  }
  for (double v : t.values) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "tensor contains a non-finite value");
  }
}

std::vector<double> gradcam_weights(const Tensor3& grads) {
  validate_tensor(grads);
  const double z = static_cast<double>(grads.plane());
  std::vector<double> alpha(grads.channels, 0.0);
  for (int k = 0; k < grads.channels; ++k) {
    double sum = 0.0;
    const double* begin = grads.values.data() + static_cast<std::size_t>(k) * grads.plane();
    for (std::size_t i = 0; i < grads.plane(); ++i) sum += begin[i];
    alpha[k] = sum / z;
  }
  return alpha;
}

ActivationMap gradcam_map(const std::vector<double>& alpha, const Tensor3& acts) {
  validate_tensor(acts);
  if (alpha.size() != static_cast<std::size_t>(acts.channels)) {
    throw Error(Errc::shape_mismatch, std::to_string(alpha.size()) + " weights for " +
                                          std::to_string(acts.channels) + " channels");
  }
  ActivationMap map;
  map.height = acts.height;
  map.width = acts.width;
  map.values.assign(acts.plane(), 0.0);
  for (int k = 0; k < acts.channels; ++k) {
    const double w = alpha[static_cast<std::size_t>(k)];
    const double* plane = acts.values.data() + static_cast<std::size_t>(k) * acts.plane();
    for (std::size_t i = 0; i < acts.plane(); ++i) map.values[i] += w * plane[i];
  }
  for (double& v : map.values) v = std::max(v, 0.0);
  return map;
}

NormalizedMap normalize_map(const ActivationMap& map) {
  if (map.values.empty()) throw Error(Errc::empty_tensor, "activation map is empty");
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  NormalizedMap out;
  out.map.height = map.height;
  out.map.width = map.width;
  if (hi == lo) {
    out.map.values.assign(map.values.size(), 0.0);
    out.degenerate = true;
    return out;
  }
  out.map.values.resize(map.values.size());
  const double span = hi - lo;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    out.map.values[i] = (map.values[i] - lo) / span;
  }
  return out;
}

ActivationSummary summarize_activation(const ActivationMap& map, double top_fraction) {
  const std::size_t n = map.values.size();
  if (n == 0) throw Error(Errc::empty_tensor, "activation map is empty");

  ActivationSummary summary;
  double total = 0.0;
  for (double v : map.values) {
    total += v;
    summary.max = std::max(summary.max, v);
  }
  summary.mean = total / static_cast<double>(n);

  if (total <= 0.0) return summary;  // all-zero map: every field 0

  if (n > 1) {
    double h = 0.0;
    for (double v : map.values) {
      if (v <= 0.0) continue;
      const double p = v / total;
      h -= p * std::log(p);
    }
    summary.entropy = h / std::log(static_cast<double>(n));
  }

  const auto top_cells = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(n)));
  std::vector<double> sorted(map.values);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double top = 0.0;
  for (std::size_t i = 0; i < std::min(top_cells, n); ++i) top += sorted[i];
  summary.top_mass = top / total;
  return summary;
}

ActivationSummary gradcam_summary(const Tensor3& acts, const Tensor3& grads, double top_fraction) {
  if (acts.channels != grads.channels || acts.height != grads.height ||
      acts.width != grads.width) {
    throw Error(Errc::shape_mismatch, "activation and gradient tensor shapes differ");
  }
  const std::vector<double> alpha = gradcam_weights(grads);
  const ActivationMap map = gradcam_map(alpha, acts);
  const NormalizedMap normalized = normalize_map(map);
  return summarize_activation(normalized.map, top_fraction);
}

}  // namespace ctxalign::xai
