#pragma once

#include <vector>

namespace ctxalign::xai {

/// Channel-major row-major tensor carrying activations or gradients.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int k, int i, int j) const {
    return values[(static_cast<std::size_t>(k) * height + i) * width + j];
  }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
};

/// Throws EmptyTensor or NonFinite when the invariants fail.
void validate_tensor(const Tensor3& t);

struct ActivationMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
};

struct NormalizedMap {
  ActivationMap map;    // values in [0,1]; all zeros when degenerate
  bool degenerate = false;  // set when max == min
};

/// Summary statistics of a normalized activation map. Entropy is Shannon
/// entropy of the mass-renormalized map in natural log units, divided by
/// ln(h*w) so it lies in [0,1]; top_mass is the mass share of the
/// ceil(fraction*h*w) largest cells.
struct ActivationSummary {
  double mean = 0.0;
  double max = 0.0;
  double entropy = 0.0;
  double top_mass = 0.0;
};

/// Per-channel spatial mean of the gradients (Z = h*w).
std::vector<double> gradcam_weights(const Tensor3& grads);

/// ReLU of the alpha-weighted channel sum. Throws ShapeMismatch when
/// alpha length differs from the channel count.
ActivationMap gradcam_map(const std::vector<double>& alpha, const Tensor3& acts);

/// Min-max normalization to [0,1]. A constant map normalizes to all zeros
/// with the degenerate flag set rather than erroring.
NormalizedMap normalize_map(const ActivationMap& map);

ActivationSummary summarize_activation(const ActivationMap& map, double top_fraction);

/// Full composition: weights -> map -> normalize -> summarize.
ActivationSummary gradcam_summary(const Tensor3& acts, const Tensor3& grads, double top_fraction);

}  // namespace ctxalign::xai
