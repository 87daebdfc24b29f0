#include <doctest.h>

#include <limits>
#include <random>

#include "ctxalign/errors.hpp"
#include "ctxalign/xai.hpp"
#include "testutil/fixtures.hpp"
#include "testutil/oracles.hpp"

using namespace ctxalign;
using xai::ActivationMap;
using xai::gradcam_map;
using xai::gradcam_summary;
using xai::gradcam_weights;
using xai::normalize_map;
using xai::summarize_activation;
using xai::Tensor3;

namespace {

Tensor3 filled(int k, int h, int w, double value) {
  Tensor3 t;
  t.channels = k;
  t.height = h;
  t.width = w;
  t.values.assign(std::size_t(k) * h * w, value);
  return t;
}

ActivationMap map_of(int h, int w, std::vector<double> values) {
  ActivationMap m;
  m.height = h;
  m.width = w;
  m.values = std::move(values);
  return m;
}

}  // namespace

TEST_CASE("gradcam_weights anchors") {
  CHECK(gradcam_weights(filled(1, 4, 4, 1.0)) == std::vector<double>{1.0});
  CHECK(gradcam_weights(filled(2, 3, 3, 0.0)) == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_WITH_AS(gradcam_weights(Tensor3{}), doctest::Contains("EmptyTensor"), Error);
}

TEST_CASE("gradcam_weights matches the per-channel summation oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const Tensor3 grads = fixtures::random_tensor(rng, 3, 5, 5);
    const auto alpha = gradcam_weights(grads);
    const auto expect = oracle::naive_gradcam_weights(grads);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      CHECK(alpha[k] == doctest::Approx(expect[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradcam_map identity weighting and ReLU clamp") {
  std::mt19937_64 rng(22);
  const Tensor3 acts = fixtures::random_tensor(rng, 1, 4, 6);
  const auto map = gradcam_map({1.0}, acts);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    CHECK(map.values[i] == (acts.values[i] > 0 ? acts.values[i] : 0.0));
  }

  const Tensor3 positive = fixtures::random_tensor(rng, 2, 3, 3, 0.5, 1.0);
  const auto zeroed = gradcam_map({-1.0, -2.0}, positive);
  for (double v : zeroed.values) CHECK(v == 0.0);

  CHECK_THROWS_WITH_AS(gradcam_map({1.0, 2.0}, acts), doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("gradcam_map matches the triple-loop oracle and stays nonnegative") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Tensor3 acts = fixtures::random_tensor(rng, 4, 6, 6);
    std::vector<double> alpha(4);
    for (double& a : alpha) a = coef(rng);
    const auto map = gradcam_map(alpha, acts);
    const auto expect = oracle::naive_gradcam_map(alpha, acts);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
      CHECK(map.values[i] >= 0.0);
      CHECK(map.values[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalize_map anchors") {
  const auto ramp = normalize_map(map_of(1, 3, {0, 2, 4}));
  CHECK_FALSE(ramp.degenerate);
  CHECK(ramp.map.values == std::vector<double>{0.0, 0.5, 1.0});

  const auto flat = normalize_map(map_of(2, 2, {3, 3, 3, 3}));
  CHECK(flat.degenerate);
  CHECK(flat.map.values == std::vector<double>{0, 0, 0, 0});

  const auto unit = normalize_map(map_of(1, 3, {0, 0.25, 1}));
  CHECK_FALSE(unit.degenerate);
  CHECK(unit.map.values == std::vector<double>{0, 0.25, 1});
}

TEST_CASE("summarize_activation anchors: uniform and spike") {
  const double fraction = 0.10;
  const auto uniform = summarize_activation(map_of(10, 10, std::vector<double>(100, 0.7)), fraction);
  CHECK(uniform.entropy == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(uniform.top_mass == doctest::Approx(0.10).epsilon(1e-9));
  CHECK(uniform.mean == doctest::Approx(0.7));
  CHECK(uniform.max == doctest::Approx(0.7));

  std::vector<double> spike(100, 0.0);
  spike[37] = 1.0;
  const auto concentrated = summarize_activation(map_of(10, 10, spike), fraction);
  CHECK(concentrated.entropy == 0.0);
  CHECK(concentrated.top_mass == 1.0);
  CHECK(concentrated.max == 1.0);

  const auto zero = summarize_activation(map_of(4, 4, std::vector<double>(16, 0.0)), fraction);
  CHECK(zero.mean == 0.0);
  CHECK(zero.max == 0.0);
  CHECK(zero.entropy == 0.0);
  CHECK(zero.top_mass == 0.0);
}

TEST_CASE("summarize_activation matches the direct-definition oracle") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> values(100);
    for (double& v : values) v = unit(rng);
    const auto summary = summarize_activation(map_of(10, 10, values), 0.1);
    CHECK(summary.entropy == doctest::Approx(oracle::entropy_oracle(values)).epsilon(1e-9));
    CHECK(summary.top_mass == doctest::Approx(oracle::top_mass_oracle(values, 0.1)).epsilon(1e-9));
  }
}

TEST_CASE("summarize_activation is transpose-invariant") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> values(6 * 9);
  for (double& v : values) v = unit(rng);
  std::vector<double> transposed(values.size());
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 9; ++c) transposed[std::size_t(c) * 6 + r] = values[std::size_t(r) * 9 + c];
  const auto a = summarize_activation(map_of(6, 9, values), 0.1);
  const auto b = summarize_activation(map_of(9, 6, transposed), 0.1);
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
  CHECK(a.max == b.max);
  CHECK(a.entropy == doctest::Approx(b.entropy).epsilon(1e-12));
  CHECK(a.top_mass == doctest::Approx(b.top_mass).epsilon(1e-12));
}

TEST_CASE("entropy is maximal only for uniform maps; spreading spikes lowers top_mass") {
  std::vector<double> nearly(100, 1.0);
  nearly[0] = 2.0;
  const auto skewed = summarize_activation(map_of(10, 10, nearly), 0.1);
  CHECK(skewed.entropy < 1.0 - 1e-6);

  double previous = 1.1;
  for (std::size_t spikes : {1u, 5u, 10u, 20u, 50u, 100u}) {
    std::vector<double> values(100, 0.0);
    for (std::size_t i = 0; i < spikes; ++i) values[i] = 1.0;
    const auto summary = summarize_activation(map_of(10, 10, values), 0.1);
    CHECK(summary.top_mass <= previous + 1e-12);
    previous = summary.top_mass;
  }
}

TEST_CASE("gradcam_summary composes and scaling gradients changes nothing") {
  std::mt19937_64 rng(26);
  const Tensor3 acts = fixtures::random_tensor(rng, 3, 6, 6);
  const Tensor3 grads = fixtures::random_tensor(rng, 3, 6, 6);

  const auto direct = gradcam_summary(acts, grads, 0.1);
  const auto manual = summarize_activation(
      normalize_map(gradcam_map(gradcam_weights(grads), acts)).map, 0.1);
  CHECK(direct.mean == manual.mean);
  CHECK(direct.max == manual.max);
  CHECK(direct.entropy == manual.entropy);
  CHECK(direct.top_mass == manual.top_mass);

  Tensor3 scaled = grads;
  for (double& v : scaled.values) v *= 7.5;
  const auto alpha = gradcam_weights(grads);
  const auto alpha_scaled = gradcam_weights(scaled);
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    CHECK(alpha_scaled[k] == doctest::Approx(7.5 * alpha[k]).epsilon(1e-12));
  }
  const auto rescaled = gradcam_summary(acts, scaled, 0.1);
  CHECK(rescaled.mean == doctest::Approx(direct.mean).epsilon(1e-9));
  CHECK(rescaled.max == doctest::Approx(direct.max).epsilon(1e-9));
  CHECK(rescaled.entropy == doctest::Approx(direct.entropy).epsilon(1e-9));
  CHECK(rescaled.top_mass == doctest::Approx(direct.top_mass).epsilon(1e-9));
}

TEST_CASE("gradcam_summary edge cases") {
  std::mt19937_64 rng(27);
  const Tensor3 acts = fixtures::random_tensor(rng, 2, 4, 4);
  const auto zero = gradcam_summary(acts, filled(2, 4, 4, 0.0), 0.1);
  CHECK(zero.mean == 0.0);
  CHECK(zero.max == 0.0);
  CHECK(zero.entropy == 0.0);
  CHECK(zero.top_mass == 0.0);

  const Tensor3 other = fixtures::random_tensor(rng, 2, 5, 4);
  CHECK_THROWS_WITH_AS(gradcam_summary(acts, other, 0.1), doctest::Contains("ShapeMismatch"),
                       Error);
}

TEST_CASE("validate_tensor rejects non-finite values") {
  Tensor3 t = filled(1, 2, 2, 1.0);
  t.values[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(xai::validate_tensor(t), doctest::Contains("NonFinite"), Error);
}
