#include <doctest.h>

#include <random>

#include "ctxalign/errors.hpp"
#include "ctxalign/radiomics.hpp"
#include "testutil/fixtures.hpp"
#include "testutil/oracles.hpp"

using namespace ctxalign;
using radiomics::compute_glcm;
using radiomics::glcm_texture;
using radiomics::intensity_stats;
using radiomics::lbp_histogram;

namespace {
const std::vector<double> kPercentiles = {10, 25, 50, 75, 90};
}

TEST_CASE("intensity_stats on a constant image") {
  const GrayImage img = fixtures::constant_image(5, 4, 7);
  const auto stats = intensity_stats(img, kPercentiles);
  CHECK(stats.mean == 7.0);
  CHECK(stats.variance == 0.0);
  CHECK(stats.std == 0.0);
  CHECK(stats.percentiles.at(50) == 7.0);
  CHECK(stats.range == 0.0);
}

TEST_CASE("intensity_stats on the 2x2 ramp") {
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.pixels = {0, 1, 2, 3};
  const auto stats = intensity_stats(img, kPercentiles);
  CHECK(stats.mean == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(stats.variance == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(stats.percentiles.at(50) == doctest::Approx(1.5));
  CHECK(stats.percentiles.at(25) == doctest::Approx(0.75));
  CHECK(stats.min == 0.0);
  CHECK(stats.max == 3.0);
  CHECK(stats.range == 3.0);
}

TEST_CASE("intensity_stats matches the two-pass oracle on random images") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const GrayImage img = fixtures::random_image(rng, 16, 16);
    const auto stats = intensity_stats(img, kPercentiles);
    const auto expect = oracle::intensity(img, kPercentiles);
    CHECK(stats.mean == doctest::Approx(expect.mean).epsilon(1e-12));
    CHECK(stats.variance == doctest::Approx(expect.variance).epsilon(1e-12));
    for (double p : kPercentiles) {
      CHECK(stats.percentiles.at(p) == doctest::Approx(expect.percentiles.at(p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("intensity_stats rejects an empty buffer") {
  GrayImage img;
  CHECK_THROWS_AS(intensity_stats(img, kPercentiles), Error);
}

TEST_CASE("intensity_stats is invariant under transposition") {
  std::mt19937_64 rng(12);
  const GrayImage img = fixtures::random_image(rng, 9, 13);
  GrayImage t;
  t.width = img.height;
  t.height = img.width;
  t.pixels.resize(img.pixels.size());
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) t.pixels[std::size_t(c) * t.width + r] = img.at(r, c);
  const auto a = intensity_stats(img, kPercentiles);
  const auto b = intensity_stats(t, kPercentiles);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  CHECK(a.percentiles == b.percentiles);
}

TEST_CASE("compute_glcm on a constant image concentrates at one diagonal cell") {
  const GrayImage img = fixtures::constant_image(4, 4, 200);
  const auto glcm = compute_glcm(img, GlcmConfig{});
  const int k = radiomics::quantize(200, 16);
  double sum = 0.0;
  for (double v : glcm.p) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(glcm.at(k, k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compute_glcm rejects images without pairs") {
  const GrayImage img = fixtures::constant_image(1, 1, 10);
  CHECK_THROWS_WITH_AS(compute_glcm(img, GlcmConfig{}), doctest::Contains("DegenerateImage"),
                       Error);

  GlcmConfig far;
  far.distance = 40;
  const GrayImage small = fixtures::constant_image(8, 8, 10);
  CHECK_THROWS_AS(compute_glcm(small, far), Error);
}

TEST_CASE("compute_glcm equals the pair-enumeration oracle exactly") {
  std::mt19937_64 rng(13);
  GlcmConfig cfg;
  SUBCASE("symmetric, all angles") {}
  SUBCASE("asymmetric, single angle, distance 2") {
    cfg.symmetric = false;
    cfg.angles = {45};
    cfg.distance = 2;
  }
  SUBCASE("coarse quantization") { cfg.levels = 4; }
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<int> side(cfg.distance + 1, 12);
    const GrayImage img = fixtures::random_image(rng, side(rng), side(rng));
    const auto glcm = compute_glcm(img, cfg);
    const auto expect = oracle::naive_glcm(img, cfg);
    REQUIRE(glcm.p.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(glcm.p[i] == expect[i]);
  }
}

TEST_CASE("glcm_texture closed-form anchors") {
  radiomics::Glcm diag;
  diag.levels = 3;
  diag.p.assign(9, 0.0);
  diag.p[4] = 1.0;  // all mass at (1,1)
  const auto t1 = glcm_texture(diag);
  CHECK(t1.contrast == 0.0);
  CHECK(t1.homogeneity == 1.0);

  radiomics::Glcm off;
  off.levels = 2;
  off.p = {0.0, 1.0, 0.0, 0.0};  // all mass at (0,1)
  const auto t2 = glcm_texture(off);
  CHECK(t2.contrast == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t2.homogeneity == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("glcm_texture rejects unnormalized input") {
  radiomics::Glcm bad;
  bad.levels = 2;
  bad.p = {0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_WITH_AS(glcm_texture(bad), doctest::Contains("NotNormalized"), Error);
}

TEST_CASE("glcm_texture matches the double-loop oracle on random matrices") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    radiomics::Glcm glcm;
    glcm.levels = 20;
    glcm.p.resize(400);
    double sum = 0.0;
    for (double& v : glcm.p) {
      v = unit(rng);
      sum += v;
    }
    for (double& v : glcm.p) v /= sum;
    const auto t = glcm_texture(glcm);
    CHECK(t.contrast ==
          doctest::Approx(oracle::glcm_contrast_oracle(glcm.p, 20)).epsilon(1e-12));
    CHECK(t.homogeneity ==
          doctest::Approx(oracle::glcm_homogeneity_oracle(glcm.p, 20)).epsilon(1e-12));
  }
}

TEST_CASE("lbp_histogram: ties encode as 1, constant image lands in bin 255") {
  const GrayImage img = fixtures::constant_image(6, 6, 42);
  const auto hist = lbp_histogram(img, LbpConfig{});
  CHECK(hist[255] == 1.0);
  double sum = 0.0;
  for (double v : hist) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lbp_histogram rejects images without interior pixels") {
  const GrayImage img = fixtures::constant_image(2, 2, 1);
  CHECK_THROWS_WITH_AS(lbp_histogram(img, LbpConfig{}), doctest::Contains("ImageTooSmall"), Error);
}

TEST_CASE("lbp_histogram equals the per-pixel oracle exactly") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const GrayImage img = fixtures::random_image(rng, 10, 10);
    const auto hist = lbp_histogram(img, LbpConfig{});
    const auto expect = oracle::naive_lbp(img, 1);
    for (int k = 0; k < 256; ++k) CHECK(hist[k] == expect[k]);
  }
}

TEST_CASE("constant intensity shift: variance, texture, LBP invariant; mean shifts") {
  std::mt19937_64 rng(16);
  const GlcmConfig glcm_cfg;
  const int bin_width = 256 / glcm_cfg.levels;
  for (int trial = 0; trial < 10; ++trial) {
    // base pixels leave headroom so the shift never clamps
    const GrayImage base = fixtures::random_image(rng, 12, 12, 0, 191);
    const int shift_bins = 1 + int(rng() % 4);
    const int c = shift_bins * bin_width;  // bin-aligned so quantized pairs shift uniformly
    GrayImage shifted = base;
    for (auto& p : shifted.pixels) p = std::uint8_t(p + c);

    const auto s0 = intensity_stats(base, kPercentiles);
    const auto s1 = intensity_stats(shifted, kPercentiles);
    CHECK(s1.mean == doctest::Approx(s0.mean + c).epsilon(1e-12));
    CHECK(s1.variance == doctest::Approx(s0.variance).epsilon(1e-12));

    const auto t0 = glcm_texture(compute_glcm(base, glcm_cfg));
    const auto t1 = glcm_texture(compute_glcm(shifted, glcm_cfg));
    CHECK(t1.contrast == doctest::Approx(t0.contrast).epsilon(1e-12));
    CHECK(t1.homogeneity == doctest::Approx(t0.homogeneity).epsilon(1e-12));

    // LBP compares pixels pairwise, so any uniform shift is a no-op
    CHECK(lbp_histogram(base, LbpConfig{}) == lbp_histogram(shifted, LbpConfig{}));
  }
}

TEST_CASE("4-angle symmetric GLCM contrast is invariant under 90-degree rotation") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const GrayImage img = fixtures::random_image(rng, 9, 7);
    GrayImage rot;  // 90 degrees clockwise
    rot.width = img.height;
    rot.height = img.width;
    rot.pixels.resize(img.pixels.size());
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width; ++c) {
        rot.pixels[std::size_t(c) * rot.width + (img.height - 1 - r)] = img.at(r, c);
      }
    }
    const auto t0 = glcm_texture(compute_glcm(img, GlcmConfig{}));
    const auto t1 = glcm_texture(compute_glcm(rot, GlcmConfig{}));
    CHECK(t0.contrast == t1.contrast);
    CHECK(t0.homogeneity == t1.homogeneity);
  }
}

TEST_CASE("extract_radiomics composes the three extractors") {
  PipelineConfig cfg;
  std::mt19937_64 rng(18);
  const GrayImage img = fixtures::random_image(rng, 32, 32);
  const auto features = radiomics::extract_radiomics(img, cfg);

  const auto stats = intensity_stats(img, cfg.percentiles);
  const auto texture = glcm_texture(compute_glcm(img, cfg.glcm));
  const auto hist = lbp_histogram(img, cfg.lbp);
  CHECK(features.intensity.mean == stats.mean);
  CHECK(features.intensity.percentiles == stats.percentiles);
  CHECK(features.glcm_contrast == texture.contrast);
  CHECK(features.glcm_homogeneity == texture.homogeneity);
  CHECK(features.lbp_histogram == hist);

  const auto constant = radiomics::extract_radiomics(fixtures::constant_image(8, 8, 9), cfg);
  CHECK(constant.intensity.variance == 0.0);
  CHECK(constant.glcm_contrast == 0.0);
  CHECK(constant.glcm_homogeneity == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(radiomics::extract_radiomics(fixtures::constant_image(2, 2, 9), cfg), Error);
}
