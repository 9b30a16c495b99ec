#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "zsr/degradations.hpp"
#include "zsr/metrics.hpp"

using namespace zsr;

namespace {

ImageTensor fixture_crop(int y, int x, int h, int w) {
  return load_image(test::fixture("aerial_256.png")).crop(y, x, h, w);
}

DegradationSpec single(DegradationStage s) { return DegradationSpec{{s}, 0}; }

}  // namespace

TEST_CASE("every degradation is the identity at its neutral parameter") {
  const ImageTensor img = fixture_crop(0, 0, 24, 20);
  CHECK(apply_degradation(img, single(GaussianBlur{0.0})) == img);
  CHECK(apply_degradation(img, single(ColorCast{{1.0, 1.0, 1.0}})) == img);
  CHECK(apply_degradation(img, single(GaussianNoise{0.0})) == img);
  for (double a : {0.0, 0.4, 1.0}) CHECK(apply_degradation(img, single(Haze{1.0, a})) == img);
  CHECK(apply_degradation(img, DegradationSpec{}) == img);
}

TEST_CASE("blur of an impulse reproduces a directly evaluated 2-D Gaussian") {
  const int n = 21, c0 = 10;
  Tensor<float> t(3, n, n, 0.0f);
  for (int c = 0; c < 3; ++c) t.at(c, c0, c0) = 1.0f;
  const ImageTensor out = apply_degradation(ImageTensor(t), single(GaussianBlur{1.0}));
  double norm = 0;
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) norm += std::exp(-(dx * dx + dy * dy) / 2.0);
  }
  double worst = 0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const int dy = y - c0, dx = x - c0;
      const double expect = std::abs(dy) <= 3 && std::abs(dx) <= 3 ? std::exp(-(dx * dx + dy * dy) / 2.0) / norm : 0.0;
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(out.at(c, y, x) - expect));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("blur preserves constant images and kernels are normalized") {
  const ImageTensor flat(Tensor<float>(3, 9, 13, 0.37f));
  const ImageTensor out = apply_degradation(flat, single(GaussianBlur{2.5}));
  for (float v : out.tensor().values()) CHECK(std::abs(v - 0.37f) < 1e-6);
  for (double s : {0.3, 1.0, 1.5, 4.0}) {
    const auto k = gaussian_kernel_1d(s);
    CHECK(k.size() == std::size_t(2 * std::ceil(3 * s) + 1));
    double sum = 0;
    for (double v : k) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("haze stays inside [0,1] without clamping and matches the convex combination") {
  const ImageTensor img = fixture_crop(40, 40, 16, 16);
  const ImageTensor hazy = apply_degradation(img, single(Haze{0.6, 0.9}));
  for (std::size_t i = 0; i < img.tensor().size(); ++i) {
    const double expect = 0.6 * img.tensor().data()[i] + 0.4 * 0.9;
    CHECK(hazy.tensor().data()[i] == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("haze psnr agrees with a closed-form evaluation") {
  const ImageTensor gt = fixture_crop(16, 16, 64, 64);
  const ImageTensor hazy = apply_degradation(gt, single(Haze{0.6, 0.9}));
  // MSE of t*x + (1-t)*A against x is (1-t)^2 * mean((x - A)^2)
  long double acc = 0;
  for (float v : gt.tensor().values()) acc += ((long double)v - 0.9L) * ((long double)v - 0.9L);
  const long double mse = 0.16L * acc / gt.tensor().size();
  const double expected = double(-10.0L * std::log10(mse));
  CHECK(std::abs(psnr(hazy, gt).db - expected) < 1e-6);
}

TEST_CASE("noise is deterministic under a fixed seed") {
  const ImageTensor img = fixture_crop(0, 0, 16, 16);
  DegradationSpec s = parse_degradation("gaussian_noise(0.05)", 3);
  const ImageTensor a = apply_degradation(img, s), b = apply_degradation(img, s);
  CHECK(a == b);
  s.seed = 4;
  CHECK_FALSE(apply_degradation(img, s) == a);
  CHECK_FALSE(a == img);
}

TEST_CASE("degradation text parses, formats and validates") {
  const DegradationSpec spec = parse_degradation("color_cast(0.8,1.1,0.8)+gaussian_blur(1.5)+haze(0.7,0.9)");
  REQUIRE(spec.stages.size() == 3);
  CHECK(std::get<ColorCast>(spec.stages[0]).gains[1] == 1.1);
  CHECK(std::get<GaussianBlur>(spec.stages[1]).sigma == 1.5);
  CHECK(std::get<Haze>(spec.stages[2]).airlight == 0.9);
  CHECK(format_degradation(parse_degradation(format_degradation(spec))) == format_degradation(spec));
  CHECK(format_degradation(default_validation_spec()) == format_degradation(spec));
  CHECK_THROWS_AS(parse_degradation("gaussian_blur(-1)"), DegradationError);
  CHECK_THROWS_AS(parse_degradation("haze(1.5,0.5)"), DegradationError);
  CHECK_THROWS_AS(parse_degradation("sharpen(2)"), DegradationError);
  CHECK_THROWS_AS(parse_degradation("haze(0.5)"), DegradationError);
}

TEST_CASE("validation pairs use shifted crops") {
  const ImageTensor clean = load_image(test::fixture("aerial_256.png"));
  const auto aligned = make_validation_pair(clean, default_validation_spec(), 0, 0);
  CHECK(aligned.reference == aligned.ground_truth);
  const auto shifted = make_validation_pair(clean, default_validation_spec(), 16, 16);
  CHECK(shifted.reference.shape() == Shape{3, 240, 240});
  CHECK(shifted.ground_truth == clean.crop(16, 16, 240, 240));
  CHECK(ssim(shifted.reference, shifted.ground_truth) < 1.0);
  CHECK(shifted.distorted == apply_degradation(shifted.ground_truth, default_validation_spec()));
  CHECK_THROWS_AS(make_validation_pair(clean, default_validation_spec(), 200, 0, 100, 100), DegradationError);
}

TEST_CASE("default spec on the fixture matches the scipy oracle") {
  const ImageTensor clean = load_image(test::fixture("aerial_256.png"));
  const auto pair = make_validation_pair(clean, default_validation_spec(), 16, 16);
  CHECK(std::abs(psnr(pair.distorted, pair.ground_truth).db - test::oracle_value("default_spec_offset16_psnr")) < 1e-3);
}
