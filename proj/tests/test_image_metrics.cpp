#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "touchreg/error.hpp"
#include "touchreg/image_metrics.hpp"

using namespace touchreg;

namespace {

ImageBuffer random_image(SplitMix64& rng, int w, int h, int c) {
  ImageBuffer img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) img.set(x, y, k, rng.uniform());
  return img;
}

ImageBuffer constant(int w, int h, double v) {
  ImageBuffer img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, 0, v);
  return img;
}

ImageBuffer swap_channels(const ImageBuffer& a) {
  ImageBuffer b(a.width(), a.height(), a.channels());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      for (int c = 0; c < a.channels(); ++c) b.set(x, y, c, a.at(x, y, a.channels() - 1 - c));
  return b;
}

}  // namespace

TEST_CASE("psnr") {
  const ImageBuffer a = constant(20, 20, 0.3);
  CHECK_FALSE(psnr(a, a).has_value());
  const auto p = psnr(a, constant(20, 20, 0.4));
  REQUIRE(p);
  CHECK(std::abs(*p - 20.0) <= 1e-9);

  SplitMix64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const ImageBuffer x = random_image(rng, 13, 9, 3), y = random_image(rng, 13, 9, 3);
    const double ref = -10.0 * std::log10(oracle::mse(x.values(), y.values()));
    CHECK(std::abs(*psnr(x, y) - ref) <= 1e-9);
    CHECK(*psnr(x, y) == *psnr(y, x));
    CHECK(*psnr(swap_channels(x), swap_channels(y)) == doctest::Approx(*psnr(x, y)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(psnr(a, constant(10, 10, 0.1)), Error);
}

TEST_CASE("ssim") {
  SplitMix64 rng(2);
  const ImageBuffer x = random_image(rng, 32, 24, 3);
  const ImageBuffer y = random_image(rng, 32, 24, 3);
  CHECK(std::abs(ssim(x, x) - 1.0) <= 1e-9);
  CHECK(std::abs(ssim(x, y) - ssim(y, x)) <= 1e-12);
  CHECK(ssim(x, y) >= -1.0);
  CHECK(ssim(x, y) <= 1.0);
  CHECK(ssim(swap_channels(x), swap_channels(y)) == doctest::Approx(ssim(x, y)).epsilon(1e-12));

  // Constant images: only the luminance term survives,
  // (2 a b + C1) / (a^2 + b^2 + C1) with C1 = 0.01^2.
  const double a = 0.2, b = 0.7, c1 = 0.0001;
  const double expected = (2 * a * b + c1) / (a * a + b * b + c1);
  CHECK(ssim(constant(16, 16, a), constant(16, 16, b)) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(ssim(constant(10, 10, 0.1), constant(10, 10, 0.1)), Error);
  CHECK_THROWS_AS(ssim(x, constant(32, 24, 0.1)), Error);
}
