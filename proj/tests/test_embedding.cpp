#include "doctest.h"

#include <cmath>
#include <numbers>

#include "touchreg/embedding.hpp"
#include "touchreg/error.hpp"
#include "touchreg/rng.hpp"

using namespace touchreg;

namespace {

EmbeddingVector random_unit(SplitMix64& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  return EmbeddingVector::normalized(v);
}

ImageBuffer random_image(SplitMix64& rng, int w, int h, int c = 1) {
  ImageBuffer img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) img.set(x, y, k, rng.uniform(0.1, 0.9));
  return img;
}

// Orientation histogram recomputed directly from the rule, independent of the
// library: gray = channel mean, central differences on interior pixels.
std::array<double, 16> histogram_oracle(const ImageBuffer& img) {
  std::array<double, 16> h{};
  auto g = [&](int x, int y) {
    double s = 0;
    for (int c = 0; c < img.channels(); ++c) s += img.at(x, y, c);
    return s / img.channels();
  };
  for (int y = 1; y + 1 < img.height(); ++y)
    for (int x = 1; x + 1 < img.width(); ++x) {
      const double gx = (g(x + 1, y) - g(x - 1, y)) / 2, gy = (g(x, y + 1) - g(x, y - 1)) / 2;
      const double mag = std::hypot(gx, gy);
      if (mag == 0) continue;
      int b = static_cast<int>(std::floor((std::atan2(gy, gx) + std::numbers::pi) / (std::numbers::pi / 8)));
      b = std::clamp(b, 0, 15);
      h[b] += mag;
    }
  return h;
}

}  // namespace

TEST_CASE("embedding vectors are unit norm") {
  CHECK_THROWS_AS(EmbeddingVector({1.0, 1.0}), Error);
  CHECK_THROWS_AS(EmbeddingVector::normalized({0.0, 0.0}), Error);
  CHECK_THROWS_AS(EmbeddingVector({}), Error);
  const auto v = EmbeddingVector::normalized({3.0, 4.0});
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
}

TEST_CASE("similarity") {
  CHECK(similarity(EmbeddingVector({1.0, 0.0}), EmbeddingVector({0.0, 1.0})) == 0.0);
  CHECK(similarity(EmbeddingVector({0.6, 0.8}), EmbeddingVector({-0.6, -0.8})) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(similarity(EmbeddingVector({1.0}), EmbeddingVector({1.0, 0.0})), Error);

  SplitMix64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_unit(rng, 32), b = random_unit(rng, 32);
    double dot = 0;
    for (std::size_t k = 0; k < 32; ++k) dot += a[k] * b[k];
    CHECK(std::abs(similarity(a, b) - dot) <= 1e-12);
    CHECK(std::abs(similarity(a, b)) <= 1.0);
  }
}

TEST_CASE("rerank") {
  SplitMix64 rng(2);
  const auto q = random_unit(rng, 16);
  std::vector<EmbeddingVector> cands;
  for (int i = 0; i < 20; ++i) cands.push_back(random_unit(rng, 16));
  CHECK(rerank(cands, q, 1) == 0);

  auto planted = cands;
  planted[7] = q;
  CHECK(rerank(planted, q, 16) == 7);

  double prev = -2.0;
  for (std::size_t k = 1; k <= cands.size(); ++k) {
    const double s = similarity(cands[rerank(cands, q, k)], q);
    CHECK(s >= prev);
    CHECK(s >= similarity(cands[rerank(cands, q, 1)], q));
    prev = s;
  }
  CHECK_THROWS_AS(rerank(cands, q, 0), Error);
  CHECK_THROWS_AS(rerank(cands, q, 21), Error);
  CHECK_THROWS_AS(rerank(std::vector<EmbeddingVector>{}, q, 1), Error);

  std::vector<EmbeddingVector> ties = {cands[0], cands[0], cands[0]};
  CHECK(rerank(ties, q, 3) == 0);
}

TEST_CASE("baseline descriptor") {
  SplitMix64 rng(3);
  SUBCASE("constant image maps to e1") {
    ImageBuffer c(16, 16, 3);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        for (int k = 0; k < 3; ++k) c.set(x, y, k, 0.4);
    const auto d = baseline_descriptor(c);
    REQUIRE(d.dimension() == 32);
    CHECK(d[0] == 1.0);
    for (std::size_t i = 1; i < 32; ++i) CHECK(d[i] == 0.0);
  }
  SUBCASE("self similarity and offset invariance") {
    const ImageBuffer img = random_image(rng, 24, 20, 3);
    const auto d = baseline_descriptor(img);
    CHECK(similarity(d, d) == doctest::Approx(1.0).epsilon(1e-12));
    ImageBuffer brighter = img;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        for (int k = 0; k < 3; ++k) brighter.set(x, y, k, img.at(x, y, k) + 0.05);
    const auto e = baseline_descriptor(brighter);
    for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(d[i] - e[i]) < 1e-9);
  }
  SUBCASE("histogram matches the oracle and shifts under rotation") {
    const ImageBuffer img = random_image(rng, 20, 20);
    const auto h = orientation_histogram(img);
    const auto ref = histogram_oracle(img);
    for (int b = 0; b < 16; ++b) CHECK(h[b] == doctest::Approx(ref[b]).epsilon(1e-12));

    const auto rot = orientation_histogram(img.rotated_clockwise());
    const auto rot_ref = histogram_oracle(img.rotated_clockwise());
    for (int b = 0; b < 16; ++b) {
      CHECK(rot[b] == doctest::Approx(rot_ref[b]).epsilon(1e-12));
      // A clockwise quarter turn adds pi/2 to every gradient angle: 4 bins.
      CHECK(rot[(b + 4) % 16] == doctest::Approx(h[b]).epsilon(1e-9));
    }
  }
  SUBCASE("unsupported dimension") {
    CHECK_THROWS_AS(baseline_descriptor(random_image(rng, 8, 8), 64), Error);
  }
}

TEST_CASE("block means") {
  ImageBuffer img(8, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) img.set(x, y, 0, (x / 2 + 4 * (y / 2)) / 16.0);
  const auto m = block_means_4x4(img);
  for (int i = 0; i < 16; ++i) CHECK(m[i] == doctest::Approx(i / 16.0));
}
