#include "touchreg/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "touchreg/error.hpp"

namespace touchreg {

namespace {

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Half-open span [lo, hi) of cell i out of 4 over n pixels; never empty.
std::pair<int, int> cell_range(int i, int n) {
  const int lo = i * n / 4;
  const int hi = std::max((i + 1) * n / 4, lo + 1);
  return {std::min(lo, n - 1), std::min(hi, n)};
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> unit_values) : values_(std::move(unit_values)) {
  if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "embedding has zero dimension");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "embedding value is not finite");
  const double n = l2_norm(values_);
  if (std::abs(n - 1.0) > 1e-6)
    throw Error(ErrorKind::InvalidArgument,
                "embedding norm " + std::to_string(n) + " is not 1 within 1e-6");
  for (double& v : values_) v /= n;
}

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
  const double n = l2_norm(values);
  if (!(n > 0.0) || !std::isfinite(n))
    throw Error(ErrorKind::InvalidArgument, "cannot normalize a zero or non-finite vector");
  for (double& v : values) v /= n;
  return EmbeddingVector(std::move(values));
}

double similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension())
    throw Error(ErrorKind::InvalidArgument,
                "embedding dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                    std::to_string(b.dimension()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) s += a[i] * b[i];
  return std::clamp(s, -1.0, 1.0);
}

std::size_t rerank(std::span<const EmbeddingVector> candidates, const EmbeddingVector& query,
                   std::size_t k) {
  if (candidates.empty()) throw Error(ErrorKind::Precondition, "rerank: no candidates");
  if (k < 1 || k > candidates.size())
    throw Error(ErrorKind::Precondition, "rerank: k must lie in [1, " +
                                             std::to_string(candidates.size()) + "]");
  std::size_t best = 0;
  double best_sim = similarity(candidates[0], query);
  for (std::size_t i = 1; i < k; ++i) {
    const double s = similarity(candidates[i], query);
    if (s > best_sim) {
      best = i;
      best_sim = s;
    }
  }
  return best;
}

std::array<double, 16> block_means_4x4(const ImageBuffer& image) {
  std::array<double, 16> out{};
  for (int gy = 0; gy < 4; ++gy) {
    const auto [y0, y1] = cell_range(gy, image.height());
    for (int gx = 0; gx < 4; ++gx) {
      const auto [x0, x1] = cell_range(gx, image.width());
      double s = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) s += image.gray(x, y);
      out[static_cast<std::size_t>(gy * 4 + gx)] = s / ((y1 - y0) * (x1 - x0));
    }
  }
  return out;
}

std::array<double, 16> orientation_histogram(const ImageBuffer& image) {
  std::array<double, 16> hist{};
  constexpr double kBinWidth = std::numbers::pi / 8.0;
  for (int y = 1; y + 1 < image.height(); ++y) {
    for (int x = 1; x + 1 < image.width(); ++x) {
      const double gx = 0.5 * (image.gray(x + 1, y) - image.gray(x - 1, y));
      const double gy = 0.5 * (image.gray(x, y + 1) - image.gray(x, y - 1));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      const double theta = std::atan2(gy, gx);  // (-pi, pi]
      auto bin = static_cast<long>(std::floor((theta + std::numbers::pi) / kBinWidth));
      bin = ((bin % 16) + 16) % 16;
      hist[static_cast<std::size_t>(bin)] += mag;
    }
  }
  return hist;
}

EmbeddingVector baseline_descriptor(const ImageBuffer& image, std::size_t dim) {
  if (dim != kDefaultEmbeddingDim)
    throw Error(ErrorKind::InvalidArgument,
                "baseline descriptor is defined for dimension 32 only, got " + std::to_string(dim));
  const auto means = block_means_4x4(image);
  const auto hist = orientation_histogram(image);

  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= 16.0;

  std::vector<double> v;
  v.reserve(dim);
  for (double m : means) v.push_back(m - mean);
  v.insert(v.end(), hist.begin(), hist.end());

  const double n = l2_norm(v);
  if (!(n > 1e-12)) {
    // Constant image: fixed unit vector e_1.
    std::vector<double> e1(dim, 0.0);
    e1[0] = 1.0;
    return EmbeddingVector(std::move(e1));
  }
  for (double& x : v) x /= n;
  return EmbeddingVector(std::move(v));
}

}  // namespace touchreg
