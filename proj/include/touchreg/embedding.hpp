#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "touchreg/image.hpp"

namespace touchreg {

inline constexpr std::size_t kDefaultEmbeddingDim = 32;
inline constexpr std::size_t kDefaultRerankCount = 16;

// Unit-L2-norm descriptor shared by the visual and tactile encoders.
class EmbeddingVector {
 public:
  // Throws Error(InvalidArgument) unless the values are finite with norm 1 +- 1e-6.
  // The stored values are renormalized exactly.
  explicit EmbeddingVector(std::vector<double> unit_values);

  // Scales an arbitrary non-zero vector to unit norm.
  static EmbeddingVector normalized(std::vector<double> values);

  std::size_t dimension() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// Dot product of two unit vectors, clamped to [-1, 1]. Throws on dimension mismatch.
double similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Index of the candidate most similar to the query among the first k; ties go
// to the lowest index.
std::size_t rerank(std::span<const EmbeddingVector> candidates, const EmbeddingVector& query,
                   std::size_t k = kDefaultRerankCount);

// Encoder pair mapping images into the shared embedding space. Implementations
// must be deterministic and safe to call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed_visual(const ImageBuffer& patch) const = 0;
  virtual EmbeddingVector embed_tactile(const ImageBuffer& image) const = 0;
  virtual std::size_t dimension() const = 0;
};

// Grayscale 4x4 block means of an image (row-major over the grid).
std::array<double, 16> block_means_4x4(const ImageBuffer& image);

// Magnitude-weighted 16-bin histogram of gradient orientation, central
// differences over interior pixels, bin b covering [-pi + b*pi/8, -pi + (b+1)*pi/8).
std::array<double, 16> orientation_histogram(const ImageBuffer& image);

// Untrained stand-in descriptor: mean-centered 4x4 block means followed by the
// orientation histogram, L2-normalized. A constant image maps to e_1.
EmbeddingVector baseline_descriptor(const ImageBuffer& image, std::size_t dim = kDefaultEmbeddingDim);

// Uses baseline_descriptor for both modalities.
class BaselineEmbedder final : public Embedder {
 public:
  EmbeddingVector embed_visual(const ImageBuffer& patch) const override {
    return baseline_descriptor(patch);
  }
  EmbeddingVector embed_tactile(const ImageBuffer& image) const override {
    return baseline_descriptor(image);
  }
  std::size_t dimension() const override { return kDefaultEmbeddingDim; }
};

}  // namespace touchreg
