#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "touchreg/embedding.hpp"
#include "touchreg/geometry.hpp"
#include "touchreg/image.hpp"

namespace touchreg {

// Radii (meters) of the standard 3D localization table.
inline constexpr std::array<double, 5> kStandardRadii = {0.001, 0.005, 0.01, 0.05, 0.1};

struct GalleryItem {
  std::string id;
  EmbeddingVector embedding;
  Vec3 position;
};

class RetrievalGallery {
 public:
  // Throws Error(InvalidArgument) on duplicate ids or mixed dimensions.
  explicit RetrievalGallery(std::vector<GalleryItem> items);

  const std::vector<GalleryItem>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  std::size_t dimension() const { return items_.empty() ? 0 : items_.front().embedding.dimension(); }

 private:
  std::vector<GalleryItem> items_;
};

struct LocalizationQuery {
  EmbeddingVector embedding;
  Vec3 position;
};

// Mean over relevant items of precision at each relevant item's rank. Relevant
// ids missing from the ranking count as never retrieved. Empty relevant set -> 0.
// Throws Error(InvalidArgument) on duplicate ids in the ranking.
double average_precision(std::span<const std::string> ranked_ids, const std::set<std::string>& relevant);

// Item order by descending score, ties by ascending id.
std::vector<std::size_t> rank_by_score(std::span<const double> scores, std::span<const std::string> ids);

struct MapReport {
  std::vector<double> radii;
  std::vector<double> map_values;  // percent; NaN when no query had a relevant item
  // per_query_ap[q][j]: AP of query q at radius j, nullopt when its relevant set is empty.
  std::vector<std::vector<std::optional<double>>> per_query_ap;
  // Per radius: queries with and without relevant gallery items.
  std::vector<std::size_t> included_queries;
  std::vector<std::size_t> excluded_queries;
};

// mAP at each radius from a precomputed query x gallery score matrix.
MapReport map_from_scores(const Eigen::MatrixXd& scores, std::span<const Vec3> query_positions,
                          const RetrievalGallery& gallery, std::span<const double> radii);

// Ranks the gallery for each query by embedding similarity; gallery items
// within distance r of the query position are relevant.
MapReport map_at_radii(std::span<const LocalizationQuery> queries, const RetrievalGallery& gallery,
                       std::span<const double> radii);

// Plain-text table: one radius per column, one dataset per row.
std::string format_map_table(std::span<const std::pair<std::string, MapReport>> rows);

struct Heatmap {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

// Similarity of every sliding-window patch (top-left at stride multiples) to
// a tactile embedding.
Heatmap heatmap_2d(const ImageBuffer& image, int patch_size, int stride,
                   const EmbeddingVector& tactile, const Embedder& embedder);

}  // namespace touchreg
