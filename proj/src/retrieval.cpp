#include "touchreg/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "touchreg/error.hpp"

namespace touchreg {

RetrievalGallery::RetrievalGallery(std::vector<GalleryItem> items) : items_(std::move(items)) {
  std::unordered_set<std::string> seen;
  for (const auto& it : items_) {
    if (!seen.insert(it.id).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate gallery id '" + it.id + "'");
    if (it.embedding.dimension() != items_.front().embedding.dimension())
      throw Error(ErrorKind::InvalidArgument, "gallery item '" + it.id + "' has a different dimension");
    if (!it.position.allFinite())
      throw Error(ErrorKind::InvalidArgument, "gallery item '" + it.id + "' has a non-finite position");
  }
}

double average_precision(std::span<const std::string> ranked_ids, const std::set<std::string>& relevant) {
  std::unordered_set<std::string> seen;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked_ids.size(); ++i) {
    if (!seen.insert(ranked_ids[i]).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate id '" + ranked_ids[i] + "' in ranking");
    if (relevant.count(ranked_ids[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  if (relevant.empty()) return 0.0;
  return sum / static_cast<double>(relevant.size());
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores, std::span<const std::string> ids) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  return order;
}

MapReport map_from_scores(const Eigen::MatrixXd& scores, std::span<const Vec3> query_positions,
                          const RetrievalGallery& gallery, std::span<const double> radii) {
  if (gallery.size() == 0) throw Error(ErrorKind::Precondition, "mAP needs a non-empty gallery");
  if (static_cast<std::size_t>(scores.rows()) != query_positions.size() ||
      static_cast<std::size_t>(scores.cols()) != gallery.size())
    throw Error(ErrorKind::InvalidArgument, "score matrix shape does not match queries x gallery");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (!(radii[j] > 0.0) || (j > 0 && !(radii[j] > radii[j - 1])))
      throw Error(ErrorKind::InvalidArgument, "radii must be positive and strictly ascending");
  }

  const auto& items = gallery.items();
  std::vector<std::string> ids;
  ids.reserve(items.size());
  for (const auto& it : items) ids.push_back(it.id);

  MapReport report;
  report.radii.assign(radii.begin(), radii.end());
  report.per_query_ap.assign(query_positions.size(), std::vector<std::optional<double>>(radii.size()));
  report.included_queries.assign(radii.size(), 0);
  report.excluded_queries.assign(radii.size(), 0);
  std::vector<double> sums(radii.size(), 0.0);

  std::vector<double> row(items.size());
  std::vector<std::string> ranked(items.size());
  for (std::size_t q = 0; q < query_positions.size(); ++q) {
    for (std::size_t g = 0; g < items.size(); ++g) row[g] = scores(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(g));
    const auto order = rank_by_score(row, ids);
    for (std::size_t k = 0; k < order.size(); ++k) ranked[k] = ids[order[k]];

    for (std::size_t j = 0; j < radii.size(); ++j) {
      std::set<std::string> relevant;
      for (const auto& it : items)
        if ((it.position - query_positions[q]).norm() <= radii[j]) relevant.insert(it.id);
      if (relevant.empty()) {
        ++report.excluded_queries[j];
        continue;
      }
      const double ap = average_precision(ranked, relevant);
      report.per_query_ap[q][j] = ap;
      sums[j] += ap;
      ++report.included_queries[j];
    }
  }
  for (std::size_t j = 0; j < radii.size(); ++j) {
    report.map_values.push_back(report.included_queries[j] == 0
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : 100.0 * sums[j] / static_cast<double>(report.included_queries[j]));
  }
  return report;
}

MapReport map_at_radii(std::span<const LocalizationQuery> queries, const RetrievalGallery& gallery,
                       std::span<const double> radii) {
  if (gallery.size() == 0) throw Error(ErrorKind::Precondition, "mAP needs a non-empty gallery");
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(gallery.size()));
  std::vector<Vec3> positions;
  positions.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    positions.push_back(queries[q].position);
    for (std::size_t g = 0; g < gallery.size(); ++g)
      scores(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(g)) =
          similarity(queries[q].embedding, gallery.items()[g].embedding);
  }
  return map_from_scores(scores, positions, gallery, radii);
}

std::string format_map_table(std::span<const std::pair<std::string, MapReport>> rows) {
  std::ostringstream out;
  if (rows.empty()) return "";
  const auto& radii = rows.front().second.radii;
  char buf[64];
  out << "# mAP (%) by radius r (m)\n";
  out << "dataset";
  for (double r : radii) {
    std::snprintf(buf, sizeof buf, "\t%g", r);
    out << buf;
  }
  out << "\n";
  for (const auto& [name, report] : rows) {
    if (report.radii != radii)
      throw Error(ErrorKind::InvalidArgument, "all rows of a mAP table must share radii");
    out << name;
    for (double v : report.map_values) {
      if (std::isnan(v)) {
        out << "\tn/a";
      } else {
        std::snprintf(buf, sizeof buf, "\t%.2f", v);
        out << buf;
      }
    }
    out << "\n";
  }
  for (const auto& [name, report] : rows) {
    out << "# " << name << " included/excluded queries:";
    for (std::size_t j = 0; j < report.radii.size(); ++j)
      out << " " << report.included_queries[j] << "/" << report.excluded_queries[j];
    out << "\n";
  }
  return out.str();
}

Heatmap heatmap_2d(const ImageBuffer& image, int patch_size, int stride,
                   const EmbeddingVector& tactile, const Embedder& embedder) {
  if (patch_size < 1 || stride < 1)
    throw Error(ErrorKind::InvalidArgument, "patch size and stride must be positive");
  if (patch_size > image.width() || patch_size > image.height())
    throw Error(ErrorKind::InvalidArgument, "patch larger than the image");
  Heatmap h;
  h.rows = (image.height() - patch_size) / stride + 1;
  h.cols = (image.width() - patch_size) / stride + 1;
  h.values.reserve(static_cast<std::size_t>(h.rows) * h.cols);
  for (int r = 0; r < h.rows; ++r)
    for (int c = 0; c < h.cols; ++c)
      h.values.push_back(similarity(
          embedder.embed_visual(image.crop(c * stride, r * stride, patch_size, patch_size)), tactile));
  return h;
}

}  // namespace touchreg
