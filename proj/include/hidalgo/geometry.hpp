#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hidalgo {

/// Row-major coordinate matrix, one point per row.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(std::size_t n_points, std::size_t n_dims, std::vector<double> coords);

  std::size_t n_points() const { return n_points_; }
  std::size_t n_dims() const { return n_dims_; }
  std::span<const double> row(std::size_t i) const {
    return {coords_.data() + i * n_dims_, n_dims_};
  }
  const std::vector<double>& coords() const { return coords_; }

 private:
  std::size_t n_points_ = 0;
  std::size_t n_dims_ = 0;
  std::vector<double> coords_;
};

/// Dense symmetric distance matrix with zero diagonal and strictly positive
/// off-diagonal entries.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// Validates symmetry, zero diagonal and positivity of off-diagonal entries.
  DistanceMatrix(std::size_t n_points, std::vector<double> values);

  std::size_t n_points() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct Metric {
  enum class Kind { euclidean, periodic_euclidean, normalized_euclidean };

  Kind kind = Kind::euclidean;
  /// Per-coordinate periods; a single entry is broadcast to every coordinate.
  std::vector<double> periods;

  static Metric euclidean() { return {}; }
  static Metric periodic(std::vector<double> periods) {
    return {Kind::periodic_euclidean, std::move(periods)};
  }
  static Metric normalized() { return {Kind::normalized_euclidean, {}}; }

  /// Parses `euclidean`, `normalized` or `periodic:<p1>[,<p2>,...]`.
  static Metric parse(std::string_view text);
};

/// q-nearest-neighbor structure plus the two-neighbor ratio mu_i = r_i2 / r_i1.
struct NeighborData {
  std::size_t q = 0;
  /// n_points * q entries; row i lists the neighbors of i by ascending distance.
  std::vector<std::size_t> nn_idx;
  std::vector<double> mu;
  /// rev_idx[j] lists every i that has j among its q neighbors, in ascending order.
  std::vector<std::vector<std::size_t>> rev_idx;

  std::size_t n_points() const { return mu.size(); }
  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {nn_idx.data() + i * q, q};
  }
};

DistanceMatrix compute_distances(const PointCloud& cloud, const Metric& metric);

/// Distance between two rows under `metric`. Normalized rows must already be
/// unit length; compute_distances takes care of that.
double metric_distance(std::span<const double> a, std::span<const double> b,
                       const Metric& metric);

NeighborData build_neighbor_data(const DistanceMatrix& dm, std::size_t q);

/// Same result as build_neighbor_data(compute_distances(cloud, metric), q)
/// without materializing the N x N matrix.
NeighborData build_neighbor_data(const PointCloud& cloud, const Metric& metric, std::size_t q);

/// Greedy (index order) maximal set of points whose {self, first, second
/// neighbor} triples are pairwise disjoint.
std::vector<std::size_t> independent_subset(const NeighborData& nd);

/// Neighbor data for a subset of points: mu values are taken from `full`
/// (computed on the complete sample) while the q-neighbor graph is rebuilt
/// among the retained points only. Indices in the result refer to positions
/// within `subset`.
NeighborData restrict_to_subset(const DistanceMatrix& dm, const NeighborData& full,
                                std::span<const std::size_t> subset, std::size_t q);
NeighborData restrict_to_subset(const PointCloud& cloud, const Metric& metric,
                                const NeighborData& full, std::span<const std::size_t> subset,
                                std::size_t q);

}  // namespace hidalgo
