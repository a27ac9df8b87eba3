#include "hidalgo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hidalgo/error.hpp"

namespace hidalgo {
namespace {

[[noreturn]] void throw_tie(std::size_t i, std::size_t j) {
  throw DataError("points " + std::to_string(i) + " and " + std::to_string(j) +
                  " are at zero distance; ties jeopardize mu (remove duplicates)");
}

void validate_metric(const Metric& metric, std::size_t n_dims) {
  if (metric.kind != Metric::Kind::periodic_euclidean) return;
  if (metric.periods.empty())
    throw std::invalid_argument("periodic metric needs at least one period");
  if (metric.periods.size() != 1 && metric.periods.size() != n_dims)
    throw std::invalid_argument("periodic metric: got " + std::to_string(metric.periods.size()) +
                                " periods for " + std::to_string(n_dims) + " coordinates");
  for (double p : metric.periods)
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("periodic metric: periods must be finite and positive");
}

// Unit-normalizes each row for the normalized metric, otherwise returns the
// cloud unchanged.
PointCloud prepare(const PointCloud& cloud, const Metric& metric) {
  validate_metric(metric, cloud.n_dims());
  if (metric.kind != Metric::Kind::normalized_euclidean) return cloud;
  std::vector<double> out = cloud.coords();
  const std::size_t dim = cloud.n_dims();
  for (std::size_t i = 0; i < cloud.n_points(); ++i) {
    double* row = out.data() + i * dim;
    double norm = 0.0;
    for (std::size_t c = 0; c < dim; ++c) norm += row[c] * row[c];
    norm = std::sqrt(norm);
    if (norm == 0.0)
      throw std::invalid_argument("normalized metric: row " + std::to_string(i) + " has zero norm");
    for (std::size_t c = 0; c < dim; ++c) row[c] /= norm;
  }
  return PointCloud(cloud.n_points(), dim, std::move(out));
}

struct Candidate {
  double dist;
  std::size_t idx;
  bool operator<(const Candidate& o) const {
    return dist < o.dist || (dist == o.dist && idx < o.idx);
  }
};

// Fills the q nearest neighbors of `self` from a full distance row.
void select_neighbors(std::size_t self, std::span<const double> row, std::size_t q,
                      std::vector<Candidate>& scratch, std::size_t* out, double& mu) {
  scratch.clear();
  for (std::size_t j = 0; j < row.size(); ++j)
    if (j != self) scratch.push_back({row[j], j});
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(q),
                    scratch.end());
  if (scratch[0].dist <= 0.0) throw_tie(std::min(self, scratch[0].idx), std::max(self, scratch[0].idx));
  for (std::size_t k = 0; k < q; ++k) out[k] = scratch[k].idx;
  mu = scratch[1].dist / scratch[0].dist;
}

void fill_reverse(NeighborData& nd) {
  const std::size_t n = nd.n_points();
  nd.rev_idx.assign(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : nd.neighbors(i)) nd.rev_idx[j].push_back(i);
}

void check_q(std::size_t q, std::size_t n) {
  if (q < 2) throw std::invalid_argument("neighbor data needs q >= 2");
  if (q >= n)
    throw std::invalid_argument("q = " + std::to_string(q) + " must be smaller than the number of points (" +
                                std::to_string(n) + ")");
}

template <typename RowFn>
NeighborData build_from_rows(std::size_t n, std::size_t q, RowFn&& row_of) {
  check_q(q, n);
  NeighborData nd;
  nd.q = q;
  nd.nn_idx.resize(n * q);
  nd.mu.resize(n);
  std::vector<Candidate> scratch;
  scratch.reserve(n);
  std::vector<double> row_buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> row = row_of(i, row_buf);
    select_neighbors(i, row, q, scratch, nd.nn_idx.data() + i * q, nd.mu[i]);
  }
  fill_reverse(nd);
  return nd;
}

}  // namespace

PointCloud::PointCloud(std::size_t n_points, std::size_t n_dims, std::vector<double> coords)
    : n_points_(n_points), n_dims_(n_dims), coords_(std::move(coords)) {
  if (n_points_ < 3) throw std::invalid_argument("point cloud needs at least 3 points");
  if (n_dims_ == 0) throw std::invalid_argument("point cloud needs at least one coordinate");
  if (coords_.size() != n_points_ * n_dims_)
    throw std::invalid_argument("point cloud: coordinate count does not match shape");
  for (double v : coords_)
    if (!std::isfinite(v)) throw std::invalid_argument("point cloud: non-finite coordinate");
}

DistanceMatrix::DistanceMatrix(std::size_t n_points, std::vector<double> values)
    : n_(n_points), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw std::invalid_argument("distance matrix must be square");
  for (std::size_t i = 0; i < n_; ++i) {
    if (values_[i * n_ + i] != 0.0)
      throw std::invalid_argument("distance matrix: nonzero diagonal at row " + std::to_string(i));
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double a = values_[i * n_ + j];
      const double b = values_[j * n_ + i];
      if (!std::isfinite(a) || a < 0.0)
        throw std::invalid_argument("distance matrix: entries must be finite and nonnegative");
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        throw std::invalid_argument("distance matrix is not symmetric at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      if (a == 0.0) throw_tie(i, j);
    }
  }
}

Metric Metric::parse(std::string_view text) {
  if (text == "euclidean") return euclidean();
  if (text == "normalized") return normalized();
  constexpr std::string_view prefix = "periodic:";
  if (text.starts_with(prefix)) {
    std::vector<double> periods;
    std::string_view rest = text.substr(prefix.size());
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string item(rest.substr(0, comma));
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size())
        throw std::invalid_argument("bad period '" + item + "' in metric spec");
      periods.push_back(value);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    Metric m = periodic(std::move(periods));
    validate_metric(m, m.periods.size());
    return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(text) +
                              "' (expected euclidean, normalized or periodic:<periods>)");
}

double metric_distance(std::span<const double> a, std::span<const double> b, const Metric& metric) {
  double sum = 0.0;
  if (metric.kind == Metric::Kind::periodic_euclidean) {
    const bool broadcast = metric.periods.size() == 1;
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double period = broadcast ? metric.periods[0] : metric.periods[c];
      double delta = std::fmod(std::abs(a[c] - b[c]), period);
      delta = std::min(delta, period - delta);
      sum += delta * delta;
    }
  } else {
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double delta = a[c] - b[c];
      sum += delta * delta;
    }
  }
  return std::sqrt(sum);
}

DistanceMatrix compute_distances(const PointCloud& cloud, const Metric& metric) {
  const PointCloud prepared = prepare(cloud, metric);
  const std::size_t n = prepared.n_points();
  std::vector<double> values(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = metric_distance(prepared.row(i), prepared.row(j), metric);
      if (d == 0.0) throw_tie(i, j);
      values[i * n + j] = d;
      values[j * n + i] = d;
    }
  return DistanceMatrix(n, std::move(values));
}

NeighborData build_neighbor_data(const DistanceMatrix& dm, std::size_t q) {
  return build_from_rows(dm.n_points(), q,
                         [&](std::size_t i, std::vector<double>&) { return dm.row(i); });
}

NeighborData build_neighbor_data(const PointCloud& cloud, const Metric& metric, std::size_t q) {
  const PointCloud prepared = prepare(cloud, metric);
  return build_from_rows(prepared.n_points(), q,
                         [&](std::size_t i, std::vector<double>& buf) -> std::span<const double> {
                           for (std::size_t j = 0; j < buf.size(); ++j)
                             buf[j] = i == j ? 0.0 : metric_distance(prepared.row(i), prepared.row(j), metric);
                           return buf;
                         });
}

std::vector<std::size_t> independent_subset(const NeighborData& nd) {
  if (nd.q < 2) throw std::invalid_argument("independent_subset needs neighbor data with q >= 2");
  const std::size_t n = nd.n_points();
  std::vector<char> used(n, 0);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    const auto nn = nd.neighbors(i);
    if (used[i] || used[nn[0]] || used[nn[1]]) continue;
    used[i] = used[nn[0]] = used[nn[1]] = 1;
    kept.push_back(i);
  }
  return kept;
}

namespace {

template <typename DistFn>
NeighborData restrict_impl(const NeighborData& full, std::span<const std::size_t> subset,
                           std::size_t q, DistFn&& dist) {
  const std::size_t m = subset.size();
  for (std::size_t s : subset)
    if (s >= full.n_points()) throw std::invalid_argument("subset index out of range");
  NeighborData nd = build_from_rows(m, q, [&](std::size_t a, std::vector<double>& buf) -> std::span<const double> {
    for (std::size_t b = 0; b < m; ++b) buf[b] = a == b ? 0.0 : dist(subset[a], subset[b]);
    return buf;
  });
  for (std::size_t a = 0; a < m; ++a) nd.mu[a] = full.mu[subset[a]];
  return nd;
}

}  // namespace

NeighborData restrict_to_subset(const DistanceMatrix& dm, const NeighborData& full,
                                std::span<const std::size_t> subset, std::size_t q) {
  if (dm.n_points() != full.n_points())
    throw std::invalid_argument("distance matrix and neighbor data disagree on point count");
  return restrict_impl(full, subset, q, [&](std::size_t i, std::size_t j) { return dm(i, j); });
}

NeighborData restrict_to_subset(const PointCloud& cloud, const Metric& metric, const NeighborData& full,
                                std::span<const std::size_t> subset, std::size_t q) {
  if (cloud.n_points() != full.n_points())
    throw std::invalid_argument("point cloud and neighbor data disagree on point count");
  const PointCloud prepared = prepare(cloud, metric);
  return restrict_impl(full, subset, q, [&](std::size_t i, std::size_t j) {
    return metric_distance(prepared.row(i), prepared.row(j), metric);
  });
}

}  // namespace hidalgo
