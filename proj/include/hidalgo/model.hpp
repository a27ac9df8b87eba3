#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hidalgo/geometry.hpp"

namespace hidalgo {

struct HidalgoConfig {
  std::size_t K = 1;
  /// Homogeneity range: number of neighbors entering the neighborhood term.
  std::size_t q = 3;
  double xi = 0.8;
  double prior_a = 1.0;
  double prior_b = 1.0;
  double prior_c = 1.0;
  std::size_t n_sweeps = 10000;
  std::size_t n_chains = 1;
  double burn_in_fraction = 0.9;
  std::uint64_t seed = 0;
  /// Random-scan Gibbs instead of the default systematic 0..N-1 order.
  bool random_scan = false;
  /// Worker threads for running chains; 0 means hardware concurrency.
  std::size_t threads = 0;

  /// Throws std::invalid_argument on any out-of-range field.
  void validate() const;
  std::size_t burn_in_sweeps() const;
  std::size_t retained_sweeps() const { return n_sweeps - burn_in_sweeps(); }
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log of the neighborhood partition function
///   Z = sum_{n_b} C(n_same - 1, n_b) C(n_other, q - n_b) xi^n_b (1 - xi)^(q - n_b)
/// where n_same counts the owner's manifold including the owner. Returns
/// kNegInf when the range of n_b is empty.
double log_z(double xi, std::size_t q, std::size_t n_same, std::size_t n_other);

/// log Z for every manifold size 1..n_total at fixed (xi, q, n_total).
class LogZTable {
 public:
  LogZTable(double xi, std::size_t q, std::size_t n_total);

  double xi() const { return xi_; }
  std::size_t q() const { return q_; }
  std::size_t n_total() const { return n_total_; }
  /// log Z(xi, n_k) for a manifold holding n_k points (1 <= n_k <= n_total).
  double log_z(std::size_t n_k) const { return log_z_[n_k]; }
  /// n_k * log Z(xi, n_k); zero for an empty manifold.
  double weighted(std::size_t n_k) const { return n_k == 0 ? 0.0 : static_cast<double>(n_k) * log_z_[n_k]; }

 private:
  double xi_;
  std::size_t q_;
  std::size_t n_total_;
  std::vector<double> log_z_;
};

/// The first q neighbors of each point (q may be smaller than NeighborData::q)
/// together with the matching reverse lists.
struct HomogeneityGraph {
  std::size_t q = 0;
  std::vector<std::size_t> nn;
  std::vector<std::vector<std::size_t>> rev;

  static HomogeneityGraph from(const NeighborData& nd, std::size_t q);
  std::size_t n_points() const { return rev.size(); }
  std::span<const std::size_t> neighbors(std::size_t i) const { return {nn.data() + i * q, q}; }
};

/// Everything the posterior reads from geometry, in sampler-friendly form.
struct ModelData {
  std::vector<double> log_mu;
  HomogeneityGraph graph;

  static ModelData from(const NeighborData& nd, std::size_t q);
  std::size_t n_points() const { return log_mu.size(); }
};

/// Gibbs state (z, d, p) with cached sufficient statistics. Labels are 0-based.
class MixtureState {
 public:
  MixtureState() = default;
  MixtureState(std::vector<int> z, std::vector<double> d, std::vector<double> p, const ModelData& data);

  std::size_t K() const { return d_.size(); }
  std::size_t n_points() const { return z_.size(); }

  const std::vector<int>& z() const { return z_; }
  const std::vector<double>& d() const { return d_; }
  const std::vector<double>& p() const { return p_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  const std::vector<double>& log_mu_sums() const { return log_mu_sums_; }
  const std::vector<std::size_t>& n_in() const { return n_in_; }
  const std::vector<std::size_t>& n_in_by_manifold() const { return n_in_by_manifold_; }

  void set_d(std::vector<double> d);
  void set_p(std::vector<double> p);
  double& d_at(std::size_t k) { return d_[k]; }
  double& p_at(std::size_t k) { return p_[k]; }

  /// Moves point i to manifold k, updating every cache incrementally.
  void assign(std::size_t i, int k, const ModelData& data);
  /// Rebuilds all caches from z.
  void recompute(const ModelData& data);
  /// True when the caches equal a from-scratch recomputation.
  bool caches_consistent(const ModelData& data, double tol = 1e-12) const;

 private:
  std::vector<int> z_;
  std::vector<double> d_;
  std::vector<double> p_;
  std::vector<std::size_t> counts_;
  std::vector<double> log_mu_sums_;
  std::vector<std::size_t> n_in_;
  std::vector<std::size_t> n_in_by_manifold_;
};

/// sum_k [N_k log d_k - (d_k + 1) V_k]
double log_mixture_likelihood(const MixtureState& state);

/// sum_k [n_k_in log xi + (q N_k - n_k_in) log(1 - xi) - N_k log Z(xi, N_k)]
double log_neighborhood_likelihood(const MixtureState& state, const LogZTable& table);
double log_neighborhood_likelihood(const MixtureState& state, const NeighborData& nd,
                                   const HidalgoConfig& cfg);

enum class PriorNormalization { omitted, included };

/// Gamma priors on d, Dirichlet prior on p and the categorical prior on z.
double log_prior(const MixtureState& state, const HidalgoConfig& cfg, PriorNormalization norm);

/// Joint log-posterior up to the evidence. With PriorNormalization::included
/// (the default) the Gamma and Dirichlet normalizers are part of the value, so
/// it is comparable across K.
double log_posterior(const MixtureState& state, const LogZTable& table, const HidalgoConfig& cfg,
                     PriorNormalization norm = PriorNormalization::included);
double log_posterior(const MixtureState& state, const NeighborData& nd, const HidalgoConfig& cfg,
                     PriorNormalization norm = PriorNormalization::included);

}  // namespace hidalgo
