#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hidalgo/model.hpp"

namespace hidalgo {

/// Label used in hard assignments for points with max_k pi_ik <= 0.8.
inline constexpr int kUncertain = -1;
inline constexpr double kAssignmentThreshold = 0.8;
inline constexpr double kMinDimension = 1e-3;
inline constexpr double kMaxDimension = 1e3;

/// Per-sweep record of one chain. Samples are stored for every sweep; z_freq
/// only counts retained (post burn-in) sweeps.
struct ChainTrace {
  std::size_t n_points = 0;
  std::size_t K = 0;
  std::size_t n_sweeps = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  std::vector<double> d_samples;  // n_sweeps x K
  std::vector<double> p_samples;  // n_sweeps x K
  std::vector<double> logpost_samples;
  std::vector<std::uint32_t> z_freq;  // n_points x K
  std::size_t flagged_sweeps = 0;

  std::size_t retained() const { return n_sweeps - burn_in; }
  double max_logpost() const;
  double d(std::size_t sweep, std::size_t k) const { return d_samples[sweep * K + k]; }
  double p(std::size_t sweep, std::size_t k) const { return p_samples[sweep * K + k]; }
};

struct FitResult {
  std::size_t K = 0;
  std::size_t n_points = 0;
  std::vector<double> d_mean;
  std::vector<double> d_sd;
  std::vector<double> p_mean;
  std::vector<double> pi;  // n_points x K, rows sum to 1
  std::vector<int> hard_z;  // 0-based label or kUncertain
  double avg_logpost = 0.0;
  std::size_t best_chain = 0;
  double max_logpost = 0.0;
  std::vector<double> chain_max_logpost;
  ChainTrace best_trace;

  double pi_at(std::size_t i, std::size_t k) const { return pi[i * K + k]; }
};

/// Seed of chain `index` derived from a base seed (splitmix64 over a counter).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Gibbs sampler over (d, p, z) for one chain. Keeps a reference to `data`,
/// which must outlive the sampler.
class GibbsSampler {
 public:
  /// Random initial configuration: z uniform, d and p from their priors.
  GibbsSampler(const ModelData& data, const HidalgoConfig& cfg, std::uint64_t seed);
  GibbsSampler(const ModelData& data, const HidalgoConfig& cfg, MixtureState initial, std::uint64_t seed);

  /// d_k ~ Gamma(a + N_k, rate b + V_k), clamped to [kMinDimension, kMaxDimension].
  void sample_d();
  /// p ~ Dirichlet(c + N_1, ..., c + N_K).
  void sample_p();
  /// Unnormalized log full conditional of z_i over k = 0..K-1 (additive
  /// constants shared by all k are dropped).
  void z_log_weights(std::size_t i, std::span<double> out) const;
  /// Draws z_i from its full conditional. Returns false (and keeps the label)
  /// when every weight is -inf.
  bool sample_z(std::size_t i);
  /// One pass of sample_z over all points; returns the number of degenerate draws.
  std::size_t sweep_z();
  /// sample_d, sample_p, then sweep_z. Returns the log-posterior of the result.
  double sweep();

  double log_posterior() const;
  const MixtureState& state() const { return state_; }
  const HidalgoConfig& config() const { return cfg_; }
  const LogZTable& log_z_table() const { return table_; }
  std::mt19937_64& rng() { return rng_; }
  /// Number of sweeps in which at least one z draw was degenerate.
  std::size_t flagged_sweeps() const { return flagged_sweeps_; }

 private:
  void refresh_log_params();

  const ModelData& data_;
  HidalgoConfig cfg_;
  LogZTable table_;
  std::mt19937_64 rng_;
  MixtureState state_;
  std::vector<double> log_p_;
  std::vector<double> log_d_;
  std::vector<std::size_t> scan_order_;
  mutable std::vector<double> same_scratch_;
  std::vector<double> weight_scratch_;
  std::size_t flagged_sweeps_ = 0;
};

ChainTrace run_chain(const ModelData& data, const HidalgoConfig& cfg, std::uint64_t chain_seed);

/// Runs cfg.n_chains chains, keeps the one with the highest maximum
/// log-posterior and summarizes its retained window.
FitResult fit(const ModelData& data, const HidalgoConfig& cfg);
FitResult fit(const NeighborData& nd, const HidalgoConfig& cfg);

/// Posterior summary of a single chain (what fit reports for its best chain).
FitResult summarize(const ChainTrace& trace);

/// kUncertain unless some pi_ik exceeds kAssignmentThreshold.
int hard_label(std::span<const double> pi_row);

}  // namespace hidalgo
