#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hidalgo/model.hpp"
#include "hidalgo/sampler.hpp"

namespace hidalgo {

struct KSelectionReport {
  std::vector<std::size_t> k_values;
  std::vector<double> avg_logpost;
  std::size_t best_k = 1;
  std::vector<FitResult> fits;
};

/// Fits K = 1..k_max with identical seeds and sweep counts and picks the K
/// with the largest average retained log-posterior.
KSelectionReport select_k(const ModelData& data, const HidalgoConfig& base_cfg, std::size_t k_max);
KSelectionReport select_k(const NeighborData& nd, const HidalgoConfig& base_cfg, std::size_t k_max);

/// Mutual information of the two labelings divided by the entropy of `truth`
/// (natural logs, plug-in estimates). Any integer is a label, including
/// kUncertain. Throws std::invalid_argument when truth is constant.
double nmi(std::span<const int> predicted, std::span<const int> truth);

/// Plug-in entropy of a labeling in nats.
double entropy(std::span<const int> labels);

inline constexpr std::size_t kConvergenceWindow = 20;
inline constexpr std::size_t kConvergenceMinPass = 19;

struct ConvergenceSeries {
  /// E_m for m = 1..T-1: fraction of extrema among the first m subsampled points.
  std::vector<double> E;
  /// Half-width z_{alpha/2} / sqrt(m) of the acceptance band around 1/2.
  std::vector<double> bound;
  std::vector<bool> window_pass;
};

struct ConvergenceReport {
  std::size_t theta = 0;
  std::size_t t0 = 0;
  double alpha = 0.05;
  std::vector<ConvergenceSeries> series;
  /// Windows in which every monitored series passes.
  std::vector<bool> windows;
  /// Original-series index at the end of the first all-pass window.
  std::optional<std::size_t> t_conv;

  bool converged() const { return t_conv.has_value(); }
};

struct ConvergenceOptions {
  std::size_t theta = 10;
  std::size_t t0 = 0;
  double alpha = 0.05;
  /// Raise theta through {10, 20, 50, 100, 200, 500} while E_t stays away from 1/2.
  bool escalate_theta = true;
};

/// Cumulative-sum extrema test on one or more traces of equal length.
/// Throws std::invalid_argument when a trace is shorter than t0 + 40 theta.
ConvergenceReport convergence_check(std::span<const std::vector<double>> traces, const ConvergenceOptions& opts);
ConvergenceReport convergence_check(std::span<const double> trace, const ConvergenceOptions& opts);

/// Extract the per-manifold d traces of a chain, one vector per manifold.
std::vector<std::vector<double>> dimension_traces(const ChainTrace& trace);

}  // namespace hidalgo
