#include "hidalgo/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/distributions/normal.hpp>

namespace hidalgo {

KSelectionReport select_k(const ModelData& data, const HidalgoConfig& base_cfg, std::size_t k_max) {
  if (k_max < 1) throw std::invalid_argument("select_k: k_max must be at least 1");
  KSelectionReport report;
  for (std::size_t K = 1; K <= k_max; ++K) {
    HidalgoConfig cfg = base_cfg;
    cfg.K = K;
    FitResult result = fit(data, cfg);
    report.k_values.push_back(K);
    report.avg_logpost.push_back(result.avg_logpost);
    report.fits.push_back(std::move(result));
  }
  const auto best = std::max_element(report.avg_logpost.begin(), report.avg_logpost.end());
  report.best_k = report.k_values[static_cast<std::size_t>(best - report.avg_logpost.begin())];
  return report;
}

KSelectionReport select_k(const NeighborData& nd, const HidalgoConfig& base_cfg, std::size_t k_max) {
  base_cfg.validate();
  return select_k(ModelData::from(nd, base_cfg.q), base_cfg, k_max);
}

double entropy(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  const auto n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

double nmi(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("nmi: labelings have different lengths (" + std::to_string(predicted.size()) +
                                " vs " + std::to_string(truth.size()) + ")");
  if (truth.empty()) throw std::invalid_argument("nmi: empty labelings");
  const double h_truth = entropy(truth);
  if (h_truth <= 0.0) throw std::invalid_argument("nmi: ground truth labeling is constant (zero entropy)");

  std::map<std::pair<int, int>, std::size_t> joint;
  std::map<int, std::size_t> pa, pb;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++joint[{predicted[i], truth[i]}];
    ++pa[predicted[i]];
    ++pb[truth[i]];
  }
  const auto n = static_cast<double>(truth.size());
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pab = static_cast<double>(c) / n;
    const double a = static_cast<double>(pa[key.first]) / n;
    const double b = static_cast<double>(pb[key.second]) / n;
    mi += pab * std::log(pab / (a * b));
  }
  return std::max(0.0, mi) / h_truth;
}

namespace {

constexpr std::array<std::size_t, 6> kThetaLadder = {10, 20, 50, 100, 200, 500};

ConvergenceSeries analyze(std::span<const double> trace, std::size_t theta, std::size_t t0, double z_crit) {
  const std::size_t T = (trace.size() - t0 - 1) / theta + 1;
  std::vector<double> y(T);
  for (std::size_t m = 0; m < T; ++m) y[m] = trace[t0 + m * theta];
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(T);

  // S_m - S_{m-1} = y_m - mean, so S has an extremum at m exactly when
  // consecutive centered samples change sign.
  ConvergenceSeries out;
  std::size_t extrema = 0;
  for (std::size_t m = 1; m < T; ++m) {
    const double prev = y[m - 1] - mean;
    const double next = y[m] - mean;
    extrema += (prev > 0.0 && next < 0.0) || (prev < 0.0 && next > 0.0);
    out.E.push_back(static_cast<double>(extrema) / static_cast<double>(m));
    out.bound.push_back(z_crit / std::sqrt(static_cast<double>(m)));
  }
  const std::size_t n_windows = out.E.size() / kConvergenceWindow;
  for (std::size_t w = 0; w < n_windows; ++w) {
    std::size_t inside = 0;
    for (std::size_t m = w * kConvergenceWindow; m < (w + 1) * kConvergenceWindow; ++m)
      inside += std::abs(out.E[m] - 0.5) <= out.bound[m];
    out.window_pass.push_back(inside >= kConvergenceMinPass);
  }
  return out;
}

// True when the last complete window of E sits within the binomial standard
// error band around 1/2.
bool approaches_half(const ConvergenceSeries& s, double z_crit) {
  if (s.window_pass.empty()) return false;
  const std::size_t end = s.window_pass.size() * kConvergenceWindow;
  double avg = 0.0;
  for (std::size_t m = end - kConvergenceWindow; m < end; ++m) avg += s.E[m];
  avg /= static_cast<double>(kConvergenceWindow);
  return std::abs(avg - 0.5) <= z_crit * 0.5 / std::sqrt(static_cast<double>(end));
}

ConvergenceReport check_at(std::span<const std::vector<double>> traces, std::size_t theta, std::size_t t0,
                           double alpha, double z_crit) {
  ConvergenceReport report;
  report.theta = theta;
  report.t0 = t0;
  report.alpha = alpha;
  for (const auto& trace : traces) report.series.push_back(analyze(trace, theta, t0, z_crit));
  std::size_t n_windows = report.series.front().window_pass.size();
  for (const auto& s : report.series) n_windows = std::min(n_windows, s.window_pass.size());
  for (std::size_t w = 0; w < n_windows; ++w) {
    bool all = true;
    for (const auto& s : report.series) all = all && s.window_pass[w];
    report.windows.push_back(all);
    if (all && !report.t_conv) report.t_conv = t0 + theta * (w + 1) * kConvergenceWindow;
  }
  return report;
}

}  // namespace

ConvergenceReport convergence_check(std::span<const std::vector<double>> traces, const ConvergenceOptions& opts) {
  if (traces.empty()) throw std::invalid_argument("convergence_check: no traces");
  if (opts.theta < 1) throw std::invalid_argument("convergence_check: theta must be positive");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw std::invalid_argument("convergence_check: alpha must lie in (0, 1)");
  const std::size_t length = traces.front().size();
  for (const auto& t : traces)
    if (t.size() != length) throw std::invalid_argument("convergence_check: traces differ in length");
  auto long_enough = [&](std::size_t theta) { return length >= opts.t0 + 2 * kConvergenceWindow * theta; };
  if (!long_enough(opts.theta))
    throw std::invalid_argument("convergence_check: series of length " + std::to_string(length) +
                                " is too short for t0 = " + std::to_string(opts.t0) +
                                " and theta = " + std::to_string(opts.theta) + " (needs t0 + 40 theta)");

  const double z_crit = boost::math::quantile(boost::math::normal(), 1.0 - opts.alpha / 2.0);
  ConvergenceReport report = check_at(traces, opts.theta, opts.t0, opts.alpha, z_crit);
  if (!opts.escalate_theta) return report;
  for (std::size_t theta : kThetaLadder) {
    const bool settled = std::all_of(report.series.begin(), report.series.end(),
                                     [&](const ConvergenceSeries& s) { return approaches_half(s, z_crit); });
    if (settled) break;
    if (theta <= report.theta || !long_enough(theta)) continue;
    report = check_at(traces, theta, opts.t0, opts.alpha, z_crit);
  }
  return report;
}

ConvergenceReport convergence_check(std::span<const double> trace, const ConvergenceOptions& opts) {
  const std::vector<std::vector<double>> traces{std::vector<double>(trace.begin(), trace.end())};
  return convergence_check(traces, opts);
}

std::vector<std::vector<double>> dimension_traces(const ChainTrace& trace) {
  std::vector<std::vector<double>> out(trace.K, std::vector<double>(trace.n_sweeps));
  for (std::size_t s = 0; s < trace.n_sweeps; ++s)
    for (std::size_t k = 0; k < trace.K; ++k) out[k][s] = trace.d(s, k);
  return out;
}

}  // namespace hidalgo
