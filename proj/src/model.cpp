#include "hidalgo/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace hidalgo {
namespace {

// log C(n, k) for small k as a sum of k log-ratios, which stays accurate for
// large n where lgamma differences lose digits.
double log_binomial_small_k(std::size_t n, std::size_t k) {
  if (k > n) return kNegInf;
  k = std::min(k, n - k);
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    acc += std::log(static_cast<double>(n - i) / static_cast<double>(i + 1));
  return acc;
}

// Z summed in 50-digit arithmetic. Used when log Z is close to zero, where
// the double log-sum-exp cancels and loses its relative accuracy.
double log_z_extended(double xi, std::size_t q, std::size_t n_b, std::size_t n_other, std::size_t lo, std::size_t hi) {
  using big = boost::multiprecision::cpp_bin_float_50;
  auto binomial = [](std::size_t n, std::size_t k) {
    big r = 1;
    for (std::size_t j = 1; j <= k; ++j) r = r * big(n - k + j) / big(j);
    return r;
  };
  const big x = xi, not_x = big(1) - big(xi);
  big z = 0;
  for (std::size_t k = lo; k <= hi; ++k)
    z += binomial(n_b, k) * binomial(n_other, q - k) * pow(x, static_cast<unsigned>(k)) *
         pow(not_x, static_cast<unsigned>(q - k));
  return static_cast<double>(log(z));
}

// x * log(y) with the convention 0 * log(0) = 0.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace

void HidalgoConfig::validate() const {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (q < 1) throw std::invalid_argument("q must be at least 1");
  if (!(xi >= 0.5 && xi < 1.0)) throw std::invalid_argument("xi must lie in [0.5, 1), got " + std::to_string(xi));
  if (!(prior_a > 0.0) || !(prior_b > 0.0) || !(prior_c > 0.0))
    throw std::invalid_argument("prior parameters a, b, c must be positive");
  if (n_sweeps < 1) throw std::invalid_argument("n_sweeps must be at least 1");
  if (n_chains < 1) throw std::invalid_argument("n_chains must be at least 1");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
    throw std::invalid_argument("burn_in_fraction must lie in [0, 1)");
  if (retained_sweeps() < 1) throw std::invalid_argument("burn-in leaves no retained sweep");
}

std::size_t HidalgoConfig::burn_in_sweeps() const {
  // The epsilon keeps 0.9 * 10 from rounding down to 8.
  const auto burn = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(n_sweeps) + 1e-9));
  return std::min(burn, n_sweeps);
}

double log_z(double xi, std::size_t q, std::size_t n_same, std::size_t n_other) {
  if (n_same < 1) throw std::invalid_argument("log_z: n_same counts the owner and must be >= 1");
  if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("log_z: xi must lie in (0, 1)");
  const std::size_t n_b = n_same - 1;
  const std::size_t lo = q > n_other ? q - n_other : 0;
  const std::size_t hi = std::min(q, n_b);
  if (lo > hi) return kNegInf;

  const double log_xi = std::log(xi);
  const double log_not_xi = std::log1p(-xi);
  std::vector<double> terms;
  terms.reserve(hi - lo + 1);
  double top = kNegInf;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double t = log_binomial_small_k(n_b, k) + log_binomial_small_k(n_other, q - k) +
                     static_cast<double>(k) * log_xi + static_cast<double>(q - k) * log_not_xi;
    terms.push_back(t);
    top = std::max(top, t);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  const double value = top + std::log(sum);
  if (std::abs(value) < 0.75) return log_z_extended(xi, q, n_b, n_other, lo, hi);
  return value;
}

LogZTable::LogZTable(double xi, std::size_t q, std::size_t n_total)
    : xi_(xi), q_(q), n_total_(n_total), log_z_(n_total + 1, kNegInf) {
  for (std::size_t n = 1; n <= n_total; ++n) log_z_[n] = hidalgo::log_z(xi, q, n, n_total - n);
}

HomogeneityGraph HomogeneityGraph::from(const NeighborData& nd, std::size_t q) {
  if (q < 1 || q > nd.q)
    throw std::invalid_argument("homogeneity range q = " + std::to_string(q) +
                                " needs neighbor data built with at least q neighbors (have " +
                                std::to_string(nd.q) + ")");
  HomogeneityGraph g;
  g.q = q;
  const std::size_t n = nd.n_points();
  g.nn.resize(n * q);
  g.rev.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = nd.neighbors(i);
    for (std::size_t k = 0; k < q; ++k) {
      g.nn[i * q + k] = row[k];
      g.rev[row[k]].push_back(i);
    }
  }
  return g;
}

ModelData ModelData::from(const NeighborData& nd, std::size_t q) {
  ModelData data;
  data.log_mu.reserve(nd.n_points());
  for (double m : nd.mu) data.log_mu.push_back(std::log(m));
  data.graph = HomogeneityGraph::from(nd, q);
  return data;
}

MixtureState::MixtureState(std::vector<int> z, std::vector<double> d, std::vector<double> p,
                           const ModelData& data)
    : z_(std::move(z)), d_(std::move(d)), p_(std::move(p)) {
  if (d_.empty() || d_.size() != p_.size())
    throw std::invalid_argument("MixtureState: d and p must be non-empty and of equal length");
  if (z_.size() != data.n_points()) throw std::invalid_argument("MixtureState: label count does not match data");
  for (int label : z_)
    if (label < 0 || static_cast<std::size_t>(label) >= d_.size())
      throw std::invalid_argument("MixtureState: label out of range");
  recompute(data);
}

void MixtureState::set_d(std::vector<double> d) {
  if (d.size() != d_.size()) throw std::invalid_argument("set_d: wrong number of components");
  d_ = std::move(d);
}

void MixtureState::set_p(std::vector<double> p) {
  if (p.size() != p_.size()) throw std::invalid_argument("set_p: wrong number of components");
  p_ = std::move(p);
}

void MixtureState::recompute(const ModelData& data) {
  const std::size_t K = d_.size();
  counts_.assign(K, 0);
  log_mu_sums_.assign(K, 0.0);
  n_in_.assign(z_.size(), 0);
  n_in_by_manifold_.assign(K, 0);
  for (std::size_t i = 0; i < z_.size(); ++i) {
    const auto k = static_cast<std::size_t>(z_[i]);
    ++counts_[k];
    log_mu_sums_[k] += data.log_mu[i];
    std::size_t same = 0;
    for (std::size_t j : data.graph.neighbors(i)) same += z_[j] == z_[i];
    n_in_[i] = same;
    n_in_by_manifold_[k] += same;
  }
}

void MixtureState::assign(std::size_t i, int k, const ModelData& data) {
  const int old = z_[i];
  if (old == k) return;
  const auto ko = static_cast<std::size_t>(old);
  const auto kn = static_cast<std::size_t>(k);
  --counts_[ko];
  ++counts_[kn];
  log_mu_sums_[ko] -= data.log_mu[i];
  log_mu_sums_[kn] += data.log_mu[i];

  n_in_by_manifold_[ko] -= n_in_[i];
  for (std::size_t j : data.graph.rev[i]) {
    if (z_[j] == old) {
      --n_in_[j];
      --n_in_by_manifold_[ko];
    } else if (z_[j] == k) {
      ++n_in_[j];
      ++n_in_by_manifold_[kn];
    }
  }
  z_[i] = k;
  std::size_t same = 0;
  for (std::size_t j : data.graph.neighbors(i)) same += z_[j] == k;
  n_in_[i] = same;
  n_in_by_manifold_[kn] += same;
}

bool MixtureState::caches_consistent(const ModelData& data, double tol) const {
  MixtureState fresh = *this;
  fresh.recompute(data);
  if (fresh.counts_ != counts_ || fresh.n_in_ != n_in_ || fresh.n_in_by_manifold_ != n_in_by_manifold_)
    return false;
  for (std::size_t k = 0; k < log_mu_sums_.size(); ++k)
    if (std::abs(fresh.log_mu_sums_[k] - log_mu_sums_[k]) > tol * std::max(1.0, std::abs(fresh.log_mu_sums_[k])))
      return false;
  return true;
}

double log_mixture_likelihood(const MixtureState& state) {
  double acc = 0.0;
  for (std::size_t k = 0; k < state.K(); ++k) {
    const double n_k = static_cast<double>(state.counts()[k]);
    acc += xlogy(n_k, state.d()[k]) - (state.d()[k] + 1.0) * state.log_mu_sums()[k];
  }
  return acc;
}

double log_neighborhood_likelihood(const MixtureState& state, const LogZTable& table) {
  if (table.n_total() != state.n_points())
    throw std::invalid_argument("log-Z table was built for a different number of points");
  const double log_xi = std::log(table.xi());
  const double log_not_xi = std::log1p(-table.xi());
  const auto q = static_cast<double>(table.q());
  double acc = 0.0;
  for (std::size_t k = 0; k < state.K(); ++k) {
    const std::size_t n_k = state.counts()[k];
    if (n_k == 0) continue;
    const auto inside = static_cast<double>(state.n_in_by_manifold()[k]);
    const double z_term = table.weighted(n_k);
    if (z_term == kNegInf || std::isinf(z_term)) return kNegInf;
    acc += inside * log_xi + (q * static_cast<double>(n_k) - inside) * log_not_xi - z_term;
  }
  return acc;
}

double log_neighborhood_likelihood(const MixtureState& state, const NeighborData& nd, const HidalgoConfig& cfg) {
  return log_neighborhood_likelihood(state, LogZTable(cfg.xi, cfg.q, nd.n_points()));
}

double log_prior(const MixtureState& state, const HidalgoConfig& cfg, PriorNormalization norm) {
  const auto K = static_cast<double>(state.K());
  double acc = 0.0;
  for (std::size_t k = 0; k < state.K(); ++k) {
    const double d = state.d()[k];
    acc += xlogy(cfg.prior_a - 1.0, d) - cfg.prior_b * d;
    acc += xlogy(cfg.prior_c - 1.0, state.p()[k]);
    acc += xlogy(static_cast<double>(state.counts()[k]), state.p()[k]);
  }
  if (norm == PriorNormalization::included) {
    acc += K * (cfg.prior_a * std::log(cfg.prior_b) - std::lgamma(cfg.prior_a));
    acc += std::lgamma(K * cfg.prior_c) - K * std::lgamma(cfg.prior_c);
  }
  return acc;
}

double log_posterior(const MixtureState& state, const LogZTable& table, const HidalgoConfig& cfg,
                     PriorNormalization norm) {
  const double neighborhood = log_neighborhood_likelihood(state, table);
  if (neighborhood == kNegInf) return kNegInf;
  return log_mixture_likelihood(state) + neighborhood + log_prior(state, cfg, norm);
}

double log_posterior(const MixtureState& state, const NeighborData& nd, const HidalgoConfig& cfg,
                     PriorNormalization norm) {
  return log_posterior(state, LogZTable(cfg.xi, cfg.q, nd.n_points()), cfg, norm);
}

}  // namespace hidalgo
