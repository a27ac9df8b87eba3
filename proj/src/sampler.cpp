#include "hidalgo/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace hidalgo {
namespace {

double draw_gamma(std::mt19937_64& rng, double shape, double rate) {
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  return gamma(rng);
}

std::vector<double> draw_dirichlet(std::mt19937_64& rng, std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    out[k] = draw_gamma(rng, alpha[k], 1.0);
    total += out[k];
  }
  if (!(total > 0.0)) {
    // Every gamma draw underflowed; fall back to the Dirichlet mean.
    const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t k = 0; k < alpha.size(); ++k) out[k] = alpha[k] / a0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

MixtureState random_state(const ModelData& data, const HidalgoConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> label(0, static_cast<int>(cfg.K) - 1);
  std::vector<int> z(data.n_points());
  for (int& zi : z) zi = label(rng);
  std::vector<double> d(cfg.K);
  for (double& dk : d) dk = std::clamp(draw_gamma(rng, cfg.prior_a, cfg.prior_b), kMinDimension, kMaxDimension);
  const std::vector<double> alpha(cfg.K, cfg.prior_c);
  return MixtureState(std::move(z), std::move(d), draw_dirichlet(rng, alpha), data);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t x = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double ChainTrace::max_logpost() const {
  double best = kNegInf;
  for (double v : logpost_samples)
    if (v > best) best = v;
  return best;
}

GibbsSampler::GibbsSampler(const ModelData& data, const HidalgoConfig& cfg, std::uint64_t seed)
    : data_(data), cfg_(cfg), table_(cfg.xi, cfg.q, data.n_points()), rng_(seed) {
  cfg_.validate();
  if (data.graph.q != cfg.q) throw std::invalid_argument("model data was built for a different q");
  state_ = random_state(data_, cfg_, rng_);
  refresh_log_params();
}

GibbsSampler::GibbsSampler(const ModelData& data, const HidalgoConfig& cfg, MixtureState initial,
                           std::uint64_t seed)
    : data_(data), cfg_(cfg), table_(cfg.xi, cfg.q, data.n_points()), rng_(seed), state_(std::move(initial)) {
  cfg_.validate();
  if (data.graph.q != cfg.q) throw std::invalid_argument("model data was built for a different q");
  if (state_.K() != cfg.K || state_.n_points() != data.n_points())
    throw std::invalid_argument("initial state does not match config or data");
  refresh_log_params();
}

void GibbsSampler::refresh_log_params() {
  const std::size_t K = state_.K();
  log_p_.resize(K);
  log_d_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    log_p_[k] = state_.p()[k] > 0.0 ? std::log(state_.p()[k]) : kNegInf;
    log_d_[k] = std::log(state_.d()[k]);
  }
  same_scratch_.assign(K, 0.0);
  weight_scratch_.assign(K, 0.0);
}

void GibbsSampler::sample_d() {
  // Resum V_k exactly so incremental drift never reaches the conditional.
  state_.recompute(data_);
  for (std::size_t k = 0; k < state_.K(); ++k) {
    const double shape = cfg_.prior_a + static_cast<double>(state_.counts()[k]);
    const double rate = cfg_.prior_b + state_.log_mu_sums()[k];
    state_.d_at(k) = std::clamp(draw_gamma(rng_, shape, rate), kMinDimension, kMaxDimension);
  }
  refresh_log_params();
}

void GibbsSampler::sample_p() {
  std::vector<double> alpha(state_.K());
  for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] = cfg_.prior_c + static_cast<double>(state_.counts()[k]);
  state_.set_p(draw_dirichlet(rng_, alpha));
  refresh_log_params();
}

void GibbsSampler::z_log_weights(std::size_t i, std::span<double> out) const {
  const std::size_t K = state_.K();
  const auto& z = state_.z();
  const int current = z[i];
  std::fill(same_scratch_.begin(), same_scratch_.end(), 0.0);
  // Pairs (i, j) from i's own row and (j, i) from rows that list i.
  for (std::size_t j : data_.graph.neighbors(i)) same_scratch_[static_cast<std::size_t>(z[j])] += 1.0;
  for (std::size_t j : data_.graph.rev[i]) same_scratch_[static_cast<std::size_t>(z[j])] += 1.0;

  const double log_ratio = std::log(cfg_.xi) - std::log1p(-cfg_.xi);
  const double log_mu = data_.log_mu[i];
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t others = state_.counts()[k] - (static_cast<int>(k) == current ? 1 : 0);
    const double z_term = table_.weighted(others + 1) - table_.weighted(others);
    out[k] = log_p_[k] + log_d_[k] - (state_.d()[k] + 1.0) * log_mu + same_scratch_[k] * log_ratio - z_term;
  }
}

bool GibbsSampler::sample_z(std::size_t i) {
  const std::size_t K = state_.K();
  if (K == 1) return true;
  std::span<double> w(weight_scratch_);
  z_log_weights(i, w);
  double top = kNegInf;
  for (double v : w) top = std::max(top, v);
  if (top == kNegInf || std::isnan(top)) return false;
  double total = 0.0;
  for (double& v : w) {
    v = std::exp(v - top);
    total += v;
  }
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng_);
  double acc = 0.0;
  std::size_t pick = K - 1;
  for (std::size_t k = 0; k < K; ++k) {
    acc += w[k];
    if (u < acc) {
      pick = k;
      break;
    }
  }
  // Guard against rounding pushing u past the last positive weight.
  while (w[pick] == 0.0 && pick > 0) --pick;
  state_.assign(i, static_cast<int>(pick), data_);
  return true;
}

std::size_t GibbsSampler::sweep_z() {
  const std::size_t n = state_.n_points();
  std::size_t degenerate = 0;
  if (cfg_.random_scan) {
    if (scan_order_.size() != n) {
      scan_order_.resize(n);
      std::iota(scan_order_.begin(), scan_order_.end(), std::size_t{0});
    }
    std::shuffle(scan_order_.begin(), scan_order_.end(), rng_);
    for (std::size_t i : scan_order_) degenerate += !sample_z(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) degenerate += !sample_z(i);
  }
  if (degenerate > 0) ++flagged_sweeps_;
  return degenerate;
}

double GibbsSampler::sweep() {
  sample_d();
  sample_p();
  sweep_z();
  return log_posterior();
}

double GibbsSampler::log_posterior() const { return hidalgo::log_posterior(state_, table_, cfg_); }

ChainTrace run_chain(const ModelData& data, const HidalgoConfig& cfg, std::uint64_t chain_seed) {
  cfg.validate();
  GibbsSampler sampler(data, cfg, chain_seed);
  ChainTrace trace;
  trace.n_points = data.n_points();
  trace.K = cfg.K;
  trace.n_sweeps = cfg.n_sweeps;
  trace.burn_in = cfg.burn_in_sweeps();
  trace.seed = chain_seed;
  trace.d_samples.reserve(cfg.n_sweeps * cfg.K);
  trace.p_samples.reserve(cfg.n_sweeps * cfg.K);
  trace.logpost_samples.reserve(cfg.n_sweeps);
  trace.z_freq.assign(trace.n_points * cfg.K, 0);

  for (std::size_t s = 0; s < cfg.n_sweeps; ++s) {
    const double lp = sampler.sweep();
    const MixtureState& st = sampler.state();
    trace.d_samples.insert(trace.d_samples.end(), st.d().begin(), st.d().end());
    trace.p_samples.insert(trace.p_samples.end(), st.p().begin(), st.p().end());
    trace.logpost_samples.push_back(lp);
    if (s >= trace.burn_in)
      for (std::size_t i = 0; i < trace.n_points; ++i)
        ++trace.z_freq[i * cfg.K + static_cast<std::size_t>(st.z()[i])];
  }
  trace.flagged_sweeps = sampler.flagged_sweeps();
  return trace;
}

int hard_label(std::span<const double> pi_row) {
  for (std::size_t k = 0; k < pi_row.size(); ++k)
    if (pi_row[k] > kAssignmentThreshold) return static_cast<int>(k);
  return kUncertain;
}

FitResult summarize(const ChainTrace& trace) {
  FitResult r;
  r.K = trace.K;
  r.n_points = trace.n_points;
  const std::size_t kept = trace.retained();
  const auto n_kept = static_cast<double>(kept);
  r.d_mean.assign(trace.K, 0.0);
  r.d_sd.assign(trace.K, 0.0);
  r.p_mean.assign(trace.K, 0.0);
  double lp_sum = 0.0;
  for (std::size_t s = trace.burn_in; s < trace.n_sweeps; ++s) {
    for (std::size_t k = 0; k < trace.K; ++k) {
      r.d_mean[k] += trace.d(s, k);
      r.p_mean[k] += trace.p(s, k);
    }
    lp_sum += trace.logpost_samples[s];
  }
  for (std::size_t k = 0; k < trace.K; ++k) {
    r.d_mean[k] /= n_kept;
    r.p_mean[k] /= n_kept;
  }
  if (kept > 1) {
    for (std::size_t s = trace.burn_in; s < trace.n_sweeps; ++s)
      for (std::size_t k = 0; k < trace.K; ++k) {
        const double delta = trace.d(s, k) - r.d_mean[k];
        r.d_sd[k] += delta * delta;
      }
    for (double& v : r.d_sd) v = std::sqrt(v / (n_kept - 1.0));
  }
  r.avg_logpost = lp_sum / n_kept;
  r.max_logpost = trace.max_logpost();
  r.chain_max_logpost = {r.max_logpost};

  r.pi.resize(trace.n_points * trace.K);
  r.hard_z.resize(trace.n_points);
  for (std::size_t i = 0; i < trace.n_points; ++i) {
    for (std::size_t k = 0; k < trace.K; ++k)
      r.pi[i * trace.K + k] = static_cast<double>(trace.z_freq[i * trace.K + k]) / n_kept;
    r.hard_z[i] = hard_label({r.pi.data() + i * trace.K, trace.K});
  }
  r.best_trace = trace;
  return r;
}

FitResult fit(const ModelData& data, const HidalgoConfig& cfg) {
  cfg.validate();
  const std::size_t M = cfg.n_chains;
  std::vector<ChainTrace> traces(M);
  std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  workers = std::min(workers, M);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t c = next++; c < M; c = next++) {
      try {
        traces[c] = run_chain(data, cfg, derive_seed(cfg.seed, c));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> maxima(M);
  std::size_t best = 0;
  for (std::size_t c = 0; c < M; ++c) {
    maxima[c] = traces[c].max_logpost();
    if (maxima[c] > maxima[best]) best = c;
  }
  FitResult r = summarize(traces[best]);
  r.best_chain = best;
  r.chain_max_logpost = std::move(maxima);
  return r;
}

FitResult fit(const NeighborData& nd, const HidalgoConfig& cfg) {
  cfg.validate();
  return fit(ModelData::from(nd, cfg.q), cfg);
}

}  // namespace hidalgo
