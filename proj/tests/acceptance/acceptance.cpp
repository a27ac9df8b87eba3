// Acceptance harness: one PASS/FAIL line per headline criterion.
//
// Each check reports its measured values and wall time. Tolerances and time
// limits are fixed below; nothing is retried or reseeded on failure.
// Usage: hidalgo_acceptance [name-substring ...]   (no argument runs all)

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hidalgo/evaluation.hpp"
#include "hidalgo/geometry.hpp"
#include "hidalgo/model.hpp"
#include "hidalgo/sampler.hpp"
#include "hidalgo/synth.hpp"
#include "hidalgo/twonn.hpp"

using namespace hidalgo;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- partition function

big big_binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  big r = 1;
  for (std::size_t j = 1; j <= k; ++j) r = r * big(n - k + j) / big(j);
  return r;
}

double enumerated_z(double xi, std::size_t q, std::size_t n_same, std::size_t n_other) {
  const std::size_t n = n_same - 1 + n_other;
  big z = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != q) continue;
    const auto same = static_cast<unsigned>(std::popcount(mask & ((1u << (n_same - 1)) - 1)));
    z += boost::multiprecision::pow(big(xi), same) * boost::multiprecision::pow(big(1) - big(xi), unsigned(q - same));
  }
  return static_cast<double>(log(z));
}

double finite_sum_z(double xi, std::size_t q, std::size_t n_same, std::size_t n_other) {
  big z = 0;
  for (std::size_t nb = 0; nb <= q; ++nb)
    z += big_binomial(n_same - 1, nb) * big_binomial(n_other, q - nb) * boost::multiprecision::pow(big(xi), unsigned(nb)) *
         boost::multiprecision::pow(big(1) - big(xi), unsigned(q - nb));
  return static_cast<double>(log(z));
}

// Relative error; an exact zero (Z = 1) is compared on the absolute scale.
double rel_err(double got, double want) {
  return want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
}

Outcome partition_function() {
  double worst_enum = 0.0, worst_grid = 0.0;
  std::size_t n_enum = 0;
  for (double xi : {0.5, 0.7, 0.8, 0.9, 0.99})
    for (std::size_t q = 1; q <= 4; ++q)
      for (std::size_t n = q + 1; n <= 12; ++n)
        for (std::size_t s = 1; s <= n; ++s) {
          worst_enum = std::max(worst_enum, rel_err(log_z(xi, q, s, n - s), enumerated_z(xi, q, s, n - s)));
          ++n_enum;
        }
  std::mt19937_64 rng(2024);
  for (int g = 0; g < 500; ++g) {
    const std::size_t q = 1 + std::uniform_int_distribution<std::size_t>(0, 9)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(q + 1, 10000)(rng);
    const std::size_t s = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    const double xi = std::uniform_real_distribution<double>(0.5, 0.999)(rng);
    worst_grid = std::max(worst_grid, rel_err(log_z(xi, q, s, n - s), finite_sum_z(xi, q, s, n - s)));
  }
  return {worst_enum <= 1e-12 && worst_grid <= 1e-12,
          fmt("enumeration: %zu cases, max rel err %.2e; grid: 500 points, max rel err %.2e (tol 1e-12)", n_enum,
              worst_enum, worst_grid)};
}

// ---------------------------------------------------------------- Gibbs exactness

Outcome gibbs_exactness() {
  const std::size_t n = 8, q = 2;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  std::vector<double> x(n * 3);
  for (double& v : x) v = normal(rng);
  const auto nd = build_neighbor_data(PointCloud(n, 3, x), Metric::euclidean(), q);
  const auto data = ModelData::from(nd, q);
  HidalgoConfig cfg;
  cfg.K = 2;
  cfg.q = q;
  cfg.xi = 0.8;
  const std::vector<double> d{2.0, 5.0}, p{0.4, 0.6};

  // Exact posterior over all 2^8 labelings, each point scored directly.
  std::vector<double> exact(1u << n);
  for (std::uint32_t m = 0; m < exact.size(); ++m) {
    std::size_t nk[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) ++nk[(m >> i) & 1];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned zi = (m >> i) & 1;
      s += std::log(p[zi]) + std::log(d[zi]) - (d[zi] + 1.0) * std::log(nd.mu[i]);
      std::size_t same = 0;
      for (std::size_t r = 0; r < q; ++r) same += ((m >> nd.neighbors(i)[r]) & 1) == zi;
      s += same * std::log(cfg.xi) + (q - same) * std::log(1.0 - cfg.xi);
      s -= enumerated_z(cfg.xi, q, nk[zi], n - nk[zi]);
    }
    exact[m] = s;
  }
  const double top = *std::max_element(exact.begin(), exact.end());
  double total = 0.0;
  for (double& v : exact) total += (v = std::exp(v - top));
  for (double& v : exact) v /= total;

  GibbsSampler sampler(data, cfg, MixtureState(std::vector<int>(n, 0), d, p, data), 17);
  const std::size_t sweeps = 100000;
  std::vector<double> freq(exact.size(), 0.0);
  for (std::size_t t = 0; t < sweeps; ++t) {
    sampler.sweep_z();
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < n; ++i) m |= static_cast<std::uint32_t>(sampler.state().z()[i]) << i;
    freq[m] += 1.0;
  }
  double tv = 0.0;
  for (std::size_t m = 0; m < exact.size(); ++m) tv += std::abs(freq[m] / sweeps - exact[m]);
  tv *= 0.5;
  return {tv <= 0.05, fmt("TV(joint over 256 labelings) = %.4f after %zu sweeps (tol 0.05)", tv, sweeps)};
}

// ---------------------------------------------------------------- benchmarks

HidalgoConfig bench_config(std::size_t K, double xi, std::uint64_t seed) {
  HidalgoConfig cfg;
  cfg.K = K;
  cfg.q = 3;
  cfg.xi = xi;
  cfg.n_sweeps = 20000;
  cfg.n_chains = 5;
  cfg.seed = seed;
  return cfg;
}

// Estimated dimensions matched to the truth by sorting both.
std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool dims_within(const std::vector<double>& est, std::vector<double> truth, double rel) {
  const auto e = sorted(est);
  truth = sorted(truth);
  if (e.size() != truth.size()) return false;
  for (std::size_t k = 0; k < e.size(); ++k)
    if (std::abs(e[k] - truth[k]) > rel * truth[k]) return false;
  return true;
}

std::string dims_str(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t k = 0; k < v.size(); ++k) s += fmt(k ? ", %.2f" : "%.2f", v[k]);
  return s + ")";
}

Outcome two_gaussian() {
  const auto lc = generate(two_gauss_preset(500, 9, 4), 1);
  const auto nd = build_neighbor_data(lc.cloud, Metric::euclidean(), 3);
  const auto r = fit(nd, bench_config(2, 0.8, 1));
  const double score = nmi(r.hard_z, lc.labels);
  bool pass = dims_within(r.d_mean, {9.0, 4.0}, 0.15) && score >= 0.85;
  std::string detail = fmt("d=%s NMI=%.3f (need dims +-15%%, NMI>=0.85); sweep d1:", dims_str(sorted(r.d_mean)).c_str(), score);
  for (std::size_t d1 = 5; d1 <= 9; ++d1) {
    double s1 = score;
    if (d1 != 9) {
      const auto lc1 = generate(two_gauss_preset(500, d1, 4), 1);
      const auto r1 = fit(build_neighbor_data(lc1.cloud, Metric::euclidean(), 3), bench_config(2, 0.8, 1));
      s1 = nmi(r1.hard_z, lc1.labels);
    }
    pass = pass && s1 >= 0.8;
    detail += fmt(" %zu:%.3f", d1, s1);
  }
  return {pass, detail + " (need >=0.8 each)"};
}

Outcome xi_half_control() {
  const auto lc = generate(two_gauss_preset(500, 9, 4), 1);
  const auto r = fit(build_neighbor_data(lc.cloud, Metric::euclidean(), 3), bench_config(2, 0.5, 1));
  const double score = nmi(r.hard_z, lc.labels);
  return {score < 0.1, fmt("xi=0.5: NMI=%.4f d=%s (need NMI<0.1)", score, dims_str(sorted(r.d_mean)).c_str())};
}

Outcome five_manifolds(const char* preset, double nmi_min, double dim_tol) {
  const auto lc = generate(named_preset(preset, 500), 1);
  const auto nd = build_neighbor_data(lc.cloud, Metric::euclidean(), 3);
  const auto rep = select_k(nd, bench_config(1, 0.8, 1), 6);
  const auto& f = rep.fits[4];
  const double score = nmi(f.hard_z, lc.labels);
  std::string curve;
  for (std::size_t j = 0; j < rep.k_values.size(); ++j) curve += fmt(" K%zu:%.1f", rep.k_values[j], rep.avg_logpost[j]);
  bool pass = rep.best_k == 5 && score >= nmi_min;
  std::string detail = fmt("best_k=%zu; K=5: d=%s NMI=%.3f; L:%s", rep.best_k, dims_str(sorted(f.d_mean)).c_str(), score,
                           curve.c_str());
  if (dim_tol > 0.0) {
    pass = pass && dims_within(f.d_mean, {1, 2, 4, 5, 9}, dim_tol);
    detail += fmt(" (need best_k=5, dims +-%.0f%%, NMI>=%.2f)", 100 * dim_tol, nmi_min);
  } else {
    detail += fmt(" (need best_k=5, NMI>=%.2f)", nmi_min);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- TWO-NN

Outcome twonn_coverage() {
  bool pass = true;
  std::string detail;
  for (double d : {1.0, 4.0, 9.0}) {
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::vector<double> mu(10000);
      for (double& m : mu) m = pareto_quantile(d, unif(rng));
      const auto est = twonn_fit(mu);
      const double se = est.d_mle / std::sqrt(static_cast<double>(mu.size()));
      covered += std::abs(est.d_mle - d) <= 3.0 * se;
    }
    pass = pass && covered >= 95;
    detail += fmt("d=%g: %d/100 within 3 SE; ", d, covered);
  }
  return {pass, detail + "(need >=95 each)"};
}

// ---------------------------------------------------------------- convergence

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome convergence_diagnostic() {
  const double alpha = 0.05;
  const int seeds = 200;
  int iid_pass = 0;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(derive_seed(77, s));
    std::normal_distribution<double> normal;
    std::vector<double> x(2000);
    for (double& v : x) v = normal(rng);
    ConvergenceOptions opts;
    opts.theta = 1;
    opts.alpha = alpha;
    opts.escalate_theta = false;
    iid_pass += convergence_check(x, opts).converged();
  }
  const double floor_rate = (1.0 - alpha) - 3.0 * std::sqrt(alpha * (1.0 - alpha) / seeds);
  const double rate = static_cast<double>(iid_pass) / seeds;

  bool ramp_ever = false;
  for (std::size_t len : {400u, 4000u, 40000u}) {
    std::vector<double> ramp(len);
    for (std::size_t i = 0; i < len; ++i) ramp[i] = static_cast<double>(i);
    ConvergenceOptions opts;
    opts.theta = 10;
    ramp_ever = ramp_ever || convergence_check(ramp, opts).converged();
  }

  // M = 20 chains per size; runs that never converge count as the full run length.
  std::vector<double> sizes, tconv;
  std::string tc;
  for (std::size_t e = 6; e <= 12; ++e) {
    const std::size_t n_total = std::size_t{1} << e;
    std::vector<double> per_seed;
    int unconverged = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto lc = generate(two_gauss_preset(n_total / 2, 9, 4), seed);
      const auto data = ModelData::from(build_neighbor_data(lc.cloud, Metric::euclidean(), 3), 3);
      HidalgoConfig cfg = bench_config(2, 0.8, seed);
      cfg.n_sweeps = 20000;
      const auto trace = run_chain(data, cfg, derive_seed(seed, 0));
      const auto rep = convergence_check(dimension_traces(trace), ConvergenceOptions{});
      unconverged += !rep.converged();
      per_seed.push_back(rep.t_conv ? static_cast<double>(*rep.t_conv) : static_cast<double>(cfg.n_sweeps));
    }
    const double mean = std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / static_cast<double>(per_seed.size());
    std::sort(per_seed.begin(), per_seed.end());
    const double median = 0.5 * (per_seed[9] + per_seed[10]);
    sizes.push_back(static_cast<double>(n_total));
    tconv.push_back(mean);
    tc += fmt(" %zu:%.0f/%.0f/%d", n_total, mean, median, unconverged);
  }
  const double rho = spearman(sizes, tconv);
  const bool pass = rate >= floor_rate && !ramp_ever && rho > 0.9;
  return {pass, fmt("iid pass rate %.3f (need >= %.3f); ramp converged: %s; T_conv by N (mean/median/unconverged of 20):%s; Spearman %.3f (need >0.9)",
                    rate, floor_rate, ramp_ever ? "yes" : "no", tc.c_str(), rho)};
}

// ---------------------------------------------------------------- independent points

Outcome independent_points() {
  const auto lc = generate(two_gauss_preset(1000, 9, 4), 1);
  const auto full = build_neighbor_data(lc.cloud, Metric::euclidean(), 3);
  const auto subset = independent_subset(full);
  const auto nd = restrict_to_subset(lc.cloud, Metric::euclidean(), full, subset, 3);
  // Ten chains; keep the one with the highest retained-average log-posterior.
  HidalgoConfig cfg = bench_config(2, 0.8, 1);
  cfg.n_chains = 10;
  const auto data = ModelData::from(nd, cfg.q);
  FitResult r;
  for (std::size_t c = 0; c < cfg.n_chains; ++c) {
    auto candidate = summarize(run_chain(data, cfg, derive_seed(cfg.seed, c)));
    if (c == 0 || candidate.avg_logpost > r.avg_logpost) r = std::move(candidate);
  }
  std::vector<int> truth;
  for (std::size_t i : subset) truth.push_back(lc.labels[i]);
  const double frac = static_cast<double>(subset.size()) / static_cast<double>(lc.labels.size());
  const double score = nmi(r.hard_z, truth);
  return {frac >= 0.15 && frac <= 0.25 && score >= 0.85,
          fmt("kept %zu/%zu (%.1f%%, need 15-25%%); d=%s NMI=%.3f (need >=0.85)", subset.size(), lc.labels.size(),
              100 * frac, dims_str(sorted(r.d_mean)).c_str(), score)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"partition-function-oracle", 10, partition_function},
      {"gibbs-exactness", 60, gibbs_exactness},
      {"two-gaussian-benchmark", 300, two_gaussian},
      {"xi-half-control", 300, xi_half_control},
      {"five-gaussian-linear", 1200, [] { return five_manifolds("five-gauss-linear", 0.8, 0.2); }},
      {"five-curved-manifolds", 1200, [] { return five_manifolds("five-gauss-curved", 0.75, 0.0); }},
      {"twonn-coverage", 600, twonn_coverage},
      {"convergence-diagnostic", 1800, convergence_diagnostic},
      {"independent-points", 300, independent_points},
  };
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (argc > 1 && std::none_of(argv + 1, argv + argc, [&](const char* a) { return c.name.find(a) != std::string::npos; }))
      continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("[%s] %s: %s; %.1fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs,
                c.time_limit_s, in_time ? "" : " TIME EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
