#pragma once

#include <cstddef>
#include <span>

namespace hidalgo {

/// Homogeneous TWO-NN estimate. The posterior over d is
/// Gamma(prior_a + n_used, prior_b + V) with V = sum(log mu).
struct TwonnEstimate {
  double d_mle = 0.0;
  double d_post_mean = 0.0;
  double d_post_sd = 0.0;
  std::size_t n_used = 0;
  double V = 0.0;
};

/// Throws DataError when every mu equals 1 (V = 0).
TwonnEstimate twonn_fit(std::span<const double> mu, double prior_a = 1.0, double prior_b = 1.0);

/// Inverse CDF of the Pareto law f(mu | d) = d mu^-(d+1) on [1, inf).
double pareto_quantile(double d, double u);

}  // namespace hidalgo
