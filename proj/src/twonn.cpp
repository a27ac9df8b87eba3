#include "hidalgo/twonn.hpp"

#include <cmath>
#include <stdexcept>

#include "hidalgo/error.hpp"

namespace hidalgo {

TwonnEstimate twonn_fit(std::span<const double> mu, double prior_a, double prior_b) {
  if (mu.empty()) throw std::invalid_argument("twonn_fit: empty mu vector");
  if (!(prior_a > 0.0) || !(prior_b > 0.0))
    throw std::invalid_argument("twonn_fit: Gamma prior parameters must be positive");
  double V = 0.0;
  for (double m : mu) {
    if (!(m >= 1.0) || !std::isfinite(m)) throw std::invalid_argument("twonn_fit: mu values must be finite and >= 1");
    V += std::log(m);
  }
  if (V <= 0.0) throw DataError("twonn_fit: all mu equal 1, the dimension is not identifiable");

  TwonnEstimate est;
  est.n_used = mu.size();
  est.V = V;
  const double n = static_cast<double>(mu.size());
  est.d_mle = n / V;
  est.d_post_mean = (prior_a + n) / (prior_b + V);
  est.d_post_sd = std::sqrt(prior_a + n) / (prior_b + V);
  return est;
}

double pareto_quantile(double d, double u) {
  if (!(d > 0.0)) throw std::invalid_argument("pareto_quantile: d must be positive");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("pareto_quantile: u must lie in [0, 1)");
  return std::pow(1.0 - u, -1.0 / d);
}

}  // namespace hidalgo
