#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hidalgo/error.hpp"
#include "hidalgo/geometry.hpp"
#include "hidalgo/twonn.hpp"

using namespace hidalgo;

TEST_CASE("closed-form estimates on a small sample") {
  const std::vector<double> mu{std::exp(0.5), std::exp(0.25), std::exp(0.25)};
  const auto est = twonn_fit(mu, 2.0, 3.0);
  CHECK(est.n_used == 3);
  CHECK(est.V == doctest::Approx(1.0));
  CHECK(est.d_mle == doctest::Approx(3.0));
  CHECK(est.d_post_mean == doctest::Approx(5.0 / 4.0));
  CHECK(est.d_post_sd == doctest::Approx(std::sqrt(5.0) / 4.0));
}

TEST_CASE("degenerate and invalid input") {
  CHECK_THROWS_AS(twonn_fit(std::vector<double>{1.0, 1.0}), DataError);
  CHECK_THROWS_AS(twonn_fit(std::vector<double>{0.5, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(twonn_fit(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(pareto_quantile(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("pareto quantile inverts the CDF") {
  for (double d : {0.5, 1.0, 4.0, 9.0})
    for (double u : {0.0, 0.1, 0.5, 0.99}) {
      const double mu = pareto_quantile(d, u);
      CHECK(1.0 - std::pow(mu, -d) == doctest::Approx(u).epsilon(1e-12));
    }
}

TEST_CASE("posterior moments match numerical integration of likelihood times prior") {
  // Unnormalized posterior d^(a-1) e^(-b d) * d^N e^(-(d+1) V), integrated by quadrature.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double d_true : {1.5, 6.0}) {
    std::vector<double> mu(40);
    for (double& m : mu) m = pareto_quantile(d_true, unif(rng));
    const double a = 2.0, b = 0.5;
    const auto est = twonn_fit(mu, a, b);
    const double n = static_cast<double>(mu.size());
    const double peak = (a + n - 1.0) / (b + est.V);
    auto log_post = [&](double d) { return (a - 1.0 + n) * std::log(d / peak) - (b + est.V) * (d - peak); };
    using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double upper = 20.0 * peak;
    const double z = Q::integrate([&](double d) { return std::exp(log_post(d)); }, 0.0, upper, 15, 1e-13);
    const double m1 = Q::integrate([&](double d) { return d * std::exp(log_post(d)); }, 0.0, upper, 15, 1e-13) / z;
    const double m2 = Q::integrate([&](double d) { return d * d * std::exp(log_post(d)); }, 0.0, upper, 15, 1e-13) / z;
    CHECK(est.d_post_mean == doctest::Approx(m1).epsilon(1e-9));
    CHECK(est.d_post_sd == doctest::Approx(std::sqrt(m2 - m1 * m1)).epsilon(1e-7));
    // The likelihood alone peaks at N / V.
    CHECK(est.d_mle == doctest::Approx(n / est.V));
  }
}

TEST_CASE("property: estimate recovers the dimension of a Gaussian cloud") {
  for (std::size_t dim : {2u, 5u}) {
    std::mt19937_64 rng(dim);
    std::normal_distribution<double> normal;
    std::vector<double> x(3000 * dim);
    for (double& v : x) v = normal(rng);
    const auto nd = build_neighbor_data(PointCloud(3000, dim, x), Metric::euclidean(), 2);
    const auto est = twonn_fit(nd.mu);
    CHECK(est.d_mle == doctest::Approx(static_cast<double>(dim)).epsilon(0.1));
  }
}
