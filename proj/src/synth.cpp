#include "hidalgo/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "hidalgo/sampler.hpp"

namespace hidalgo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRollStart = 1.5 * kPi;
constexpr double kRollEnd = 4.5 * kPi;

void check_spec(const ManifoldSpec& s, std::size_t embed_dim) {
  if (s.intrinsic_dim < 1) throw std::invalid_argument("manifold spec: intrinsic dimension must be >= 1");
  if (!(s.scale >= 0.0) || !std::isfinite(s.scale)) throw std::invalid_argument("manifold spec: scale must be finite and >= 0");
  switch (s.shape) {
    case Shape::circle:
      if (s.intrinsic_dim != 1) throw std::invalid_argument("a circle has intrinsic dimension 1");
      break;
    case Shape::torus:
      if (s.intrinsic_dim != 2) throw std::invalid_argument("a torus has intrinsic dimension 2");
      break;
    case Shape::swiss_roll:
      if (s.intrinsic_dim < 2) throw std::invalid_argument("a swiss roll needs intrinsic dimension >= 2");
      break;
    default:
      break;
  }
  if (ambient_dim(s) > embed_dim)
    throw std::invalid_argument("embedding dimension " + std::to_string(embed_dim) + " cannot hold a shape needing " +
                                std::to_string(ambient_dim(s)) + " coordinates");
  if (!s.center.empty() && s.center.size() != embed_dim)
    throw std::invalid_argument("manifold center must have embed_dim coordinates");
}

// Writes one embedded point (before translation) into `out`.
void embed(const ManifoldSpec& s, const std::vector<double>& latent, double sigma, std::mt19937_64& rng,
           std::normal_distribution<double>& normal, double* out) {
  const std::size_t d = s.intrinsic_dim;
  switch (s.shape) {
    case Shape::gaussian_linear:
      for (std::size_t c = 0; c < d; ++c) out[c] = latent[c];
      break;
    case Shape::circle: {
      const double angle = std::fmod(latent[0], 2.0 * kPi);
      out[0] = std::cos(angle);
      out[1] = std::sin(angle);
      break;
    }
    case Shape::torus: {
      const double a = std::fmod(latent[0], 2.0 * kPi);
      const double b = std::fmod(latent[1], 2.0 * kPi);
      out[0] = std::cos(a);
      out[1] = std::sin(a);
      out[2] = std::cos(b);
      out[3] = std::sin(b);
      break;
    }
    case Shape::swiss_roll: {
      // +-3 sigma of the first latent coordinate spans [3pi/2, 9pi/2]; the roll
      // is shrunk so its outer radius is 1.
      const double half_span = 0.5 * (kRollEnd - kRollStart);
      const double unit = sigma > 0.0 ? latent[0] / (3.0 * sigma) : 0.0;
      const double t = 0.5 * (kRollStart + kRollEnd) + half_span * unit;
      out[0] = t * std::cos(t) / kRollEnd;
      out[1] = t * std::sin(t) / kRollEnd;
      for (std::size_t c = 1; c < d; ++c) out[c + 1] = latent[c];
      break;
    }
    case Shape::sphere: {
      double norm = 0.0;
      for (std::size_t c = 0; c <= d; ++c) {
        out[c] = normal(rng);
        norm += out[c] * out[c];
      }
      norm = std::sqrt(norm);
      for (std::size_t c = 0; c <= d; ++c) out[c] /= norm;
      break;
    }
  }
}

LabeledCloud generate_impl(const std::vector<ManifoldSpec>& specs, std::size_t embed_dim, std::uint64_t seed) {
  if (specs.empty()) throw std::invalid_argument("no manifold specs given");
  std::size_t total = 0;
  for (const auto& s : specs) {
    check_spec(s, embed_dim);
    total += s.n_points;
  }
  std::vector<double> coords(total * embed_dim, 0.0);
  std::vector<int> labels;
  labels.reserve(total);
  std::size_t row = 0;
  for (std::size_t idx = 0; idx < specs.size(); ++idx) {
    const ManifoldSpec& s = specs[idx];
    std::mt19937_64 rng(derive_seed(seed, idx));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = s.scale / std::sqrt(static_cast<double>(s.intrinsic_dim));
    std::vector<double> latent(s.intrinsic_dim);
    for (std::size_t p = 0; p < s.n_points; ++p, ++row) {
      for (double& v : latent) v = sigma * normal(rng);
      double* out = coords.data() + row * embed_dim;
      embed(s, latent, sigma, rng, normal, out);
      if (!s.center.empty())
        for (std::size_t c = 0; c < embed_dim; ++c) out[c] += s.center[c];
      labels.push_back(static_cast<int>(idx));
    }
  }
  return {PointCloud(total, embed_dim, std::move(coords)), std::move(labels)};
}

std::vector<double> axis(std::size_t dim, std::size_t c, double value) {
  std::vector<double> v(dim, 0.0);
  v[c] = value;
  return v;
}

}  // namespace

std::size_t ambient_dim(const ManifoldSpec& spec) {
  switch (spec.shape) {
    case Shape::gaussian_linear: return spec.intrinsic_dim;
    case Shape::circle: return 2;
    case Shape::torus: return 4;
    case Shape::swiss_roll: return spec.intrinsic_dim + 1;
    case Shape::sphere: return spec.intrinsic_dim + 1;
  }
  return spec.intrinsic_dim;
}

LabeledCloud gen_gaussian_mixture(const std::vector<ManifoldSpec>& specs, std::size_t embed_dim, std::uint64_t seed) {
  for (const auto& s : specs)
    if (s.shape != Shape::gaussian_linear)
      throw std::invalid_argument("gen_gaussian_mixture only accepts linear Gaussian specs");
  return generate_impl(specs, embed_dim, seed);
}

LabeledCloud gen_curved(const std::vector<ManifoldSpec>& specs, std::size_t embed_dim, std::uint64_t seed) {
  for (const auto& s : specs)
    if (s.shape == Shape::gaussian_linear) throw std::invalid_argument("gen_curved expects curved shapes");
  return generate_impl(specs, embed_dim, seed);
}

Preset two_gauss_preset(std::size_t n_per_manifold, std::size_t d_high, std::size_t d_low,
                        double center_distance) {
  if (d_low > d_high) std::swap(d_low, d_high);
  if (d_low == d_high) throw std::invalid_argument("two_gauss_preset: dimensions must differ");
  if (!(center_distance >= 0.0)) throw std::invalid_argument("two_gauss_preset: center_distance must be >= 0");
  Preset p;
  p.embed_dim = d_high;
  // Both clouds have unit radial spread (variance 1/d in each of d coordinates).
  // The shift goes along the last axis, which the low-dimensional cloud does not span.
  p.specs.push_back({d_high, n_per_manifold, axis(d_high, d_high - 1, center_distance),
                     Shape::gaussian_linear, 1.0});
  p.specs.push_back({d_low, n_per_manifold, {}, Shape::gaussian_linear, 1.0});
  return p;
}

Preset five_gauss_linear_preset(std::size_t n_per_manifold) {
  Preset p;
  p.embed_dim = 9;
  // Unit total variance for every cloud, so one standard deviation is one unit
  // of length whatever the dimension. The 4- and 5-d clouds are half a unit
  // apart and the line runs through both; the 2- and 9-d clouds form a second
  // intersecting pair one unit apart, two units away from the first group.
  auto gauss = [&](std::size_t d, std::vector<double> center) {
    return ManifoldSpec{d, n_per_manifold, std::move(center), Shape::gaussian_linear, 1.0};
  };
  std::vector<double> c9 = axis(9, 7, 2.0);
  c9[8] = 1.0;
  p.specs.push_back(gauss(1, {}));
  p.specs.push_back(gauss(2, axis(9, 7, 2.0)));
  p.specs.push_back(gauss(4, {}));
  p.specs.push_back(gauss(5, axis(9, 5, 0.5)));
  p.specs.push_back(gauss(9, std::move(c9)));
  return p;
}

Preset five_gauss_curved_preset(std::size_t n_per_manifold) {
  Preset p;
  p.embed_dim = 10;
  p.curved = true;
  auto curved = [&](std::size_t d, Shape shape, std::vector<double> center) {
    return ManifoldSpec{d, n_per_manifold, std::move(center), shape, std::sqrt(static_cast<double>(d))};
  };
  p.specs.push_back(curved(1, Shape::circle, {}));
  p.specs.push_back(curved(2, Shape::torus, axis(10, 4, 1.0)));
  p.specs.push_back(curved(4, Shape::swiss_roll, axis(10, 6, 1.0)));
  p.specs.push_back(curved(5, Shape::sphere, axis(10, 0, 1.0)));
  p.specs.push_back(curved(9, Shape::sphere, axis(10, 0, -1.0)));
  return p;
}

Preset named_preset(std::string_view name, std::size_t n_per_manifold) {
  if (name == "two-gauss") return two_gauss_preset(n_per_manifold);
  if (name == "five-gauss-linear") return five_gauss_linear_preset(n_per_manifold);
  if (name == "five-gauss-curved") return five_gauss_curved_preset(n_per_manifold);
  throw std::invalid_argument("unknown preset '" + std::string(name) +
                              "' (expected two-gauss, five-gauss-linear or five-gauss-curved)");
}

LabeledCloud generate(const Preset& preset, std::uint64_t seed) {
  return preset.curved ? gen_curved(preset.specs, preset.embed_dim, seed)
                       : gen_gaussian_mixture(preset.specs, preset.embed_dim, seed);
}

}  // namespace hidalgo
