#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "hidalgo/geometry.hpp"

namespace hidalgo {

enum class Shape { gaussian_linear, circle, torus, swiss_roll, sphere };

/// One manifold of a synthetic benchmark. Latent coordinates are isotropic
/// Gaussian with standard deviation scale / sqrt(intrinsic_dim); curved shapes
/// map them onto a unit-radius surface.
struct ManifoldSpec {
  std::size_t intrinsic_dim = 1;
  std::size_t n_points = 0;
  /// Translation in embedding coordinates; empty means the origin.
  std::vector<double> center;
  Shape shape = Shape::gaussian_linear;
  double scale = 1.0;
};

struct LabeledCloud {
  PointCloud cloud;
  std::vector<int> labels;
};

/// Embedding coordinates a shape needs before zero-padding.
std::size_t ambient_dim(const ManifoldSpec& spec);

/// Linear Gaussian clouds: the latent sample occupies the first d coordinates.
LabeledCloud gen_gaussian_mixture(const std::vector<ManifoldSpec>& specs, std::size_t embed_dim, std::uint64_t seed);

/// Curved embeddings (circle, torus, swiss roll, sphere) of Gaussian latents.
LabeledCloud gen_curved(const std::vector<ManifoldSpec>& specs, std::size_t embed_dim, std::uint64_t seed);

struct Preset {
  std::vector<ManifoldSpec> specs;
  std::size_t embed_dim = 0;
  bool curved = false;
};

/// Two Gaussians of dimension d_high and d_low (default 9 and 4), variance
/// 1/d per coordinate. The centers are `center_distance` apart in units of the
/// radial standard deviation (which is 1 for both), along an axis orthogonal
/// to the low-dimensional cloud.
Preset two_gauss_preset(std::size_t n_per_manifold, std::size_t d_high = 9, std::size_t d_low = 4,
                        double center_distance = 0.5);
/// Five unit-variance Gaussians of dimension 1, 2, 4, 5, 9 in 9 coordinates.
Preset five_gauss_linear_preset(std::size_t n_per_manifold);
/// Circle, torus, 4-d swiss roll, 5-sphere and 9-sphere in 10 coordinates.
Preset five_gauss_curved_preset(std::size_t n_per_manifold);
/// Looks up `two-gauss`, `five-gauss-linear` or `five-gauss-curved`.
Preset named_preset(std::string_view name, std::size_t n_per_manifold);

LabeledCloud generate(const Preset& preset, std::uint64_t seed);

}  // namespace hidalgo
