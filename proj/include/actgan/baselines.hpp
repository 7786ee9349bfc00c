#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "actgan/gridmap.hpp"
#include "actgan/sampling.hpp"

namespace actgan {

struct IdwParams {
  double power = 2.0;
};

struct RbfParams {
  enum class Kernel { gaussian, multiquadric };
  Kernel kernel = Kernel::gaussian;
  double epsilon = 0.0;  // 0 = median pairwise-distance heuristic
  double ridge = 1e-8;
  int dense_limit = 500;  // above this sample count, solve per-query locally
  int neighbors = 64;
};

// Exponential model: gamma(d) = nugget + (sill - nugget) * (1 - exp(-d/range)).
struct VariogramParams {
  double nugget = 0.0;
  double sill = 1.0;
  double range = 10.0;

  double operator()(double d) const;
  void validate() const;
};

struct KrigingParams {
  std::optional<VariogramParams> variogram;  // fitted from the samples if absent
  int dense_limit = 500;
  int neighbors = 64;
  int fit_lags = 8;
};

struct BaselineResult {
  GridMap map;                // clamped to [0,1], float
  std::vector<double> raw;    // unclamped double predictions, row-major
  int64_t clamped_pixels = 0;
  std::vector<uint8_t> clamped;  // per-pixel clamp diagnostic

  double raw_at(int r, int c) const { return raw[static_cast<size_t>(r) * map.width + c]; }
};

// Inverse-distance weighting; exact at sample pixels.
BaselineResult idw(const GridMap& samples, const SampleMask& mask, const IdwParams& p = {});

// Radial-basis-function interpolation with ridge-stabilized fit.
BaselineResult rbf(const GridMap& samples, const SampleMask& mask, const RbfParams& p = {});

// Ordinary kriging: weights solve the constrained system with a Lagrange
// multiplier enforcing sum(w) = 1.
BaselineResult kriging(const GridMap& samples, const SampleMask& mask,
                       const KrigingParams& p = {});

// Moment fit of the exponential variogram from the empirical semivariogram
// binned at `lags` distances.
VariogramParams fit_variogram(const std::vector<std::pair<int, int>>& points,
                              const std::vector<double>& values, int lags = 8);

// Dense linear solve used by the interpolators (LU, partial pivoting).
// Throws RuntimeFailure with a conditioning diagnostic when singular.
std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b);

}  // namespace actgan
