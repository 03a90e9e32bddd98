#include <cmath>
#include <vector>

#include "rmk/rng.hpp"
#include "rmk/scenario.hpp"

namespace rmk {
namespace {

// Mixing kernel exp(-d/ell) with ell = kKernelScale * L reproduces the
// target correlation sigma^2 * exp(-d/L) of the mixed field: the constant
// is calibrated numerically so that the lag-L correlation of the weighted
// sum equals 1/e in the continuum limit.
constexpr double kKernelScale = 0.3921080828;
constexpr double kTruncationFactor = 3.0; // kernel support radius in units of L

} // namespace

Grid2D shadowing_field(const PropagationParams& p, const GridGeometry& geom,
                       std::uint64_t seed) {
  Grid2D field(geom, Unit::dB, 0.0);
  const double sigma = p.shadowing_sigma_db;
  if (sigma == 0.0)
    return field;

  const double L = p.decorrelation_distance_m;
  const double ell = kKernelScale * L;
  const double radius = kTruncationFactor * L;
  const long R = std::max(1L, static_cast<long>(std::ceil(radius / geom.cell_size)));

  const long rows = static_cast<long>(geom.n_rows);
  const long cols = static_cast<long>(geom.n_cols);

  std::vector<double> noise(geom.n_rows * geom.n_cols);
  Rng rng(seed);
  for (auto& n : noise)
    n = rng.normal();

  // Window weights by offset; entries beyond the truncation radius are 0.
  const long W = 2 * R + 1;
  std::vector<double> kernel(static_cast<std::size_t>(W * W), 0.0);
  for (long di = -R; di <= R; ++di) {
    for (long dj = -R; dj <= R; ++dj) {
      const double d = std::hypot(static_cast<double>(di), static_cast<double>(dj)) *
                       geom.cell_size;
      if (d <= radius)
        kernel[static_cast<std::size_t>((di + R) * W + (dj + R))] = std::exp(-d / ell);
    }
  }

  // Per-cell normalization by sqrt(sum of squared clipped weights) keeps the
  // marginal variance at sigma^2 everywhere, including near the border.
  for (long r = 0; r < rows; ++r) {
    const long di_lo = std::max(-R, -r);
    const long di_hi = std::min(R, rows - 1 - r);
    for (long c = 0; c < cols; ++c) {
      const long dj_lo = std::max(-R, -c);
      const long dj_hi = std::min(R, cols - 1 - c);
      double acc = 0.0;
      double w2 = 0.0;
      for (long di = di_lo; di <= di_hi; ++di) {
        const double* krow = &kernel[static_cast<std::size_t>((di + R) * W + R)];
        const double* nrow = &noise[static_cast<std::size_t>((r + di) * cols + c)];
        for (long dj = dj_lo; dj <= dj_hi; ++dj) {
          const double w = krow[dj];
          acc += w * nrow[dj];
          w2 += w * w;
        }
      }
      field.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          sigma * acc / std::sqrt(w2);
    }
  }
  return field;
}

} // namespace rmk
