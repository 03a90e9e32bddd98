#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "estimate_detail.hpp"

namespace rmk {

double variogram_eval(const Variogram& v, double h) {
  if (h <= 0.0)
    return v.nugget;
  return v.nugget + (v.sill - v.nugget) * (1.0 - std::exp(-3.0 * h / v.range));
}

namespace detail {
namespace {

constexpr std::size_t kGlobalSolveLimit = 1000; // factor once up to this many samples
constexpr std::size_t kLocalNeighbors = 64;     // per-query neighborhood beyond it

// Ordinary Kriging system on explicit samples: zero diagonal, unbiasedness
// row, right-continuous variogram off the diagonal.
Eigen::MatrixXd assemble_system(const std::vector<double>& xs,
                                const std::vector<double>& ys,
                                const Variogram& v) {
  const std::size_t n = xs.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = variogram_eval(v, std::hypot(xs[i] - xs[j], ys[i] - ys[j]));
      A(i, j) = g;
      A(j, i) = g;
    }
    A(i, n) = 1.0;
    A(n, i) = 1.0;
  }
  return A;
}

KrigingSolution solve_with(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                           const std::vector<double>& xs,
                           const std::vector<double>& ys,
                           const std::vector<double>& vs, const Variogram& v,
                           double x, double y) {
  const std::size_t n = xs.size();
  Eigen::VectorXd b(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    b(i) = variogram_eval(v, std::hypot(x - xs[i], y - ys[i]));
  b(n) = 1.0;
  Eigen::VectorXd z = lu.solve(b);

  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    wsum += z(i);
  if (!z.allFinite() || std::fabs(wsum - 1.0) > 1e-6)
    throw ConditioningError("kriging system is singular"
                            " (duplicate sensors with zero nugget?)");

  KrigingSolution sol;
  sol.weights.assign(z.data(), z.data() + n);
  sol.lagrange = z(n);
  double mean = 0.0;
  double var = sol.lagrange;
  for (std::size_t i = 0; i < n; ++i) {
    mean += z(i) * vs[i];
    var += z(i) * b(i);
  }
  sol.result = {mean, var};
  return sol;
}

class KrigingEstimator final : public FittedEstimator {
public:
  KrigingEstimator(ChannelSamples s, Variogram v)
      : s_(std::move(s)), v_(std::move(v)) {
    if (s_.vs.size() < 2)
      throw DataError("kriging needs at least two unrejected measurements");
    if (!(v_.range > 0.0) || !(v_.sill > 0.0) || v_.nugget < 0.0 ||
        v_.nugget > v_.sill)
      throw ConfigError("invalid variogram parameters");
    // Coincident rows make the system singular unless the nugget lifts the
    // off-diagonal; a consistent right-hand side would slip past the
    // residual check, so catch the case up front.
    if (v_.nugget <= 0.0) {
      for (std::size_t i = 0; i < s_.vs.size(); ++i)
        for (std::size_t j = i + 1; j < s_.vs.size(); ++j)
          if (std::hypot(s_.xs[i] - s_.xs[j], s_.ys[i] - s_.ys[j]) < 1e-9)
            throw ConditioningError(
                "kriging system is singular (duplicate sensors with zero nugget)");
    }
    if (s_.vs.size() <= kGlobalSolveLimit)
      lu_.compute(assemble_system(s_.xs, s_.ys, v_));
  }

  KrigingSolution solve(double x, double y) const {
    if (s_.vs.size() <= kGlobalSolveLimit)
      return solve_with(lu_, s_.xs, s_.ys, s_.vs, v_, x, y);

    // Local neighborhood: the nearest samples, ties by index.
    const std::size_t n = s_.vs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::nth_element(order.begin(), order.begin() + kLocalNeighbors, order.end(),
                     [&](std::size_t a, std::size_t b) {
                       const double da = std::hypot(x - s_.xs[a], y - s_.ys[a]);
                       const double db = std::hypot(x - s_.xs[b], y - s_.ys[b]);
                       if (da != db)
                         return da < db;
                       return a < b;
                     });
    order.resize(kLocalNeighbors);
    std::sort(order.begin(), order.end());
    std::vector<double> xs(kLocalNeighbors), ys(kLocalNeighbors), vs(kLocalNeighbors);
    for (std::size_t i = 0; i < kLocalNeighbors; ++i) {
      xs[i] = s_.xs[order[i]];
      ys[i] = s_.ys[order[i]];
      vs[i] = s_.vs[order[i]];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(assemble_system(xs, ys, v_));
    return solve_with(lu, xs, ys, vs, v_, x, y);
  }

  double predict(double x, double y) const override {
    return solve(x, y).result.mean_db;
  }

  EstimatorMethod method() const override { return EstimatorMethod::kriging; }

private:
  ChannelSamples s_;
  Variogram v_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

} // namespace

std::unique_ptr<FittedEstimator> make_kriging(ChannelSamples s, Variogram v) {
  return std::make_unique<KrigingEstimator>(std::move(s), std::move(v));
}

} // namespace detail

KrigingSolution kriging_solve(const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              const std::vector<double>& values,
                              const Variogram& v, double x, double y) {
  detail::ChannelSamples s;
  s.xs = xs;
  s.ys = ys;
  s.vs = values;
  detail::KrigingEstimator* raw = nullptr;
  auto est = detail::make_kriging(std::move(s), v);
  // make_kriging always builds a KrigingEstimator.
  raw = static_cast<detail::KrigingEstimator*>(est.get());
  return raw->solve(x, y);
}

KrigingResult estimate_kriging(const MeasurementSet& ms, std::size_t channel,
                               double x, double y, const Variogram& v) {
  auto s = detail::gather_channel(ms, channel);
  return kriging_solve(s.xs, s.ys, s.vs, v, x, y).result;
}

} // namespace rmk
