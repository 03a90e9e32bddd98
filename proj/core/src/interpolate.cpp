#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "estimate_detail.hpp"

namespace rmk {
namespace detail {
namespace {

constexpr double kCoincidenceDistance = 1e-9; // meters

// Scale-free inverse-distance weights (d_min/d)^d_exp cannot overflow no
// matter how small a distance gets past the coincidence test.
class IdwEstimator final : public FittedEstimator {
public:
  IdwEstimator(ChannelSamples s, double d_exp, bool angular)
      : s_(std::move(s)), d_exp_(d_exp), angular_(angular) {
    if (s_.vs.empty())
      throw DataError("idw needs at least one unrejected measurement");
    if (!(d_exp_ > 0.0))
      throw ConfigError("idw distance exponent must be positive");
  }

  double predict(double x, double y) const override {
    const std::size_t n = s_.vs.size();
    std::vector<double> dist(n);
    double d_min = std::numeric_limits<double>::infinity();
    std::size_t i_min = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::hypot(x - s_.xs[i], y - s_.ys[i]);
      if (dist[i] < d_min) {
        d_min = dist[i];
        i_min = i;
      }
    }
    if (d_min < kCoincidenceDistance)
      return s_.vs[i_min];

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = std::pow(d_min / dist[i], d_exp_);

    if (angular_ && n > 2) {
      const std::vector<double> a = angular_isolation(x, y);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        sum += w[i] * a[i];
      // All-duplicate angles collapse every span to zero; plain IDW then.
      if (sum > 0.0 && std::isfinite(sum)) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          acc += w[i] * a[i] * s_.vs[i];
        return acc / sum;
      }
    }
    double sum = std::accumulate(w.begin(), w.end(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += w[i] * s_.vs[i];
    return acc / sum;
  }

  EstimatorMethod method() const override {
    return angular_ ? EstimatorMethod::midw : EstimatorMethod::idw;
  }

private:
  // Angular span between each sensor's two neighbors in the angular
  // ordering around the query, halved and normalized by pi. Even spacing
  // on a circle makes every factor equal; an isolated direction gets a
  // larger factor than members of a cluster.
  std::vector<double> angular_isolation(double x, double y) const {
    const std::size_t n = s_.vs.size();
    std::vector<std::pair<double, std::size_t>> ang(n);
    for (std::size_t i = 0; i < n; ++i)
      ang[i] = {std::atan2(s_.ys[i] - y, s_.xs[i] - x), i};
    std::sort(ang.begin(), ang.end());
    constexpr double two_pi = 6.28318530717958647692528676655900577;
    std::vector<double> a(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double prev = ang[(k + n - 1) % n].first;
      const double next = ang[(k + 1) % n].first;
      double span = std::fmod(next - prev + 2.0 * two_pi, two_pi);
      a[ang[k].second] = span / two_pi;
    }
    return a;
  }

  ChannelSamples s_;
  double d_exp_;
  bool angular_;
};

double rbf_eval(RbfKind kind, double r, double shape) {
  const double t = r / shape;
  switch (kind) {
  case RbfKind::gaussian:
    return std::exp(-t * t);
  case RbfKind::multiquadric:
    return std::sqrt(1.0 + t * t);
  case RbfKind::thin_plate:
    return t > 0.0 ? t * t * std::log(t) : 0.0;
  }
  return 0.0;
}

// Interpolant sum_i c_i k(|x - x_i|). thin_plate appends an affine term
// (with side conditions) so constants and planes are reproduced; its
// coordinates are centered on the sample centroid, which also keeps the
// solve translation-invariant.
class RbfEstimator final : public FittedEstimator {
public:
  RbfEstimator(ChannelSamples s, RbfKind kind, double shape, double ridge)
      : s_(std::move(s)), kind_(kind), shape_(shape) {
    const std::size_t n = s_.vs.size();
    if (n < 2)
      throw DataError("rbf needs at least two unrejected measurements");
    if (shape_ < 0.0)
      throw ConfigError("rbf shape must be non-negative");
    // Duplicate nodes give a singular kernel block; when the duplicated
    // values happen to agree the solve would succeed arbitrarily, so the
    // case is rejected outright unless a ridge separates the rows.
    if (ridge == 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (std::hypot(s_.xs[i] - s_.xs[j], s_.ys[i] - s_.ys[j]) < 1e-9)
            throw ConditioningError(
                "rbf system is singular (duplicate sensors with zero ridge)");
    }
    if (shape_ == 0.0) {
      // Auto shape: median pairwise sample distance.
      std::vector<double> d;
      d.reserve(n * (n - 1) / 2);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          d.push_back(std::hypot(s_.xs[i] - s_.xs[j], s_.ys[i] - s_.ys[j]));
      std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
      shape_ = std::max(d[d.size() / 2], 1e-6);
    }
    if (ridge < 0.0)
      throw ConfigError("rbf ridge must be non-negative");

    const bool poly = kind_ == RbfKind::thin_plate;
    if (poly) {
      cx_ = std::accumulate(s_.xs.begin(), s_.xs.end(), 0.0) / static_cast<double>(n);
      cy_ = std::accumulate(s_.ys.begin(), s_.ys.end(), 0.0) / static_cast<double>(n);
    }
    const std::size_t dim = poly ? n + 3 : n;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double r = std::hypot(s_.xs[i] - s_.xs[j], s_.ys[i] - s_.ys[j]);
        A(i, j) = rbf_eval(kind_, r, shape_);
      }
      A(i, i) += ridge;
      b(i) = s_.vs[i];
    }
    if (poly) {
      for (std::size_t i = 0; i < n; ++i) {
        const double px = (s_.xs[i] - cx_) / shape_;
        const double py = (s_.ys[i] - cy_) / shape_;
        A(i, n) = 1.0;
        A(i, n + 1) = px;
        A(i, n + 2) = py;
        A(n, i) = 1.0;
        A(n + 1, i) = px;
        A(n + 2, i) = py;
      }
    }
    Eigen::VectorXd c = A.partialPivLu().solve(b);
    const double resid = (A * c - b).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
    if (!c.allFinite() || !(resid <= 1e-6 * scale))
      throw ConditioningError("rbf system is singular or badly conditioned"
                              " (duplicate sensors with zero ridge?)");
    coef_.assign(c.data(), c.data() + dim);
  }

  double predict(double x, double y) const override {
    const std::size_t n = s_.vs.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += coef_[i] * rbf_eval(kind_, std::hypot(x - s_.xs[i], y - s_.ys[i]), shape_);
    if (kind_ == RbfKind::thin_plate)
      acc += coef_[n] + coef_[n + 1] * (x - cx_) / shape_ +
             coef_[n + 2] * (y - cy_) / shape_;
    return acc;
  }

  EstimatorMethod method() const override { return EstimatorMethod::rbf; }

private:
  ChannelSamples s_;
  RbfKind kind_;
  double shape_;
  double cx_ = 0.0, cy_ = 0.0;
  std::vector<double> coef_;
};

} // namespace

std::unique_ptr<FittedEstimator> make_idw(ChannelSamples s, double d_exp,
                                          bool angular) {
  return std::make_unique<IdwEstimator>(std::move(s), d_exp, angular);
}

std::unique_ptr<FittedEstimator> make_rbf(ChannelSamples s, RbfKind kind,
                                          double shape, double ridge) {
  return std::make_unique<RbfEstimator>(std::move(s), kind, shape, ridge);
}

} // namespace detail

double estimate_idw(const MeasurementSet& ms, std::size_t channel, double x,
                    double y, double d_exp) {
  return detail::make_idw(detail::gather_channel(ms, channel), d_exp, false)
      ->predict(x, y);
}

double estimate_midw(const MeasurementSet& ms, std::size_t channel, double x,
                     double y, double d_exp) {
  return detail::make_idw(detail::gather_channel(ms, channel), d_exp, true)
      ->predict(x, y);
}

double estimate_rbf(const MeasurementSet& ms, std::size_t channel, double x,
                    double y, RbfKind kind, double shape, double ridge) {
  return detail::make_rbf(detail::gather_channel(ms, channel), kind, shape, ridge)
      ->predict(x, y);
}

} // namespace rmk
