#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rmk/estimate.hpp"

namespace rmk {

double RaisedCosineBasis::eval(double f_hz) const {
  const double a = std::fabs(f_hz - center_hz);
  const double flat = (1.0 - rolloff) * bandwidth_hz / 2.0;
  const double edge = (1.0 + rolloff) * bandwidth_hz / 2.0;
  if (a <= flat)
    return 1.0;
  if (a <= edge && rolloff > 0.0)
    return 0.5 * (1.0 + std::cos(M_PI / (rolloff * bandwidth_hz) * (a - flat)));
  return 0.0;
}

std::vector<double> psd_basis_project(const std::vector<double>& psd_db,
                                      const std::vector<double>& sample_freqs_hz,
                                      const std::vector<RaisedCosineBasis>& bases) {
  if (psd_db.size() != sample_freqs_hz.size())
    throw DataError("psd samples and frequencies differ in length");
  const std::size_t m = psd_db.size();
  const std::size_t n = bases.size();
  if (m == 0 || n == 0)
    throw DataError("psd projection needs samples and bases");

  std::vector<double> p(m);
  for (std::size_t i = 0; i < m; ++i)
    p[i] = from_db(psd_db[i]);
  std::vector<double> B(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      B[i * n + j] = bases[j].eval(sample_freqs_hz[i]);

  auto apply = [&](const std::vector<double>& a, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        acc += B[i * n + j] * a[j];
      out[i] = acc;
    }
  };
  auto apply_t = [&](const std::vector<double>& r, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out[j] += B[i * n + j] * r[i];
  };

  // Largest eigenvalue of B^T B by power iteration fixes a safe step size.
  std::vector<double> v(n, 1.0), bv(m), btbv(n);
  double lambda = 0.0;
  for (int it = 0; it < 64; ++it) {
    apply(v, bv);
    apply_t(bv, btbv);
    double norm = 0.0;
    for (double x : btbv)
      norm += x * x;
    norm = std::sqrt(norm);
    if (norm <= 0.0)
      break;
    lambda = norm;
    for (std::size_t j = 0; j < n; ++j)
      v[j] = btbv[j] / norm;
  }
  if (lambda <= 0.0)
    return std::vector<double>(n, 0.0); // zero operator, anything fits

  // Projected gradient on 0.5*|Ba - p|^2 with a >= 0, from a = 0.
  const double step = 1.0 / lambda;
  std::vector<double> a(n, 0.0), r(m), g(n);
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 10000; ++it) {
    apply(a, r);
    double obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      r[i] -= p[i];
      obj += 0.5 * r[i] * r[i];
    }
    if (it > 0 && std::fabs(prev_obj - obj) <= 1e-10 * std::max(prev_obj, 1e-300))
      break;
    prev_obj = obj;
    apply_t(r, g);
    for (std::size_t j = 0; j < n; ++j)
      a[j] = std::max(0.0, a[j] - step * g[j]);
  }
  return a;
}

} // namespace rmk
