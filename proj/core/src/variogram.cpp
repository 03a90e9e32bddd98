#include <algorithm>
#include <cmath>
#include <limits>

#include "estimate_detail.hpp"

namespace rmk {
namespace {

struct WeightedFit {
  double nugget = 0.0;
  double slope = 0.0; // sill - nugget
  double sse = std::numeric_limits<double>::infinity();
};

// Count-weighted LS of gamma_b = nugget + slope * e_b with both parameters
// clamped non-negative.
WeightedFit fit_for_shape(const std::vector<VariogramBin>& bins,
                          const std::vector<double>& e) {
  double sw = 0.0, se = 0.0, see = 0.0, sg = 0.0, seg = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const double w = static_cast<double>(bins[b].count);
    sw += w;
    se += w * e[b];
    see += w * e[b] * e[b];
    sg += w * bins[b].semivariance;
    seg += w * e[b] * bins[b].semivariance;
  }
  WeightedFit f;
  const double denom = sw * see - se * se;
  if (std::fabs(denom) > 1e-12 * std::max(sw * see, 1.0)) {
    f.slope = (sw * seg - se * sg) / denom;
    f.nugget = (sg - f.slope * se) / sw;
  } else {
    f.slope = 0.0;
    f.nugget = sg / sw;
  }
  if (f.slope < 0.0) {
    f.slope = 0.0;
    f.nugget = sg / sw;
  }
  if (f.nugget < 0.0) {
    f.nugget = 0.0;
    f.slope = see > 0.0 ? std::max(seg / see, 0.0) : 0.0;
  }
  f.sse = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const double w = static_cast<double>(bins[b].count);
    const double r = bins[b].semivariance - (f.nugget + f.slope * e[b]);
    f.sse += w * r * r;
  }
  return f;
}

} // namespace

Variogram fit_variogram(const MeasurementSet& ms, std::size_t n_bins,
                        double max_lag) {
  if (n_bins < 4)
    throw ConfigError("variogram needs at least 4 bins");

  struct Sample {
    double x, y, v;
    std::size_t channel;
    long time;
  };
  std::vector<Sample> pts;
  for (const auto& m : ms.measurements) {
    if (m.flags.rejected)
      continue;
    const Sensor& s = ms.sensor_by_id(m.sensor_id);
    pts.push_back({s.x, s.y, m.psd_db, m.channel_index, m.time_index});
  }
  if (pts.size() < 10)
    throw DataError("variogram needs at least 10 unrejected measurements");

  // Pair lags and half squared differences, same channel and epoch only.
  std::vector<double> lags, gammas;
  double max_pair = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].channel != pts[j].channel || pts[i].time != pts[j].time)
        continue;
      const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      max_pair = std::max(max_pair, d);
      const double dv = pts[i].v - pts[j].v;
      lags.push_back(d);
      gammas.push_back(0.5 * dv * dv);
    }
  }
  if (lags.empty())
    throw DataError("variogram has no same-channel measurement pairs");
  if (max_lag <= 0.0)
    max_lag = 0.5 * max_pair;
  if (!(max_lag > 0.0))
    throw DataError("all measurement pairs are coincident");

  const double width = max_lag / static_cast<double>(n_bins);
  std::vector<double> lag_sum(n_bins, 0.0), gamma_sum(n_bins, 0.0);
  std::vector<std::size_t> counts(n_bins, 0);
  bool any = false;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    if (lags[k] > max_lag)
      continue;
    std::size_t b = std::min(static_cast<std::size_t>(lags[k] / width), n_bins - 1);
    lag_sum[b] += lags[k];
    gamma_sum[b] += gammas[k];
    counts[b] += 1;
    any = true;
  }
  if (!any)
    throw DataError("all pairwise lags exceed max_lag");

  Variogram out;
  for (std::size_t b = 0; b < n_bins; ++b)
    if (counts[b] > 0)
      out.bins.push_back({lag_sum[b] / static_cast<double>(counts[b]),
                          gamma_sum[b] / static_cast<double>(counts[b]), counts[b]});

  // Log-spaced candidate ranges; e_b = 1 - exp(-3h/r) makes the model
  // linear per candidate.
  const double first_lag = out.bins.front().lag;
  const double last_lag = out.bins.back().lag;
  const double lo = std::max({first_lag * 0.25, last_lag * 1e-4, 1e-9});
  const double hi = std::max(last_lag * 4.0, lo * 2.0);
  constexpr std::size_t kRangeGrid = 60;

  std::vector<double> e(out.bins.size());
  // Flat fit is the reference: a shaped candidate must halve its error to
  // count as real structure, so uncorrelated data keeps the smallest range.
  std::fill(e.begin(), e.end(), 0.0);
  WeightedFit flat = fit_for_shape(out.bins, e);
  const double tol = 1e-9 * std::max(flat.sse, 1e-30);

  double best_range = lo;
  WeightedFit best;
  for (std::size_t k = 0; k < kRangeGrid; ++k) {
    const double r =
        lo * std::pow(hi / lo, static_cast<double>(k) / (kRangeGrid - 1));
    for (std::size_t b = 0; b < out.bins.size(); ++b)
      e[b] = 1.0 - std::exp(-3.0 * out.bins[b].lag / r);
    WeightedFit f = fit_for_shape(out.bins, e);
    if (f.sse < best.sse - tol) {
      best = f;
      best_range = r;
    }
  }
  if (!(flat.sse > 2.0 * best.sse)) {
    best = flat;
    best.slope = 0.0;
    best_range = lo;
  }

  out.nugget = std::max(best.nugget, 0.0);
  out.sill = std::max({out.nugget, best.nugget + best.slope, 1e-12});
  out.range = best_range;
  return out;
}

} // namespace rmk
