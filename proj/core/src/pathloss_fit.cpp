#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "estimate_detail.hpp"

namespace rmk {
namespace detail {
namespace {

constexpr double kDegenerateVarZ = 1e-12; // dB^2; below this eta is unidentifiable
constexpr double kMinSlope = 1e-6;        // smaller fitted decay means no distance trend

struct CandidateFit {
  double sse = std::numeric_limits<double>::infinity();
  double ref_db = 0.0;
  double exponent = 1.0;
  bool degenerate = false;
};

// For a fixed position the model phi = P + eta * z with z = -10*log10(d)
// is linear; closed-form weighted-free LS. Degenerate spread of z (all
// samples equidistant) pins eta at a nominal 1 and fits P alone.
CandidateFit fit_at_position(const std::vector<double>& xs,
                             const std::vector<double>& ys,
                             const std::vector<double>& vs, double px,
                             double py, double d_min) {
  const std::size_t n = vs.size();
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = -10.0 * std::log10(std::max(std::hypot(xs[i] - px, ys[i] - py), d_min));
  const double zbar = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
  const double vbar = std::accumulate(vs.begin(), vs.end(), 0.0) / static_cast<double>(n);
  double szz = 0.0, szv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    szz += (z[i] - zbar) * (z[i] - zbar);
    szv += (z[i] - zbar) * (vs[i] - vbar);
  }
  CandidateFit fit;
  // No usable spread of z, or no positive decay with distance: the data
  // cannot identify an exponent. Pin a nominal 1 and say so; clamping to a
  // tiny slope instead would let a flat field masquerade as a clean fit.
  if (szz / static_cast<double>(n) < kDegenerateVarZ || szv / szz <= kMinSlope) {
    fit.degenerate = true;
    fit.exponent = 1.0;
  } else {
    fit.exponent = szv / szz;
  }
  fit.ref_db = vbar - fit.exponent * zbar;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = vs[i] - (fit.ref_db + fit.exponent * z[i]);
    sse += r * r;
  }
  fit.sse = sse;
  return fit;
}

struct Candidate {
  double x = 0.0, y = 0.0;
  CandidateFit fit;
};

Candidate pattern_search(const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::vector<double>& vs,
                         const GridGeometry& geom, double d_min, Candidate c,
                         double step) {
  const double stop = geom.cell_size * 1e-8;
  while (step >= stop) {
    bool moved = false;
    const double probes[4][2] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
    for (const auto& p : probes) {
      const double nx = std::clamp(c.x + p[0], geom.origin_x, geom.max_x());
      const double ny = std::clamp(c.y + p[1], geom.origin_y, geom.max_y());
      CandidateFit f = fit_at_position(xs, ys, vs, nx, ny, d_min);
      if (f.sse < c.fit.sse) {
        c = {nx, ny, f};
        moved = true;
      }
    }
    if (!moved)
      step *= 0.5;
  }
  return c;
}

} // namespace

PathLossFit fit_pathloss_points(const std::vector<double>& xs,
                                const std::vector<double>& ys,
                                const std::vector<double>& vs,
                                const GridGeometry& geom,
                                std::optional<std::pair<double, double>> init) {
  const std::size_t n = vs.size();
  if (n < 4)
    throw DataError("path-loss fit needs at least 4 measurements, got " +
                    std::to_string(n));
  const double d_min = geom.cell_size / 2.0;

  // Coarse 20x20 sweep; the best few starts get refined so one shallow
  // local basin cannot capture the search.
  std::vector<Candidate> coarse;
  constexpr std::size_t kCoarse = 20;
  for (std::size_t r = 0; r < kCoarse; ++r) {
    for (std::size_t c = 0; c < kCoarse; ++c) {
      const double px = geom.origin_x +
                        (static_cast<double>(c) + 0.5) * geom.width() / kCoarse;
      const double py = geom.origin_y +
                        (static_cast<double>(r) + 0.5) * geom.height() / kCoarse;
      coarse.push_back({px, py, fit_at_position(xs, ys, vs, px, py, d_min)});
    }
  }
  if (init)
    coarse.push_back(
        {init->first, init->second,
         fit_at_position(xs, ys, vs, init->first, init->second, d_min)});

  std::sort(coarse.begin(), coarse.end(),
            [](const Candidate& a, const Candidate& b) { return a.fit.sse < b.fit.sse; });

  const double step0 = std::max(geom.width(), geom.height()) / (2.0 * kCoarse);
  Candidate best;
  const std::size_t n_starts = std::min<std::size_t>(3, coarse.size());
  for (std::size_t k = 0; k < n_starts; ++k) {
    Candidate refined = pattern_search(xs, ys, vs, geom, d_min, coarse[k], step0);
    if (refined.fit.sse < best.fit.sse)
      best = refined;
  }

  PathLossFit out;
  out.x = best.x;
  out.y = best.y;
  out.ref_power_db = best.fit.ref_db;
  out.exponent = best.fit.exponent;
  out.residual_rms_db = std::sqrt(best.fit.sse / static_cast<double>(n));
  out.ill_conditioned = best.fit.degenerate;
  return out;
}

double pathloss_fit_linear_power(const PathLossFit& f, double x, double y,
                                 double d_min) {
  const double d = std::max(std::hypot(x - f.x, y - f.y), d_min);
  const double db = f.ref_power_db - 10.0 * f.exponent * std::log10(d);
  return std::pow(10.0, db / 10.0);
}

} // namespace detail

PathLossFit fit_pathloss_single(const MeasurementSet& ms, std::size_t channel,
                                std::optional<std::pair<double, double>> init) {
  auto s = detail::gather_channel(ms, channel);
  return detail::fit_pathloss_points(s.xs, s.ys, s.vs, s.geom, init);
}

ModelBasedResult estimate_model_based(const MeasurementSet& ms,
                                      std::size_t channel, std::size_t n_tx) {
  if (n_tx < 1)
    throw ConfigError("model_based needs n_tx >= 1");
  auto s = detail::gather_channel(ms, channel);
  const GridGeometry& geom = s.geom;
  const double d_min = geom.cell_size / 2.0;

  ModelBasedResult out;
  if (n_tx == 1) {
    out.fits.push_back(detail::fit_pathloss_points(s.xs, s.ys, s.vs, geom, {}));
  } else {
    const std::size_t n = s.vs.size();
    if (n < 4)
      throw DataError("model_based needs at least 4 measurements");

    // Strongest-first greedy seeding with a suppression radius keeps the
    // seeds apart; shortfall falls back to the strongest remaining samples.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.vs[a] > s.vs[b];
    });
    const double suppress =
        std::hypot(geom.width(), geom.height()) / (2.0 * std::sqrt(static_cast<double>(n_tx)));
    std::vector<std::size_t> seeds;
    for (std::size_t i : order) {
      if (seeds.size() >= n_tx)
        break;
      bool clear = true;
      for (std::size_t sd : seeds)
        if (std::hypot(s.xs[i] - s.xs[sd], s.ys[i] - s.ys[sd]) <= suppress) {
          clear = false;
          break;
        }
      if (clear)
        seeds.push_back(i);
    }
    for (std::size_t i : order) {
      if (seeds.size() >= n_tx)
        break;
      if (std::find(seeds.begin(), seeds.end(), i) == seeds.end())
        seeds.push_back(i);
    }

    // Nearest-seed partition, ties to the lower seed index.
    std::vector<std::vector<std::size_t>> cells(seeds.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        const double d = std::hypot(s.xs[i] - s.xs[seeds[k]], s.ys[i] - s.ys[seeds[k]]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      cells[best].push_back(i);
    }

    for (std::size_t k = 0; k < seeds.size(); ++k) {
      std::vector<std::size_t>& members = cells[k];
      if (members.size() < 4) {
        // Too small to identify 4 parameters; borrow the nearest samples.
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        std::sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) {
          const double da = std::hypot(s.xs[a] - s.xs[seeds[k]], s.ys[a] - s.ys[seeds[k]]);
          const double db = std::hypot(s.xs[b] - s.xs[seeds[k]], s.ys[b] - s.ys[seeds[k]]);
          if (da != db)
            return da < db;
          return a < b;
        });
        members.assign(all.begin(), all.begin() + 4);
      }
    }

    // Cell k's samples with every fit except skip removed in the linear
    // domain; the floor keeps the residual a valid power.
    auto cell_residual = [&](std::size_t k, std::size_t skip, std::vector<double>& xs,
                             std::vector<double>& ys, std::vector<double>& vs) {
      xs.clear();
      ys.clear();
      vs.clear();
      for (std::size_t i : cells[k]) {
        xs.push_back(s.xs[i]);
        ys.push_back(s.ys[i]);
        double lin = std::pow(10.0, s.vs[i] / 10.0);
        for (std::size_t j = 0; j < out.fits.size(); ++j)
          if (j != skip)
            lin -= detail::pathloss_fit_linear_power(out.fits[j], s.xs[i],
                                                     s.ys[i], d_min);
        vs.push_back(10.0 * std::log10(std::max(lin, kLinearFloor)));
      }
    };

    std::vector<double> xs, ys, vs;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      cell_residual(k, out.fits.size(), xs, ys, vs);
      out.fits.push_back(detail::fit_pathloss_points(
          xs, ys, vs, geom, std::make_pair(s.xs[seeds[k]], s.ys[seeds[k]])));
    }

    // The first fit saw the other transmitters at full strength, so its bias
    // leaks into every subtraction after it. A couple of re-fit sweeps with
    // the latest estimates removed settle the parameters.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t k = 0; k < out.fits.size(); ++k) {
        cell_residual(k, k, xs, ys, vs);
        out.fits[k] = detail::fit_pathloss_points(
            xs, ys, vs, geom, std::make_pair(out.fits[k].x, out.fits[k].y));
      }
    }
  }

  // Superposition of the fitted sources, reported in dB.
  out.map_db = Grid2D(geom, Unit::dB);
  for (std::size_t r = 0; r < geom.n_rows; ++r) {
    for (std::size_t c = 0; c < geom.n_cols; ++c) {
      double lin = 0.0;
      for (const auto& f : out.fits)
        lin += detail::pathloss_fit_linear_power(f, geom.cell_center_x(c),
                                                 geom.cell_center_y(r), d_min);
      out.map_db.at(r, c) = to_db(lin);
    }
  }
  return out;
}

} // namespace rmk
