#include "rmk/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmk {
namespace {

void require_same_geometry(const GridGeometry& a, const GridGeometry& b,
                           const char* what) {
  if (!(a == b))
    throw DataError(std::string(what) + ": geometry mismatch");
}

// 4-connected components of a 0/1 mask, discovered in row-major order.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>>
connected_components(const Grid2D& mask) {
  const std::size_t rows = mask.n_rows(), cols = mask.n_cols();
  std::vector<char> seen(rows * cols, 0);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> comps;
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask.at(r, c) == 0.0 || seen[r * cols + c])
        continue;
      comps.emplace_back();
      stack.assign(1, {r, c});
      seen[r * cols + c] = 1;
      while (!stack.empty()) {
        auto [cr, cc] = stack.back();
        stack.pop_back();
        comps.back().push_back({cr, cc});
        const long moves[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (const auto& mv : moves) {
          const long nr = static_cast<long>(cr) + mv[0];
          const long nc = static_cast<long>(cc) + mv[1];
          if (nr < 0 || nc < 0 || nr >= static_cast<long>(rows) ||
              nc >= static_cast<long>(cols))
            continue;
          const std::size_t idx = static_cast<std::size_t>(nr) * cols +
                                  static_cast<std::size_t>(nc);
          if (mask.at(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)) != 0.0 &&
              !seen[idx]) {
            seen[idx] = 1;
            stack.push_back({static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)});
          }
        }
      }
      std::sort(comps.back().begin(), comps.back().end());
    }
  }
  return comps;
}

} // namespace

ErrorReport compare_maps(const BandGrid& estimate, const BandGrid& truth,
                         const std::vector<std::pair<double, double>>& exclusion_centers,
                         double exclusion_radius_cells) {
  if (estimate.n_channels() != truth.n_channels() || estimate.n_channels() == 0)
    throw DataError("compare_maps: channel count mismatch");
  require_same_geometry(estimate.geom(), truth.geom(), "compare_maps");

  const GridGeometry& geom = truth.geom();
  ErrorReport rep;
  rep.included = Grid2D(geom, Unit::dB, 1.0);
  const double radius_m = exclusion_radius_cells * geom.cell_size;
  for (std::size_t r = 0; r < geom.n_rows; ++r)
    for (std::size_t c = 0; c < geom.n_cols; ++c)
      for (const auto& [ex, ey] : exclusion_centers)
        if (std::hypot(geom.cell_center_x(c) - ex, geom.cell_center_y(r) - ey) <=
            radius_m) {
          rep.included.at(r, c) = 0.0;
          break;
        }

  double sq = 0.0, abs_sum = 0.0, max_abs = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < truth.n_channels(); ++k) {
    const Grid2D est_db = grid_to_db(estimate.channel(k));
    const Grid2D tru_db = grid_to_db(truth.channel(k));
    Grid2D err(geom, Unit::dB, 0.0);
    for (std::size_t r = 0; r < geom.n_rows; ++r)
      for (std::size_t c = 0; c < geom.n_cols; ++c) {
        const double e = est_db.at(r, c) - tru_db.at(r, c);
        err.at(r, c) = e;
        if (rep.included.at(r, c) == 0.0)
          continue;
        sq += e * e;
        abs_sum += std::fabs(e);
        max_abs = std::max(max_abs, std::fabs(e));
        ++n;
      }
    rep.error_db.push_back(std::move(err));
  }
  if (n == 0)
    throw DataError("compare_maps: every cell excluded");
  rep.rmse_db = std::sqrt(sq / static_cast<double>(n));
  rep.mae_db = abs_sum / static_cast<double>(n);
  rep.max_abs_db = max_abs;
  return rep;
}

double integrate_field(const BandGrid& map, const RectRegion& region,
                       std::size_t channel_first, std::size_t channel_last) {
  if (map.n_channels() == 0)
    throw DataError("integrate_field: empty band grid");
  if (channel_first > channel_last || channel_last >= map.n_channels())
    throw DataError("integrate_field: bad channel range");
  if (!(region.x1 > region.x0) || !(region.y1 > region.y0))
    throw DataError("integrate_field: empty region");

  const GridGeometry& geom = map.geom();
  const double cell_area = geom.cell_size * geom.cell_size;
  double total = 0.0;
  std::size_t cells = 0;
  for (std::size_t k = channel_first; k <= channel_last; ++k) {
    const Grid2D lin = grid_to_linear(map.channel(k));
    for (std::size_t r = 0; r < geom.n_rows; ++r) {
      const double cy = geom.cell_center_y(r);
      if (cy < region.y0 || cy >= region.y1)
        continue;
      for (std::size_t c = 0; c < geom.n_cols; ++c) {
        const double cx = geom.cell_center_x(c);
        if (cx < region.x0 || cx >= region.x1)
          continue;
        total += lin.at(r, c) * cell_area;
        ++cells;
      }
    }
  }
  if (cells == 0)
    throw DataError("integrate_field: region covers no cell centers");
  return total;
}

std::vector<ExtremumPoint> local_extrema(const Grid2D& map, ExtremumKind kind,
                                         double min_separation_cells) {
  if (map.n_rows() < 3 || map.n_cols() < 3)
    throw DataError("local_extrema needs at least a 3x3 grid");

  std::vector<ExtremumPoint> found;
  for (std::size_t r = 1; r + 1 < map.n_rows(); ++r) {
    for (std::size_t c = 1; c + 1 < map.n_cols(); ++c) {
      const double v = map.at(r, c);
      bool strict = true;
      for (long dr = -1; dr <= 1 && strict; ++dr)
        for (long dc = -1; dc <= 1 && strict; ++dc) {
          if (dr == 0 && dc == 0)
            continue;
          const double w = map.at(static_cast<std::size_t>(static_cast<long>(r) + dr),
                                  static_cast<std::size_t>(static_cast<long>(c) + dc));
          if (kind == ExtremumKind::max ? !(v > w) : !(v < w))
            strict = false;
        }
      if (strict)
        found.push_back({r, c, v});
    }
  }
  // Strongest first; a kept extremum suppresses weaker ones nearby.
  std::stable_sort(found.begin(), found.end(),
                   [&](const ExtremumPoint& a, const ExtremumPoint& b) {
                     return kind == ExtremumKind::max ? a.value > b.value
                                                      : a.value < b.value;
                   });
  std::vector<ExtremumPoint> kept;
  for (const auto& p : found) {
    bool clear = true;
    for (const auto& q : kept) {
      const double dr = static_cast<double>(p.row) - static_cast<double>(q.row);
      const double dc = static_cast<double>(p.col) - static_cast<double>(q.col);
      if (std::hypot(dr, dc) < min_separation_cells) {
        clear = false;
        break;
      }
    }
    if (clear)
      kept.push_back(p);
  }
  return kept;
}

std::pair<Grid2D, Grid2D> gradient_central(const Grid2D& map) {
  const std::size_t rows = map.n_rows(), cols = map.n_cols();
  if (rows < 2 || cols < 2)
    throw DataError("gradient needs at least 2x2 cells");
  const double h = map.geom().cell_size;
  Grid2D gx(map.geom(), map.unit(), 0.0);
  Grid2D gy(map.geom(), map.unit(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c == 0)
        gx.at(r, c) = (map.at(r, 1) - map.at(r, 0)) / h;
      else if (c + 1 == cols)
        gx.at(r, c) = (map.at(r, cols - 1) - map.at(r, cols - 2)) / h;
      else
        gx.at(r, c) = (map.at(r, c + 1) - map.at(r, c - 1)) / (2.0 * h);
      // Row 0 is north, so +y runs against the row index.
      if (r == 0)
        gy.at(r, c) = (map.at(0, c) - map.at(1, c)) / h;
      else if (r + 1 == rows)
        gy.at(r, c) = (map.at(rows - 2, c) - map.at(rows - 1, c)) / h;
      else
        gy.at(r, c) = (map.at(r - 1, c) - map.at(r + 1, c)) / (2.0 * h);
    }
  }
  return {std::move(gx), std::move(gy)};
}

namespace {

double best_server_sinr_linear(const std::vector<double>& gains_db,
                               const std::vector<double>& tx_powers_w,
                               double interference_w, double noise_w) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < gains_db.size(); ++b) {
    const double signal = tx_powers_w[b] * std::pow(10.0, gains_db[b] / 10.0);
    const double other = std::max(interference_w - signal, 0.0);
    best = std::max(best, signal / (other + noise_w));
  }
  return best;
}

} // namespace

DeadZoneReport dead_zones(const std::vector<Grid2D>& gain_maps_db,
                          const Grid2D& interference, const std::vector<double>& tx_powers_w,
                          double noise_dbw, double sinr_threshold_db) {
  if (gain_maps_db.empty() || gain_maps_db.size() != tx_powers_w.size())
    throw DataError("dead_zones: need one gain map per transmit power");
  for (const auto& g : gain_maps_db)
    require_same_geometry(g.geom(), interference.geom(), "dead_zones");

  const Grid2D interf_lin = grid_to_linear(interference);
  const double noise_w = from_db(noise_dbw);
  const double threshold = std::pow(10.0, sinr_threshold_db / 10.0);
  const GridGeometry& geom = interference.geom();

  DeadZoneReport rep;
  rep.mask = Grid2D(geom, Unit::dB, 0.0);
  std::vector<double> gains(gain_maps_db.size());
  for (std::size_t r = 0; r < geom.n_rows; ++r) {
    for (std::size_t c = 0; c < geom.n_cols; ++c) {
      for (std::size_t b = 0; b < gain_maps_db.size(); ++b)
        gains[b] = gain_maps_db[b].at(r, c);
      const double sinr =
          best_server_sinr_linear(gains, tx_powers_w, interf_lin.at(r, c), noise_w);
      if (sinr < threshold)
        rep.mask.at(r, c) = 1.0;
    }
  }
  rep.components = connected_components(rep.mask);
  return rep;
}

std::vector<double> sinr_along_route(const Route& route,
                                     const std::vector<Grid2D>& gain_maps_db,
                                     const Grid2D& interference,
                                     const std::vector<double>& tx_powers_w,
                                     double noise_dbw) {
  if (route.waypoints.size() < 2)
    throw DataError("route needs at least two waypoints");
  if (route.serving_station.size() + 1 != route.waypoints.size())
    throw DataError("route needs one serving station per segment");
  if (gain_maps_db.empty() || gain_maps_db.size() != tx_powers_w.size())
    throw DataError("route: need one gain map per transmit power");

  const Grid2D interf_db = grid_to_db(interference);
  const double noise_w = from_db(noise_dbw);
  std::vector<double> out;
  for (std::size_t i = 0; i < route.waypoints.size(); ++i) {
    const auto [x, y] = route.waypoints[i];
    const std::size_t seg = std::min(i, route.serving_station.size() - 1);
    const int b = route.serving_station[seg];
    if (b < 0 || static_cast<std::size_t>(b) >= gain_maps_db.size())
      throw DataError("route serving station out of range");
    const double gain_db = gain_maps_db[static_cast<std::size_t>(b)].sample_bilinear(x, y);
    const double signal = tx_powers_w[static_cast<std::size_t>(b)] *
                          std::pow(10.0, gain_db / 10.0);
    const double interf = from_db(interf_db.sample_bilinear(x, y));
    const double other = std::max(interf - signal, 0.0);
    out.push_back(10.0 * std::log10(signal / (other + noise_w)));
  }
  return out;
}

AnomalyReport detect_anomaly(const MapSeries& history, const BandGrid& current,
                             double k_sigma, std::size_t channel) {
  if (history.epochs().size() < 3)
    throw DataError("anomaly detection needs at least 3 history epochs");
  if (channel >= current.n_channels())
    throw DataError("anomaly channel out of range");
  const GridGeometry& geom = current.geom();
  for (const auto& ep : history.epochs())
    require_same_geometry(ep.estimate.geom(), geom, "detect_anomaly");

  const std::size_t n = history.epochs().size();
  const Grid2D cur = grid_to_db(current.channel(channel));
  Grid2D mean(geom, Unit::dB, 0.0);
  Grid2D var(geom, Unit::dB, 0.0);
  for (const auto& ep : history.epochs()) {
    const Grid2D& g = ep.estimate.channel(channel);
    for (std::size_t i = 0; i < mean.size(); ++i)
      mean.values()[i] += g.values()[i];
  }
  for (auto& v : mean.values())
    v /= static_cast<double>(n);
  for (const auto& ep : history.epochs()) {
    const Grid2D& g = ep.estimate.channel(channel);
    for (std::size_t i = 0; i < var.size(); ++i) {
      const double d = g.values()[i] - mean.values()[i];
      var.values()[i] += d * d;
    }
  }

  AnomalyReport rep;
  rep.flagged = Grid2D(geom, Unit::dB, 0.0);
  rep.z_score = Grid2D(geom, Unit::dB, 0.0);
  rep.deviation_db = Grid2D(geom, Unit::dB, 0.0);
  constexpr double kStdFloor = 0.5; // dB
  for (std::size_t i = 0; i < var.values().size(); ++i) {
    const double sd =
        std::max(std::sqrt(var.values()[i] / static_cast<double>(n - 1)), kStdFloor);
    const double dev = cur.values()[i] - mean.values()[i];
    rep.deviation_db.values()[i] = dev;
    const double z = dev / sd;
    rep.z_score.values()[i] = z;
    if (std::fabs(z) > k_sigma)
      rep.flagged.values()[i] = 1.0;
  }

  for (auto& cells : connected_components(rep.flagged)) {
    AnomalyCluster cl;
    cl.cells = std::move(cells);
    double dev_sum = 0.0;
    for (const auto& [r, c] : cl.cells) {
      cl.centroid_x += geom.cell_center_x(c);
      cl.centroid_y += geom.cell_center_y(r);
      dev_sum += rep.deviation_db.at(r, c);
    }
    const double sz = static_cast<double>(cl.cells.size());
    cl.centroid_x /= sz;
    cl.centroid_y /= sz;
    cl.mean_deviation_db = dev_sum / sz;
    rep.clusters.push_back(std::move(cl));
  }
  return rep;
}

RogueEstimate locate_rogue(const AnomalyReport& report, const BandGrid& current,
                           std::size_t channel) {
  if (channel >= current.n_channels())
    throw DataError("rogue channel out of range");
  const GridGeometry& geom = current.geom();
  require_same_geometry(report.deviation_db.geom(), geom, "locate_rogue");

  const AnomalyCluster* best = nullptr;
  for (const auto& cl : report.clusters) {
    if (cl.mean_deviation_db <= 0.0)
      continue;
    // Clusters come in row-major discovery order, so > keeps the earlier
    // one on ties.
    if (!best || cl.cells.size() > best->cells.size())
      best = &cl;
  }
  if (!best)
    throw DataError("no positive-deviation cluster to localize");

  const Grid2D cur = grid_to_db(current.channel(channel));
  const double cell_area = geom.cell_size * geom.cell_size;
  RogueEstimate est;
  double wsum = 0.0;
  for (const auto& [r, c] : best->cells) {
    const double cur_lin = std::pow(10.0, cur.at(r, c) / 10.0);
    const double mean_lin =
        std::pow(10.0, (cur.at(r, c) - report.deviation_db.at(r, c)) / 10.0);
    const double excess = std::max(cur_lin - mean_lin, 0.0);
    wsum += excess;
    est.x += excess * geom.cell_center_x(c);
    est.y += excess * geom.cell_center_y(r);
    est.excess_power_w += excess * cell_area;
  }
  if (!(wsum > 0.0))
    throw DataError("cluster has no positive linear excess");
  est.x /= wsum;
  est.y /= wsum;
  return est;
}

} // namespace rmk
