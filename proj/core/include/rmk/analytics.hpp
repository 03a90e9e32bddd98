#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rmk/temporal.hpp"

namespace rmk {

struct ErrorReport {
  double rmse_db = 0.0;
  double mae_db = 0.0;
  double max_abs_db = 0.0;
  std::vector<Grid2D> error_db;  // signed estimate - truth, per channel
  Grid2D included;               // 1 = cell counted, 0 = excluded
};

// dB-domain error metrics over non-excluded cells; exclusion_centers get a
// disk of exclusion_radius_cells around each (transmitter sites, usually).
ErrorReport compare_maps(const BandGrid& estimate, const BandGrid& truth,
                         const std::vector<std::pair<double, double>>& exclusion_centers = {},
                         double exclusion_radius_cells = 0.0);

// Half-open axis-aligned rectangle [x0, x1) x [y0, y1): cell membership by
// cell center, so splitting a region at a grid line never double-counts.
struct RectRegion {
  double x0 = 0.0, y0 = 0.0;
  double x1 = 0.0, y1 = 0.0;
};

// Linear-domain Riemann sum (power x cell area) over the region, summed
// over channels [channel_first, channel_last]. Result in W * m^2.
double integrate_field(const BandGrid& map, const RectRegion& region,
                       std::size_t channel_first, std::size_t channel_last);

enum class ExtremumKind { max, min };

struct ExtremumPoint {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Interior cells strictly dominating all 8 neighbors, strongest first,
// greedily suppressing anything within min_separation_cells of a kept one.
std::vector<ExtremumPoint> local_extrema(const Grid2D& map, ExtremumKind kind,
                                         double min_separation_cells);

// Central differences on the interior, one-sided at the borders; y points
// north (toward row 0). Returns (d/dx, d/dy).
std::pair<Grid2D, Grid2D> gradient_central(const Grid2D& map);

struct DeadZoneReport {
  Grid2D mask; // 1 = dead
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> components;
};

// Best-server SINR per cell: max over stations of P_b*g_b / (I - P_b*g_b + N)
// in linear watts, the serving term removed from the interference and
// clamped at zero. Dead iff best SINR < threshold; components 4-connected.
DeadZoneReport dead_zones(const std::vector<Grid2D>& gain_maps_db,
                          const Grid2D& interference, const std::vector<double>& tx_powers_w,
                          double noise_dbw, double sinr_threshold_db);

struct Route {
  std::vector<std::pair<double, double>> waypoints;
  std::vector<int> serving_station; // index into gain_maps, one per segment
};

// SINR in dB at each waypoint with the segment's assigned server; maps are
// sampled bilinearly in dB. Waypoint i uses segment i (the last waypoint
// uses the final segment).
std::vector<double> sinr_along_route(const Route& route,
                                     const std::vector<Grid2D>& gain_maps_db,
                                     const Grid2D& interference,
                                     const std::vector<double>& tx_powers_w,
                                     double noise_dbw);

struct AnomalyCluster {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double mean_deviation_db = 0.0;
};

struct AnomalyReport {
  Grid2D flagged;      // 1 = |z| above threshold
  Grid2D z_score;
  Grid2D deviation_db; // current - historical mean
  std::vector<AnomalyCluster> clusters;
};

// Per-cell z-test of the current map against the epoch history (dB domain,
// sample std floored at 0.5 dB), then 4-connected clustering of the flags.
AnomalyReport detect_anomaly(const MapSeries& history, const BandGrid& current,
                             double k_sigma, std::size_t channel = 0);

struct RogueEstimate {
  double x = 0.0;
  double y = 0.0;
  double excess_power_w = 0.0; // linear excess integrated over the cluster
};

// Largest positive-deviation cluster (ties to the earlier cluster in
// row-major order): excess-power-weighted centroid and the integrated
// linear excess of current over the historical mean, clamped at zero.
// Errors when no cluster deviates positive.
RogueEstimate locate_rogue(const AnomalyReport& report, const BandGrid& current,
                           std::size_t channel = 0);

} // namespace rmk
