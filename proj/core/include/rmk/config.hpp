#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmk/analytics.hpp"
#include "rmk/scenario.hpp"

namespace rmk {

struct QuantizeConfig {
  int bits = 8;
  double db_min = -150.0;
  double db_max = -30.0;
};

struct FilterConfig {
  double k_mad = 6.0;
  std::size_t neighbor_count = 6;
};

struct SensingConfig {
  std::size_t n_sensors = 100;
  PlacementMode mode = PlacementMode::uniform_grid;
  std::vector<std::pair<double, double>> custom_positions;
  double noise_sigma_db = 0.0;
  std::optional<QuantizeConfig> quantize;
  std::optional<FilterConfig> filter;
};

struct TemporalConfig {
  std::size_t window_length = 1;
  std::size_t epochs = 1;
  int tile_bits = 8;
  std::size_t tile_size = 16;
  double change_threshold_db = 1.0;
};

struct StorageRow {
  double area_km2 = 0.0;
  double cell_m = 0.0;
  double band_mhz = 0.0;
  double chan_mhz = 0.0;
  double duration_h = 0.0;
  double step_min = 0.0;
  int bits = 8;
};

struct AnomalyInject {
  double x = 0.0;
  double y = 0.0;
  double excess_db = 0.0;
  double radius_m = 0.0;
};

struct AnomalyConfig {
  double k_sigma = 5.0;
  std::optional<AnomalyInject> inject;
};

struct AnalyticsConfig {
  double exclusion_radius_cells = 0.0;
  double sinr_threshold_db = 0.0;
  std::vector<Route> routes;
  std::vector<StorageRow> storage;
  std::optional<AnomalyConfig> anomaly;
};

struct RunConfig {
  Scenario scenario;
  std::uint64_t seed = 0;
  SensingConfig sensing;
  std::vector<EstimatorConfig> estimators;
  TemporalConfig temporal;
  AnalyticsConfig analytics;
};

// JSON files; malformed structure or values raise ConfigError. A scenario
// block may be inline ("scenario") or referenced ("scenario_file", resolved
// relative to the config file). A scenario's "obstacles" accepts either an
// explicit list or {"random": {...}} expanded deterministically from the
// scenario seed.
Scenario load_scenario(const std::string& path);
RunConfig load_run_config(const std::string& path);

// Resolved-scenario echo with expanded obstacles; stable key order.
std::string scenario_to_json(const Scenario& s);

} // namespace rmk
