#include "rmk/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rmk/errors.hpp"
#include "rmk/estimate.hpp"
#include "rmk/rng.hpp"

namespace rmk {
namespace {

using json = nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(where + ": missing required field '" + key + "'");
  return *it;
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

double get_double(const json& obj, const char* key, const std::string& where) {
  return as_double(require(obj, key, where), where + "." + key);
}

double get_double_or(const json& obj, const char* key, double fallback,
                     const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_double(*it, where + "." + key);
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer())
    throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t get_int_or(const json& obj, const char* key, std::int64_t fallback,
                        const std::string& where) {
  if (obj.find(key) == obj.end()) return fallback;
  return get_int(obj, key, where);
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

GridGeometry parse_area(const json& j) {
  if (!j.is_object()) throw ConfigError("area: expected an object");
  GridGeometry g;
  g.origin_x = get_double(j, "origin_x", "area");
  g.origin_y = get_double(j, "origin_y", "area");
  g.cell_size = get_double(j, "cell_size", "area");
  const auto rows = get_int(j, "n_rows", "area");
  const auto cols = get_int(j, "n_cols", "area");
  if (rows <= 0 || cols <= 0) throw ConfigError("area: grid dimensions must be positive");
  g.n_rows = static_cast<std::size_t>(rows);
  g.n_cols = static_cast<std::size_t>(cols);
  return g;
}

std::vector<Obstacle> expand_random_obstacles(const json& j, const GridGeometry& geom,
                                              std::uint64_t scenario_seed) {
  const std::string where = "obstacles.random";
  const auto count = get_int(j, "count", where);
  if (count < 0) throw ConfigError(where + ".count: must be non-negative");
  const double len_min = get_double(j, "min_length_m", where);
  const double len_max = get_double(j, "max_length_m", where);
  const double loss_min = get_double(j, "loss_db_min", where);
  const double loss_max = get_double(j, "loss_db_max", where);
  if (!(len_min > 0.0) || len_max < len_min)
    throw ConfigError(where + ": length range must satisfy 0 < min <= max");
  if (!(loss_min > 0.0) || loss_max < loss_min)
    throw ConfigError(where + ": loss range must satisfy 0 < min <= max");

  Rng rng(mix_seed(scenario_seed, "obstacles"));
  const double w = geom.width();
  const double h = geom.height();
  std::vector<Obstacle> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const double cx = geom.origin_x + rng.uniform() * w;
    const double cy = geom.origin_y + rng.uniform() * h;
    const double ang = rng.uniform() * 2.0 * std::acos(-1.0);
    const double len = len_min + rng.uniform() * (len_max - len_min);
    const double loss = loss_min + rng.uniform() * (loss_max - loss_min);
    Obstacle o;
    o.x1 = cx - 0.5 * len * std::cos(ang);
    o.y1 = cy - 0.5 * len * std::sin(ang);
    o.x2 = cx + 0.5 * len * std::cos(ang);
    o.y2 = cy + 0.5 * len * std::sin(ang);
    o.penetration_loss_db = loss;
    out.push_back(o);
  }
  return out;
}

Scenario parse_scenario(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  Scenario s;
  s.geom = parse_area(require(j, "area", where));

  const json& ch = require(j, "channels", where);
  if (!ch.is_object()) throw ConfigError(where + ".channels: expected an object");
  const json& centers = require(ch, "centers_hz", where + ".channels");
  if (!centers.is_array() || centers.empty())
    throw ConfigError(where + ".channels.centers_hz: expected a non-empty array");
  s.channels.centers_hz.clear();
  for (const auto& c : centers)
    s.channels.centers_hz.push_back(as_double(c, where + ".channels.centers_hz[]"));
  s.channels.width_hz = get_double(ch, "width_hz", where + ".channels");

  const json& pp = require(j, "propagation", where);
  if (!pp.is_object()) throw ConfigError(where + ".propagation: expected an object");
  const std::string pw = where + ".propagation";
  s.propagation.pathloss_exponent = get_double(pp, "pathloss_exponent", pw);
  s.propagation.shadowing_sigma_db = get_double_or(pp, "shadowing_sigma_db", 0.0, pw);
  s.propagation.decorrelation_distance_m =
      get_double_or(pp, "decorrelation_distance_m", 100.0, pw);
  s.propagation.noise_floor_dbw = get_double_or(pp, "noise_floor_dbw", -140.0, pw);

  const json& txs = require(j, "transmitters", where);
  if (!txs.is_array()) throw ConfigError(where + ".transmitters: expected an array");
  for (const auto& t : txs) {
    const std::string tw = where + ".transmitters[]";
    Transmitter tx;
    tx.id = static_cast<int>(get_int(t, "id", tw));
    tx.x = get_double(t, "x", tw);
    tx.y = get_double(t, "y", tw);
    tx.tx_power_w = get_double(t, "power_w", tw);
    tx.channel_index = static_cast<std::size_t>(get_int_or(t, "channel", 0, tw));
    tx.reference_gain_db = get_double_or(t, "reference_gain_db", -30.0, tw);
    s.transmitters.push_back(tx);
  }

  s.rng_seed = static_cast<std::uint64_t>(get_int_or(j, "seed", 0, where));

  if (auto it = j.find("obstacles"); it != j.end()) {
    if (it->is_array()) {
      for (const auto& o : *it) {
        const std::string ow = where + ".obstacles[]";
        Obstacle ob;
        ob.x1 = get_double(o, "x1", ow);
        ob.y1 = get_double(o, "y1", ow);
        ob.x2 = get_double(o, "x2", ow);
        ob.y2 = get_double(o, "y2", ow);
        ob.penetration_loss_db = get_double(o, "loss_db", ow);
        s.obstacles.push_back(ob);
      }
    } else if (it->is_object() && it->contains("random")) {
      s.obstacles = expand_random_obstacles((*it)["random"], s.geom, s.rng_seed);
    } else {
      throw ConfigError(where + ".obstacles: expected an array or {\"random\": {...}}");
    }
  }

  validate_scenario(s);
  return s;
}

PlacementMode parse_placement(const std::string& name) {
  if (name == "uniform_grid") return PlacementMode::uniform_grid;
  if (name == "uniform_random") return PlacementMode::uniform_random;
  if (name == "custom") return PlacementMode::custom;
  throw ConfigError("sensing.mode: unknown placement mode '" + name + "'");
}

SensingConfig parse_sensing(const json& j) {
  if (!j.is_object()) throw ConfigError("sensing: expected an object");
  SensingConfig sc;
  const auto n = get_int(j, "n_sensors", "sensing");
  if (n <= 0) throw ConfigError("sensing.n_sensors: must be positive");
  sc.n_sensors = static_cast<std::size_t>(n);
  if (j.contains("mode")) sc.mode = parse_placement(get_string(j, "mode", "sensing"));
  sc.noise_sigma_db = get_double_or(j, "noise_sigma_db", 0.0, "sensing");
  if (sc.mode == PlacementMode::custom) {
    const json& pos = require(j, "positions", "sensing");
    if (!pos.is_array()) throw ConfigError("sensing.positions: expected an array");
    for (const auto& p : pos) {
      if (!p.is_array() || p.size() != 2)
        throw ConfigError("sensing.positions[]: expected [x, y]");
      sc.custom_positions.emplace_back(as_double(p[0], "sensing.positions[].x"),
                                       as_double(p[1], "sensing.positions[].y"));
    }
  }
  if (auto it = j.find("quantize"); it != j.end()) {
    QuantizeConfig q;
    q.bits = static_cast<int>(get_int(*it, "bits", "sensing.quantize"));
    q.db_min = get_double(*it, "db_min", "sensing.quantize");
    q.db_max = get_double(*it, "db_max", "sensing.quantize");
    if (q.bits < 1 || q.bits > 16)
      throw ConfigError("sensing.quantize.bits: must be in [1, 16]");
    if (!(q.db_min < q.db_max))
      throw ConfigError("sensing.quantize: db_min must be below db_max");
    sc.quantize = q;
  }
  if (auto it = j.find("filter"); it != j.end()) {
    FilterConfig f;
    f.k_mad = get_double_or(*it, "k_mad", 6.0, "sensing.filter");
    f.neighbor_count = static_cast<std::size_t>(
        get_int_or(*it, "neighbor_count", 6, "sensing.filter"));
    if (!(f.k_mad > 0.0)) throw ConfigError("sensing.filter.k_mad: must be positive");
    if (f.neighbor_count < 2)
      throw ConfigError("sensing.filter.neighbor_count: must be at least 2");
    sc.filter = f;
  }
  return sc;
}

EstimatorConfig parse_estimator(const json& j) {
  if (!j.is_object()) throw ConfigError("estimators[]: expected an object");
  EstimatorConfig ec;
  ec.method = method_from_name(get_string(j, "method", "estimators[]"));
  ec.d_exp = get_double_or(j, "d_exp", 2.0, "estimators[]");
  if (!(ec.d_exp > 0.0)) throw ConfigError("estimators[].d_exp: must be positive");
  if (j.contains("rbf_kind"))
    ec.rbf_kind = rbf_kind_from_name(get_string(j, "rbf_kind", "estimators[]"));
  ec.rbf_shape = get_double_or(j, "rbf_shape", 0.0, "estimators[]");
  ec.rbf_ridge = get_double_or(j, "rbf_ridge", 0.0, "estimators[]");
  if (ec.rbf_shape < 0.0) throw ConfigError("estimators[].rbf_shape: must be non-negative");
  if (ec.rbf_ridge < 0.0) throw ConfigError("estimators[].rbf_ridge: must be non-negative");
  if (auto it = j.find("variogram"); it != j.end()) {
    Variogram v;
    v.nugget = get_double(*it, "nugget", "estimators[].variogram");
    v.sill = get_double(*it, "sill", "estimators[].variogram");
    v.range = get_double(*it, "range", "estimators[].variogram");
    ec.variogram = v;
  }
  ec.variogram_bins = static_cast<std::size_t>(
      get_int_or(j, "variogram_bins", 12, "estimators[]"));
  ec.variogram_max_lag = get_double_or(j, "variogram_max_lag", 0.0, "estimators[]");
  const auto n_tx = get_int_or(j, "n_tx", 1, "estimators[]");
  if (n_tx < 1) throw ConfigError("estimators[].n_tx: must be at least 1");
  ec.n_tx = static_cast<std::size_t>(n_tx);
  return ec;
}

TemporalConfig parse_temporal(const json& j) {
  if (!j.is_object()) throw ConfigError("temporal: expected an object");
  TemporalConfig tc;
  const auto win = get_int_or(j, "window_length", 1, "temporal");
  const auto epochs = get_int_or(j, "epochs", 1, "temporal");
  if (win < 1) throw ConfigError("temporal.window_length: must be at least 1");
  if (epochs < 1) throw ConfigError("temporal.epochs: must be at least 1");
  tc.window_length = static_cast<std::size_t>(win);
  tc.epochs = static_cast<std::size_t>(epochs);
  tc.tile_bits = static_cast<int>(get_int_or(j, "tile_bits", 8, "temporal"));
  const auto ts = get_int_or(j, "tile_size", 16, "temporal");
  if (tc.tile_bits < 1 || tc.tile_bits > 16)
    throw ConfigError("temporal.tile_bits: must be in [1, 16]");
  if (ts < 8) throw ConfigError("temporal.tile_size: must be at least 8");
  tc.tile_size = static_cast<std::size_t>(ts);
  tc.change_threshold_db = get_double_or(j, "change_threshold_db", 1.0, "temporal");
  if (!(tc.change_threshold_db > 0.0))
    throw ConfigError("temporal.change_threshold_db: must be positive");
  return tc;
}

AnalyticsConfig parse_analytics(const json& j) {
  if (!j.is_object()) throw ConfigError("analytics: expected an object");
  AnalyticsConfig ac;
  ac.exclusion_radius_cells =
      get_double_or(j, "exclusion_radius_cells", 0.0, "analytics");
  ac.sinr_threshold_db = get_double_or(j, "sinr_threshold_db", 0.0, "analytics");
  if (auto it = j.find("routes"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("analytics.routes: expected an array");
    for (const auto& r : *it) {
      Route route;
      const json& wps = require(r, "waypoints", "analytics.routes[]");
      if (!wps.is_array() || wps.size() < 2)
        throw ConfigError("analytics.routes[].waypoints: need at least two points");
      for (const auto& p : wps) {
        if (!p.is_array() || p.size() != 2)
          throw ConfigError("analytics.routes[].waypoints[]: expected [x, y]");
        route.waypoints.emplace_back(as_double(p[0], "route waypoint x"),
                                     as_double(p[1], "route waypoint y"));
      }
      const json& serving = require(r, "serving", "analytics.routes[]");
      if (!serving.is_array() || serving.size() != route.waypoints.size() - 1)
        throw ConfigError(
            "analytics.routes[].serving: need one station index per segment");
      for (const auto& sv : serving) {
        if (!sv.is_number_integer())
          throw ConfigError("analytics.routes[].serving[]: expected an integer");
        route.serving_station.push_back(sv.get<std::size_t>());
      }
      ac.routes.push_back(std::move(route));
    }
  }
  if (auto it = j.find("storage"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("analytics.storage: expected an array");
    for (const auto& r : *it) {
      const std::string rw = "analytics.storage[]";
      StorageRow row;
      row.area_km2 = get_double(r, "area_km2", rw);
      row.cell_m = get_double(r, "cell_m", rw);
      row.band_mhz = get_double(r, "band_mhz", rw);
      row.chan_mhz = get_double(r, "chan_mhz", rw);
      row.duration_h = get_double(r, "duration_h", rw);
      row.step_min = get_double(r, "step_min", rw);
      row.bits = static_cast<int>(get_int_or(r, "bits", 8, rw));
      ac.storage.push_back(row);
    }
  }
  if (auto it = j.find("anomaly"); it != j.end()) {
    AnomalyConfig an;
    an.k_sigma = get_double_or(*it, "k_sigma", 5.0, "analytics.anomaly");
    if (!(an.k_sigma > 0.0))
      throw ConfigError("analytics.anomaly.k_sigma: must be positive");
    if (auto inj = it->find("inject"); inj != it->end()) {
      AnomalyInject ai;
      ai.x = get_double(*inj, "x", "analytics.anomaly.inject");
      ai.y = get_double(*inj, "y", "analytics.anomaly.inject");
      ai.excess_db = get_double(*inj, "excess_db", "analytics.anomaly.inject");
      ai.radius_m = get_double(*inj, "radius_m", "analytics.anomaly.inject");
      if (!(ai.radius_m > 0.0))
        throw ConfigError("analytics.anomaly.inject.radius_m: must be positive");
      an.inject = ai;
    }
    ac.anomaly = an;
  }
  return ac;
}

} // namespace

Scenario load_scenario(const std::string& path) {
  return parse_scenario(parse_file(path), "scenario");
}

RunConfig load_run_config(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");

  RunConfig rc;
  if (j.contains("scenario")) {
    rc.scenario = parse_scenario(j["scenario"], "scenario");
  } else if (j.contains("scenario_file")) {
    std::filesystem::path sp(get_string(j, "scenario_file", "config"));
    if (sp.is_relative()) sp = std::filesystem::path(path).parent_path() / sp;
    rc.scenario = load_scenario(sp.string());
  } else {
    throw ConfigError(path + ": needs either 'scenario' or 'scenario_file'");
  }

  // Config-level seed overrides the scenario's own; the CLI flag overrides
  // both, upstream of this call.
  if (j.contains("seed")) {
    rc.seed = static_cast<std::uint64_t>(get_int(j, "seed", "config"));
    rc.scenario.rng_seed = rc.seed;
  } else {
    rc.seed = rc.scenario.rng_seed;
  }

  rc.sensing = parse_sensing(require(j, "sensing", "config"));
  if (rc.sensing.mode == PlacementMode::custom &&
      rc.sensing.custom_positions.size() != rc.sensing.n_sensors)
    throw ConfigError("sensing.positions: length must equal n_sensors");

  const json& ests = require(j, "estimators", "config");
  if (!ests.is_array() || ests.empty())
    throw ConfigError("estimators: expected a non-empty array");
  for (const auto& e : ests) rc.estimators.push_back(parse_estimator(e));

  if (j.contains("temporal")) rc.temporal = parse_temporal(j["temporal"]);
  if (j.contains("analytics")) rc.analytics = parse_analytics(j["analytics"]);
  return rc;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["area"] = {{"origin_x", s.geom.origin_x},
               {"origin_y", s.geom.origin_y},
               {"cell_size", s.geom.cell_size},
               {"n_rows", s.geom.n_rows},
               {"n_cols", s.geom.n_cols}};
  j["channels"] = {{"centers_hz", s.channels.centers_hz},
                   {"width_hz", s.channels.width_hz}};
  j["propagation"] = {
      {"pathloss_exponent", s.propagation.pathloss_exponent},
      {"shadowing_sigma_db", s.propagation.shadowing_sigma_db},
      {"decorrelation_distance_m", s.propagation.decorrelation_distance_m},
      {"noise_floor_dbw", s.propagation.noise_floor_dbw}};
  j["transmitters"] = json::array();
  for (const auto& tx : s.transmitters)
    j["transmitters"].push_back({{"id", tx.id},
                                 {"x", tx.x},
                                 {"y", tx.y},
                                 {"power_w", tx.tx_power_w},
                                 {"channel", tx.channel_index},
                                 {"reference_gain_db", tx.reference_gain_db}});
  j["obstacles"] = json::array();
  for (const auto& o : s.obstacles)
    j["obstacles"].push_back({{"x1", o.x1},
                              {"y1", o.y1},
                              {"x2", o.x2},
                              {"y2", o.y2},
                              {"loss_db", o.penetration_loss_db}});
  j["seed"] = s.rng_seed;
  return j.dump(2) + "\n";
}

} // namespace rmk
