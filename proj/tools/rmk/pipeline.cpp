#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "rmk/analytics.hpp"
#include "rmk/errors.hpp"
#include "rmk/rng.hpp"
#include "rmk/scenario.hpp"
#include "rmk/temporal.hpp"
#include "table.hpp"

namespace rmkcli {
namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw rmk::DataError("cannot write " + path);
  os << text;
  if (!os) throw rmk::DataError("write failed: " + path);
}

rmk::MeasurementSet channel_only(const rmk::MeasurementSet& ms, std::size_t channel) {
  rmk::MeasurementSet out;
  out.geom = ms.geom;
  out.sensors = ms.sensors;
  for (const auto& m : ms.measurements)
    if (m.channel_index == channel) out.measurements.push_back(m);
  return out;
}

std::vector<std::pair<double, double>> transmitter_positions(const rmk::Scenario& s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& tx : s.transmitters) out.emplace_back(tx.x, tx.y);
  return out;
}

double roundtrip_max_err_db(const rmk::MapSeries& series) {
  const rmk::BandGrid decoded = rmk::dequantize_tiles(series.tiles());
  const rmk::BandGrid& ref = series.committed_map();
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.n_channels(); ++k)
    for (std::size_t i = 0; i < ref.geom().n_rows; ++i)
      for (std::size_t j = 0; j < ref.geom().n_cols; ++j)
        worst = std::max(worst, std::abs(decoded.channel(k).at(i, j) -
                                         ref.channel(k).at(i, j)));
  return worst;
}

// History series shared by the temporal table and anomaly detection.
rmk::MapSeries build_series(const rmk::RunConfig& rc, const rmk::BandGrid& truth,
                            const rmk::EstimatorConfig& est, Table* temporal_table) {
  rmk::MapSeries series(rc.temporal.window_length);
  for (std::size_t e = 0; e < rc.temporal.epochs; ++e) {
    const long t = static_cast<long>(e);
    series.window_update(sense_epoch(rc, truth, t), est, truth.n_channels());
    if (e == 0) {
      series.commit_tiles(rc.temporal.tile_bits, rc.temporal.tile_size);
      if (temporal_table)
        temporal_table->add_row({num(t), num(0.0), num(roundtrip_max_err_db(series))});
    } else {
      const auto [tiles, fraction] = series.incremental_update(
          series.epochs().back().estimate, rc.temporal.change_threshold_db);
      (void)tiles;
      if (temporal_table)
        temporal_table->add_row({num(t), num(fraction), num(roundtrip_max_err_db(series))});
    }
  }
  return series;
}

} // namespace

ResolvedRun resolve_run(const GlobalOptions& opt) {
  ResolvedRun run;
  run.config = rmk::load_run_config(opt.config_path);
  if (opt.seed) {
    run.config.seed = *opt.seed;
    run.config.scenario.rng_seed = *opt.seed;
  }
  if (!opt.methods.empty()) {
    const auto keep = split_list(opt.methods);
    for (const auto& name : keep) rmk::method_from_name(name);
    std::vector<rmk::EstimatorConfig> filtered;
    for (const auto& ec : run.config.estimators)
      if (std::find(keep.begin(), keep.end(), rmk::method_name(ec.method)) != keep.end())
        filtered.push_back(ec);
    if (filtered.empty())
      throw rmk::ConfigError("--methods filter removed every configured estimator");
    run.config.estimators = std::move(filtered);
  }

  std::map<std::string, int> total, seen;
  for (const auto& ec : run.config.estimators) ++total[rmk::method_name(ec.method)];
  for (const auto& ec : run.config.estimators) {
    const std::string base = rmk::method_name(ec.method);
    const int k = ++seen[base];
    run.estimator_names.push_back(total[base] > 1 ? base + "_" + std::to_string(k)
                                                  : base);
  }
  return run;
}

rmk::MeasurementSet sense_epoch(const rmk::RunConfig& rc, const rmk::BandGrid& truth,
                                long time_index) {
  const auto& sc = rc.sensing;
  const auto sensors =
      rmk::place_sensors(rc.scenario.geom, sc.n_sensors, sc.mode,
                         rmk::mix_seed(rc.seed, "placement"), sc.custom_positions);
  const std::uint64_t noise_seed = rmk::mix_seed(
      rmk::mix_seed(rc.seed, "noise"), static_cast<std::uint64_t>(time_index));
  rmk::MeasurementSet ms = rmk::synthesize_measurements(
      truth, sensors, sc.noise_sigma_db, noise_seed, time_index);
  if (sc.quantize)
    ms = rmk::quantize_measurements(ms, sc.quantize->bits, sc.quantize->db_min,
                                    sc.quantize->db_max);
  if (sc.filter)
    ms = rmk::filter_bad_data(ms, sc.filter->k_mad, sc.filter->neighbor_count);
  return ms;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw rmk::DataError("cannot create directory " + path);
}

void save_band(const rmk::BandGrid& map_db, const std::string& dir,
               const std::string& stem) {
  ensure_dir(dir);
  for (std::size_t k = 0; k < map_db.n_channels(); ++k)
    rmk::save_grid(map_db.channel(k), dir + "/" + stem + "_chan" + num(k) + ".grid");
}

int run_generate(const GlobalOptions& opt) {
  const ResolvedRun run = resolve_run(opt);
  const rmk::Scenario& s = run.config.scenario;
  const rmk::BandGrid truth_db = rmk::band_to_db(rmk::generate_ground_truth(s));

  ensure_dir(opt.out_dir);
  save_band(truth_db, opt.out_dir + "/truth", "truth");
  write_text(opt.out_dir + "/scenario.json", rmk::scenario_to_json(s));

  if (!opt.quiet)
    std::cout << "generate: " << truth_db.n_channels() << " channel(s), "
              << s.geom.n_rows << "x" << s.geom.n_cols << " cells, "
              << s.transmitters.size() << " transmitter(s), seed "
              << run.config.seed << "\n";
  return 0;
}

int run_estimate(const GlobalOptions& opt) {
  const ResolvedRun run = resolve_run(opt);
  const rmk::RunConfig& rc = run.config;
  const rmk::BandGrid truth = rmk::generate_ground_truth(rc.scenario);
  const rmk::MeasurementSet ms = sense_epoch(rc, truth, 0);

  ensure_dir(opt.out_dir);
  rmk::save_measurements(ms, opt.out_dir + "/measurements.csv");

  for (std::size_t i = 0; i < rc.estimators.size(); ++i) {
    const rmk::EstimatorConfig& ec = rc.estimators[i];
    const std::string dir = opt.out_dir + "/estimates/" + run.estimator_names[i];
    const rmk::BandGrid map = rmk::estimate_map(ms, ec, truth.n_channels());
    save_band(map, dir, "map");

    if (ec.method == rmk::EstimatorMethod::kriging) {
      Table t({"channel", "nugget_db2", "sill_db2", "range_m"});
      for (std::size_t k = 0; k < truth.n_channels(); ++k) {
        const rmk::Variogram v =
            ec.variogram ? *ec.variogram
                         : rmk::fit_variogram(channel_only(ms, k), ec.variogram_bins,
                                              ec.variogram_max_lag);
        t.add_row({num(k), num(v.nugget), num(v.sill), num(v.range)});
      }
      t.save(dir + "/variogram.tsv");
    }
    if (ec.method == rmk::EstimatorMethod::model_based) {
      Table t({"channel", "tx", "x_m", "y_m", "ref_power_db", "exponent",
               "residual_rms_db", "ill_conditioned"});
      for (std::size_t k = 0; k < truth.n_channels(); ++k) {
        const auto mb = rmk::estimate_model_based(ms, k, ec.n_tx);
        for (std::size_t j = 0; j < mb.fits.size(); ++j) {
          const auto& f = mb.fits[j];
          t.add_row({num(k), num(j), num(f.x), num(f.y), num(f.ref_power_db),
                     num(f.exponent), num(f.residual_rms_db),
                     std::string(f.ill_conditioned ? "1" : "0")});
        }
      }
      t.save(dir + "/fits.tsv");
    }
    if (!opt.quiet)
      std::cout << "estimate: " << run.estimator_names[i] << " wrote "
                << map.n_channels() << " raster(s)\n";
  }
  return 0;
}

int run_evaluate(const GlobalOptions& opt) {
  const ResolvedRun run = resolve_run(opt);
  const rmk::RunConfig& rc = run.config;
  const rmk::BandGrid truth = rmk::generate_ground_truth(rc.scenario);
  const rmk::BandGrid truth_db = rmk::band_to_db(truth);
  const rmk::MeasurementSet ms = sense_epoch(rc, truth, 0);
  const auto exclusions = transmitter_positions(rc.scenario);

  Table t({"method", "rmse_db", "mae_db", "max_abs_db", "n_sensors", "seed"});
  for (std::size_t i = 0; i < rc.estimators.size(); ++i) {
    const rmk::BandGrid map = rmk::estimate_map(ms, rc.estimators[i], truth.n_channels());
    const rmk::ErrorReport rep = rmk::compare_maps(
        map, truth_db, exclusions, rc.analytics.exclusion_radius_cells);
    t.add_row({run.estimator_names[i], num(rep.rmse_db), num(rep.mae_db),
               num(rep.max_abs_db), num(ms.sensors.size()), num(rc.seed)});
  }

  ensure_dir(opt.out_dir);
  t.save(opt.out_dir + "/evaluate.tsv");
  if (!opt.quiet) std::cout << t.to_tsv();
  return 0;
}

int run_apps(const GlobalOptions& opt) {
  const ResolvedRun run = resolve_run(opt);
  const rmk::RunConfig& rc = run.config;
  const rmk::Scenario& s = rc.scenario;
  const std::string dir = opt.out_dir + "/apps";
  ensure_dir(dir);

  if (!rc.analytics.storage.empty()) {
    Table t({"area_km2", "cell_m", "band_mhz", "chan_mhz", "duration_h", "step_min",
             "bits_per_px", "storage_bits"});
    for (const auto& row : rc.analytics.storage)
      t.add_row({num(row.area_km2), num(row.cell_m), num(row.band_mhz),
                 num(row.chan_mhz), num(row.duration_h), num(row.step_min),
                 num(row.bits),
                 num(rmk::storage_size_bits(row.area_km2, row.cell_m, row.band_mhz,
                                            row.chan_mhz, row.duration_h,
                                            row.step_min, row.bits))});
    t.save(dir + "/storage.tsv");
    if (!opt.quiet) std::cout << t.to_tsv();
  }

  const rmk::BandGrid truth = rmk::generate_ground_truth(s);

  // Coverage analysis runs on channel 0.
  std::vector<rmk::Grid2D> gains;
  std::vector<double> powers;
  for (const auto& tx : s.transmitters)
    if (tx.channel_index == 0) {
      gains.push_back(rmk::channel_gain_map(s, tx.id));
      powers.push_back(tx.tx_power_w);
    }
  if (!gains.empty()) {
    const rmk::DeadZoneReport dz =
        rmk::dead_zones(gains, truth.channel(0), powers, s.propagation.noise_floor_dbw,
                        rc.analytics.sinr_threshold_db);
    rmk::save_grid(dz.mask, dir + "/dead_zones.grid");
    Table t({"component", "n_cells"});
    for (std::size_t i = 0; i < dz.components.size(); ++i)
      t.add_row({num(i), num(dz.components[i].size())});
    t.save(dir + "/dead_zones.tsv");
    if (!opt.quiet)
      std::cout << "apps: " << dz.components.size() << " dead zone component(s)\n";

    for (std::size_t i = 0; i < rc.analytics.routes.size(); ++i) {
      const auto sinr = rmk::sinr_along_route(rc.analytics.routes[i], gains,
                                              truth.channel(0), powers,
                                              s.propagation.noise_floor_dbw);
      Table t2({"waypoint", "x_m", "y_m", "sinr_db"});
      for (std::size_t j = 0; j < sinr.size(); ++j)
        t2.add_row({num(j), num(rc.analytics.routes[i].waypoints[j].first),
                    num(rc.analytics.routes[i].waypoints[j].second), num(sinr[j])});
      t2.save(dir + "/route_" + num(i) + ".tsv");
    }
  } else if (!opt.quiet) {
    std::cout << "apps: no transmitters on channel 0, skipping coverage\n";
  }

  const rmk::EstimatorConfig& est = rc.estimators.front();
  Table ttab({"time_index", "changed_tile_fraction", "roundtrip_max_err_db"});
  const rmk::MapSeries series = build_series(rc, truth, est, &ttab);
  ttab.save(dir + "/temporal.tsv");
  rmk::save_tiles(series.tiles(), static_cast<long>(rc.temporal.epochs) - 1,
                  dir + "/tiles");

  if (rc.analytics.anomaly) {
    const auto& an = *rc.analytics.anomaly;
    const long t_cur = static_cast<long>(rc.temporal.epochs);
    rmk::BandGrid current =
        rmk::estimate_map(sense_epoch(rc, truth, t_cur), est, truth.n_channels());
    if (an.inject) {
      rmk::Grid2D& g = current.channel(0);
      const rmk::GridGeometry& geom = g.geom();
      for (std::size_t i = 0; i < geom.n_rows; ++i)
        for (std::size_t j = 0; j < geom.n_cols; ++j) {
          const double dx = geom.cell_center_x(j) - an.inject->x;
          const double dy = geom.cell_center_y(i) - an.inject->y;
          if (std::hypot(dx, dy) <= an.inject->radius_m)
            g.at(i, j) += an.inject->excess_db;
        }
    }
    const rmk::AnomalyReport rep = rmk::detect_anomaly(series, current, an.k_sigma, 0);
    Table t({"cluster", "n_cells", "centroid_x_m", "centroid_y_m",
             "mean_deviation_db"});
    for (std::size_t i = 0; i < rep.clusters.size(); ++i) {
      const auto& c = rep.clusters[i];
      t.add_row({num(i), num(c.cells.size()), num(c.centroid_x), num(c.centroid_y),
                 num(c.mean_deviation_db)});
    }
    t.save(dir + "/anomaly.tsv");

    Table rt({"x_m", "y_m", "excess_power_w"});
    try {
      const rmk::RogueEstimate rg = rmk::locate_rogue(rep, current, 0);
      rt.add_row({num(rg.x), num(rg.y), num(rg.excess_power_w)});
      if (!opt.quiet)
        std::cout << "apps: rogue estimate at (" << num(rg.x) << ", " << num(rg.y)
                  << ")\n";
    } catch (const rmk::DataError&) {
      if (!opt.quiet) std::cout << "apps: no rogue source localized\n";
    }
    rt.save(dir + "/rogue.tsv");
  }
  return 0;
}

} // namespace rmkcli
