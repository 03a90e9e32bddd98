#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rmk/errors.hpp"
#include "rmk/rng.hpp"
#include "rmk/scenario.hpp"
#include "rmk/sensing.hpp"

using namespace rmk;

namespace {

GridGeometry area_1km() {
  GridGeometry g;
  g.cell_size = 50.0;
  g.n_rows = 20;
  g.n_cols = 20;
  return g;
}

BandGrid flat_truth(const GridGeometry& g, double watts) {
  return BandGrid(g, Unit::LinearWatts, 1, watts);
}

Scenario single_tx_scenario() {
  Scenario s;
  s.geom = area_1km();
  Transmitter tx;
  tx.id = 0;
  tx.x = 430.0;
  tx.y = 610.0;
  tx.tx_power_w = 1.0;
  s.transmitters.push_back(tx);
  s.rng_seed = 5;
  return s;
}

} // namespace

TEST_CASE("uniform grid placement covers a square area evenly") {
  const GridGeometry g = area_1km();
  const auto sensors = place_sensors(g, 9, PlacementMode::uniform_grid, 0);
  REQUIRE(sensors.size() == 9);

  std::set<std::pair<double, double>> got;
  for (const auto& s : sensors) got.insert({s.x, s.y});
  // 3x3 partition of a 1000 m square: centers every 333.33 m.
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const double x = (c + 0.5) * 1000.0 / 3.0;
      const double y = (r + 0.5) * 1000.0 / 3.0;
      const bool found = std::any_of(got.begin(), got.end(), [&](const auto& p) {
        return std::abs(p.first - x) < 1e-9 && std::abs(p.second - y) < 1e-9;
      });
      CHECK(found);
    }

  // Ids are unique and dense.
  std::set<int> ids;
  for (const auto& s : sensors) ids.insert(s.id);
  CHECK(ids.size() == 9);
  CHECK(*ids.begin() == 0);
  CHECK(*ids.rbegin() == 8);
}

TEST_CASE("non-square counts still fill the area") {
  const GridGeometry g = area_1km();
  const auto sensors = place_sensors(g, 10, PlacementMode::uniform_grid, 0);
  REQUIRE(sensors.size() == 10);
  for (const auto& s : sensors) CHECK(g.contains(s.x, s.y));
  std::set<std::pair<double, double>> unique;
  for (const auto& s : sensors) unique.insert({s.x, s.y});
  CHECK(unique.size() == 10);

  CHECK_THROWS_AS(place_sensors(g, 401, PlacementMode::uniform_grid, 0), DataError);
}

TEST_CASE("random placement is seeded and in bounds") {
  const GridGeometry g = area_1km();
  const auto a = place_sensors(g, 50, PlacementMode::uniform_random, 7);
  const auto b = place_sensors(g, 50, PlacementMode::uniform_random, 7);
  const auto c = place_sensors(g, 50, PlacementMode::uniform_random, 8);
  REQUIRE(a.size() == 50);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(g.contains(a[i].x, a[i].y));
    same = same && a[i].x == b[i].x && a[i].y == b[i].y;
    differs = differs || a[i].x != c[i].x;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("custom placement validates its input") {
  const GridGeometry g = area_1km();
  const std::vector<std::pair<double, double>> pos = {{10.0, 10.0}, {990.0, 990.0}};
  const auto sensors = place_sensors(g, 2, PlacementMode::custom, 0, pos);
  CHECK(sensors[0].x == 10.0);
  CHECK(sensors[1].y == 990.0);
  CHECK_THROWS_AS(place_sensors(g, 3, PlacementMode::custom, 0, pos), DataError);
  CHECK_THROWS_AS(place_sensors(g, 2, PlacementMode::custom, 0,
                                {{10.0, 10.0}, {1500.0, 10.0}}),
                  DataError);
}

TEST_CASE("noiseless synthesis reads the truth map exactly") {
  const Scenario sc = single_tx_scenario();
  const BandGrid truth = generate_ground_truth(sc);
  const BandGrid truth_db = band_to_db(truth);
  const auto sensors = place_sensors(sc.geom, 25, PlacementMode::uniform_grid, 0);

  const MeasurementSet ms = synthesize_measurements(truth, sensors, 0.0, 99);
  REQUIRE(ms.measurements.size() == 25);
  for (const auto& m : ms.measurements) {
    const Sensor& s = ms.sensor_by_id(m.sensor_id);
    CHECK(m.psd_db ==
          doctest::Approx(truth_db.channel(0).sample_bilinear(s.x, s.y)));
    CHECK(m.time_index == 0);
    CHECK_FALSE(m.flags.quantized);
    CHECK_FALSE(m.flags.rejected);
  }
  CHECK_NOTHROW(validate_measurements(ms));
}

TEST_CASE("noise has the configured scale and is seed-stable") {
  const GridGeometry g = area_1km();
  const BandGrid truth = flat_truth(g, 1e-9); // -90 dB everywhere
  const auto sensors = place_sensors(g, 400, PlacementMode::uniform_grid, 0);

  const MeasurementSet a = synthesize_measurements(truth, sensors, 3.0, 31);
  const MeasurementSet b = synthesize_measurements(truth, sensors, 3.0, 31);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < a.measurements.size(); ++i) {
    const double r = a.measurements[i].psd_db + 90.0;
    sum += r;
    sq += r * r;
    CHECK(a.measurements[i].psd_db == b.measurements[i].psd_db);
  }
  const double n = static_cast<double>(a.measurements.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.5);
  CHECK(sd == doctest::Approx(3.0).epsilon(0.12));
}

TEST_CASE("quantization is an idempotent mid-rise staircase") {
  const GridGeometry g = area_1km();
  BandGrid truth = flat_truth(g, 1e-9);
  const auto sensors = place_sensors(g, 100, PlacementMode::uniform_random, 3);
  MeasurementSet ms = synthesize_measurements(truth, sensors, 6.0, 17);

  const int bits = 6;
  const double lo = -120.0, hi = -60.0;
  const double step = (hi - lo) / 64.0;
  const MeasurementSet q1 = quantize_measurements(ms, bits, lo, hi);
  const MeasurementSet q2 = quantize_measurements(q1, bits, lo, hi);

  for (std::size_t i = 0; i < ms.measurements.size(); ++i) {
    const double raw = ms.measurements[i].psd_db;
    const double quant = q1.measurements[i].psd_db;
    CHECK(q1.measurements[i].flags.quantized);
    // Reconstruction sits on a level midpoint.
    const double code = (quant - lo) / step - 0.5;
    CHECK(code == doctest::Approx(std::round(code)));
    if (raw >= lo && raw <= hi) CHECK(std::abs(raw - quant) <= step * 0.5 + 1e-12);
    // Idempotent: re-quantizing changes nothing.
    CHECK(q2.measurements[i].psd_db == quant);
  }

  // Out-of-range values clamp to the extreme levels.
  MeasurementSet edge = ms;
  edge.measurements[0].psd_db = -500.0;
  edge.measurements[1].psd_db = +10.0;
  const MeasurementSet qe = quantize_measurements(edge, bits, lo, hi);
  CHECK(qe.measurements[0].psd_db == doctest::Approx(lo + 0.5 * step));
  CHECK(qe.measurements[1].psd_db == doctest::Approx(hi - 0.5 * step));

  CHECK_THROWS_AS(quantize_measurements(ms, 0, lo, hi), ConfigError);
  CHECK_THROWS_AS(quantize_measurements(ms, 8, hi, lo), ConfigError);
}

TEST_CASE("gross outliers get flagged, inliers survive") {
  // Flat field, so every large residual is a planted outlier by construction.
  const GridGeometry g = area_1km();
  const BandGrid truth = flat_truth(g, 1e-9);
  auto sensors = place_sensors(g, 64, PlacementMode::uniform_grid, 0);
  MeasurementSet ms = synthesize_measurements(truth, sensors, 0.5, 11);

  // Corrupt three sensors by +40 dB.
  const std::set<std::size_t> bad = {5, 20, 41};
  for (std::size_t i : bad) ms.measurements[i].psd_db += 40.0;

  const MeasurementSet out = filter_bad_data(ms, 6.0, 6);
  REQUIRE(out.measurements.size() == ms.measurements.size());
  for (std::size_t i = 0; i < out.measurements.size(); ++i) {
    if (bad.count(i)) {
      CHECK(out.measurements[i].flags.rejected);
      // Flag only: the sample text stays.
      CHECK(out.measurements[i].psd_db == ms.measurements[i].psd_db);
    } else {
      CHECK_FALSE(out.measurements[i].flags.rejected);
    }
  }
}

TEST_CASE("csv io round trips bit-exactly") {
  const Scenario sc = single_tx_scenario();
  const BandGrid truth = generate_ground_truth(sc);
  const auto sensors = place_sensors(sc.geom, 12, PlacementMode::uniform_random, 2);
  MeasurementSet ms = synthesize_measurements(truth, sensors, 2.0, 13);
  ms.measurements[3].flags.rejected = true;
  ms.measurements[5].flags.quantized = true;

  std::stringstream ss;
  write_measurements(ms, ss);
  const std::string first_line = ss.str().substr(0, ss.str().find('\n'));
  CHECK(first_line == "sensor_id,x_m,y_m,channel,time_index,psd_db,flags");

  const MeasurementSet back = read_measurements(ss, sc.geom);
  REQUIRE(back.measurements.size() == ms.measurements.size());
  REQUIRE(back.sensors.size() == ms.sensors.size());
  for (std::size_t i = 0; i < ms.measurements.size(); ++i) {
    CHECK(back.measurements[i].psd_db == ms.measurements[i].psd_db);
    CHECK(back.measurements[i].sensor_id == ms.measurements[i].sensor_id);
    CHECK(back.measurements[i].flags == ms.measurements[i].flags);
  }
  for (std::size_t i = 0; i < ms.sensors.size(); ++i) {
    CHECK(back.sensors[i].x == ms.sensors[i].x);
    CHECK(back.sensors[i].y == ms.sensors[i].y);
  }

  SUBCASE("header is mandatory") {
    std::stringstream bad("0,1.0,1.0,0,0,-90.0,\n");
    CHECK_THROWS_AS((void)read_measurements(bad, sc.geom), DataError);
  }
  SUBCASE("unknown flag characters are rejected") {
    std::stringstream bad(
        "sensor_id,x_m,y_m,channel,time_index,psd_db,flags\n0,1.0,1.0,0,0,-90.0,z\n");
    CHECK_THROWS_AS((void)read_measurements(bad, sc.geom), DataError);
  }
  SUBCASE("duplicate keys are rejected") {
    std::stringstream bad(
        "sensor_id,x_m,y_m,channel,time_index,psd_db,flags\n"
        "0,1.0,1.0,0,0,-90.0,\n0,1.0,1.0,0,0,-91.0,\n");
    CHECK_THROWS_AS((void)read_measurements(bad, sc.geom), DataError);
  }
  SUBCASE("one sensor cannot sit in two places") {
    std::stringstream bad(
        "sensor_id,x_m,y_m,channel,time_index,psd_db,flags\n"
        "0,1.0,1.0,0,0,-90.0,\n0,2.0,1.0,0,1,-91.0,\n");
    CHECK_THROWS_AS((void)read_measurements(bad, sc.geom), DataError);
  }
}

TEST_CASE("validation catches out-of-area sensors and duplicates") {
  const GridGeometry g = area_1km();
  MeasurementSet ms;
  ms.geom = g;
  ms.sensors.push_back({0, 100.0, 100.0, SensorKind::dedicated});
  Measurement m;
  m.sensor_id = 0;
  m.psd_db = -90.0;
  ms.measurements.push_back(m);
  CHECK_NOTHROW(validate_measurements(ms));

  SUBCASE("sensor outside the area") {
    ms.sensors[0].x = 2000.0;
    CHECK_THROWS_AS(validate_measurements(ms), DataError);
  }
  SUBCASE("duplicate sensor id") {
    ms.sensors.push_back({0, 200.0, 100.0, SensorKind::dedicated});
    CHECK_THROWS_AS(validate_measurements(ms), DataError);
  }
  SUBCASE("duplicate (sensor, channel, time) key") {
    ms.measurements.push_back(m);
    CHECK_THROWS_AS(validate_measurements(ms), DataError);
  }
  SUBCASE("unknown sensor reference") {
    ms.measurements[0].sensor_id = 9;
    CHECK_THROWS_AS(validate_measurements(ms), DataError);
  }
  SUBCASE("non-finite sample") {
    ms.measurements[0].psd_db = std::nan("");
    CHECK_THROWS_AS(validate_measurements(ms), DataError);
  }
}
