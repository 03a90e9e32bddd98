#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rmk/analytics.hpp"
#include "rmk/rng.hpp"
#include "rmk/scenario.hpp"

using namespace rmk;

namespace {

BandGrid const_map(const GridGeometry& geom, std::size_t n_channels, double db) {
  return BandGrid(geom, Unit::dB, n_channels, db);
}

BandGrid random_map(const GridGeometry& geom, std::size_t n_channels,
                    std::uint64_t seed) {
  BandGrid m(geom, Unit::dB, n_channels, 0.0);
  Rng rng(seed);
  for (std::size_t k = 0; k < n_channels; ++k)
    for (std::size_t i = 0; i < m.channel(k).size(); ++i)
      m.channel(k).values()[i] = rng.uniform(-120.0, -60.0);
  return m;
}

} // namespace

TEST_CASE("error metrics against truth") {
  GridGeometry geom{0.0, 0.0, 100.0, 10, 10};
  BandGrid truth = random_map(geom, 2, 3);

  SUBCASE("identical maps score zero") {
    ErrorReport rep = compare_maps(truth, truth);
    CHECK(rep.rmse_db == 0.0);
    CHECK(rep.mae_db == 0.0);
    CHECK(rep.max_abs_db == 0.0);
  }

  SUBCASE("constant offset shows up in every metric") {
    BandGrid est = truth;
    for (std::size_t k = 0; k < 2; ++k)
      for (auto& v : est.channel(k).values())
        v += 3.0;
    ErrorReport rep = compare_maps(est, truth);
    CHECK(rep.rmse_db == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rep.mae_db == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rep.max_abs_db == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("metrics ignore the sign of the error") {
    BandGrid est = random_map(geom, 2, 4);
    ErrorReport ab = compare_maps(est, truth);
    ErrorReport ba = compare_maps(truth, est);
    CHECK(ab.rmse_db == doctest::Approx(ba.rmse_db).epsilon(1e-14));
    CHECK(ab.mae_db == doctest::Approx(ba.mae_db).epsilon(1e-14));
    CHECK(ab.max_abs_db == doctest::Approx(ba.max_abs_db).epsilon(1e-14));
    CHECK(ab.max_abs_db >= ab.rmse_db);
    CHECK(ab.rmse_db >= ab.mae_db);
  }

  SUBCASE("exclusion disks hide transmitter-site error") {
    BandGrid est = truth;
    est.channel(0).at(2, 3) += 50.0;
    const double ex = geom.cell_center_x(3);
    const double ey = geom.cell_center_y(2);

    ErrorReport noisy = compare_maps(est, truth);
    CHECK(noisy.max_abs_db == doctest::Approx(50.0));

    ErrorReport masked = compare_maps(est, truth, {{ex, ey}}, 1.5);
    CHECK(masked.max_abs_db == 0.0);
    CHECK(masked.rmse_db == 0.0);
    CHECK(masked.included.at(2, 3) == 0.0);
    CHECK(masked.included.at(2, 4) == 0.0); // one cell east, inside 1.5 cells
    CHECK(masked.included.at(2, 5) == 1.0);
    // The signed error grid still carries the hidden cell.
    CHECK(masked.error_db[0].at(2, 3) == doctest::Approx(50.0));
  }

  SUBCASE("input validation") {
    GridGeometry other{0.0, 0.0, 100.0, 10, 11};
    CHECK_THROWS_AS(compare_maps(random_map(other, 2, 1), truth), DataError);
    CHECK_THROWS_AS(compare_maps(random_map(geom, 1, 1), truth), DataError);
    // Excluding everything leaves nothing to score.
    CHECK_THROWS_AS(compare_maps(truth, truth, {{500.0, 500.0}}, 100.0), DataError);
  }
}

TEST_CASE("field integration") {
  GridGeometry geom{0.0, 0.0, 100.0, 10, 10};

  SUBCASE("constant one-watt field counts cells times area") {
    BandGrid m = const_map(geom, 1, 0.0); // 0 dB = 1 W per cell
    const double got = integrate_field(m, {0.0, 0.0, 300.0, 300.0}, 0, 0);
    CHECK(got == doctest::Approx(9.0 * 100.0 * 100.0).epsilon(1e-12));
  }

  SUBCASE("half-open regions split without double counting") {
    BandGrid m = random_map(geom, 1, 9);
    const double whole = integrate_field(m, {0.0, 0.0, 1000.0, 1000.0}, 0, 0);
    // Split on a cell boundary and straight through a center column.
    for (double cut : {500.0, 450.0}) {
      const double left = integrate_field(m, {0.0, 0.0, cut, 1000.0}, 0, 0);
      const double right = integrate_field(m, {cut, 0.0, 1000.0, 1000.0}, 0, 0);
      CHECK(left + right == doctest::Approx(whole).epsilon(1e-12));
    }
  }

  SUBCASE("scaling the power scales the integral") {
    BandGrid m = random_map(geom, 1, 10);
    BandGrid scaled = m;
    const double alpha_db = 10.0 * std::log10(2.5);
    for (auto& v : scaled.channel(0).values())
      v += alpha_db;
    const double base = integrate_field(m, {0.0, 0.0, 1000.0, 1000.0}, 0, 0);
    const double more = integrate_field(scaled, {0.0, 0.0, 1000.0, 1000.0}, 0, 0);
    CHECK(more == doctest::Approx(2.5 * base).epsilon(1e-9));
  }

  SUBCASE("channel ranges add up") {
    BandGrid m = random_map(geom, 3, 11);
    const RectRegion all{0.0, 0.0, 1000.0, 1000.0};
    const double both = integrate_field(m, all, 0, 1);
    const double c0 = integrate_field(m, all, 0, 0);
    const double c1 = integrate_field(m, all, 1, 1);
    CHECK(both == doctest::Approx(c0 + c1).epsilon(1e-12));
    CHECK_THROWS_AS(integrate_field(m, all, 1, 0), DataError);
    CHECK_THROWS_AS(integrate_field(m, all, 0, 3), DataError);
  }

  SUBCASE("degenerate regions are refused") {
    BandGrid m = random_map(geom, 1, 12);
    CHECK_THROWS_AS(integrate_field(m, {200.0, 200.0, 200.0, 400.0}, 0, 0),
                    DataError);
    // Interval inside the grid but between cell centers on both axes.
    CHECK_THROWS_AS(integrate_field(m, {51.0, 51.0, 149.0, 149.0}, 0, 0),
                    DataError);
    CHECK_THROWS_AS(integrate_field(m, {2000.0, 0.0, 3000.0, 1000.0}, 0, 0),
                    DataError);
  }

  SUBCASE("transmitter contributions superpose") {
    Scenario all;
    all.geom = {0.0, 0.0, 100.0, 50, 50};
    all.channels.centers_hz = {1e9};
    all.propagation.shadowing_sigma_db = 6.0;
    all.propagation.decorrelation_distance_m = 500.0;
    all.rng_seed = 42;
    all.transmitters = {{0, 1200.0, 1500.0, 1.0, 0, -30.0},
                        {1, 3800.0, 3500.0, 2.0, 0, -30.0},
                        {2, 2500.0, 4200.0, 0.5, 0, -30.0}};

    const RectRegion everywhere{0.0, 0.0, 5000.0, 5000.0};
    const double combined =
        integrate_field(generate_ground_truth(all), everywhere, 0, 0);
    double parts = 0.0;
    for (const auto& tx : all.transmitters) {
      Scenario one = all;
      one.transmitters = {tx};
      parts += integrate_field(generate_ground_truth(one), everywhere, 0, 0);
    }
    CHECK(combined == doctest::Approx(parts).epsilon(1e-12));
  }
}

TEST_CASE("local extrema on grids") {
  SUBCASE("single transmitter peaks at its own cell") {
    Scenario s;
    s.geom = {0.0, 0.0, 100.0, 21, 21};
    s.channels.centers_hz = {1e9};
    s.propagation.shadowing_sigma_db = 0.0;
    s.transmitters = {{0, 1050.0, 1050.0, 1.0, 0, -30.0}};
    const BandGrid truth_db = band_to_db(generate_ground_truth(s));
    auto peaks = local_extrema(truth_db.channel(0), ExtremumKind::max, 0.0);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].row == 10);
    CHECK(peaks[0].col == 10);
  }

  SUBCASE("constant maps have no strict extrema") {
    GridGeometry geom{0.0, 0.0, 100.0, 8, 8};
    Grid2D flat(geom, Unit::dB, -75.0);
    CHECK(local_extrema(flat, ExtremumKind::max, 0.0).empty());
    CHECK(local_extrema(flat, ExtremumKind::min, 0.0).empty());
  }

  SUBCASE("separation radius suppresses the weaker peak") {
    GridGeometry geom{0.0, 0.0, 100.0, 9, 9};
    Grid2D m(geom, Unit::dB, -100.0);
    m.at(4, 4) = -50.0;
    m.at(4, 7) = -60.0; // three cells from the stronger peak

    auto both = local_extrema(m, ExtremumKind::max, 3.0);
    REQUIRE(both.size() == 2);
    CHECK(both[0].value == -50.0);
    CHECK(both[1].value == -60.0);

    auto one = local_extrema(m, ExtremumKind::max, 5.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].row == 4);
    CHECK(one[0].col == 4);
  }

  SUBCASE("minima mirror maxima") {
    GridGeometry geom{0.0, 0.0, 100.0, 9, 9};
    Grid2D m(geom, Unit::dB, -100.0);
    m.at(3, 5) = -150.0;
    auto dips = local_extrema(m, ExtremumKind::min, 0.0);
    REQUIRE(dips.size() == 1);
    CHECK(dips[0].row == 3);
    CHECK(dips[0].col == 5);
    CHECK(local_extrema(m, ExtremumKind::max, 0.0).empty());
  }

  SUBCASE("tiny grids are refused") {
    GridGeometry geom{0.0, 0.0, 100.0, 2, 5};
    Grid2D m(geom, Unit::dB, 0.0);
    CHECK_THROWS_AS(local_extrema(m, ExtremumKind::max, 0.0), DataError);
  }
}

TEST_CASE("central differences converge at second order") {
  auto fill = [](const GridGeometry& geom) {
    Grid2D g(geom, Unit::dB, 0.0);
    for (std::size_t r = 0; r < geom.n_rows; ++r)
      for (std::size_t c = 0; c < geom.n_cols; ++c)
        g.at(r, c) = std::sin(geom.cell_center_x(c) / 400.0) *
                     std::cos(geom.cell_center_y(r) / 300.0);
    return g;
  };
  auto max_interior_error = [&](const GridGeometry& geom) {
    Grid2D g = fill(geom);
    auto [gx, gy] = gradient_central(g);
    double worst = 0.0;
    for (std::size_t r = 1; r + 1 < geom.n_rows; ++r)
      for (std::size_t c = 1; c + 1 < geom.n_cols; ++c) {
        const double x = geom.cell_center_x(c);
        const double y = geom.cell_center_y(r);
        const double ax = std::cos(x / 400.0) * std::cos(y / 300.0) / 400.0;
        const double ay = -std::sin(x / 400.0) * std::sin(y / 300.0) / 300.0;
        worst = std::max(worst, std::fabs(gx.at(r, c) - ax));
        worst = std::max(worst, std::fabs(gy.at(r, c) - ay));
      }
    return worst;
  };

  const double coarse = max_interior_error({0.0, 0.0, 50.0, 40, 40});
  const double fine = max_interior_error({0.0, 0.0, 25.0, 80, 80});
  const double ratio = coarse / fine;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);

  SUBCASE("affine ramps differentiate exactly, north up") {
    GridGeometry geom{0.0, 0.0, 50.0, 12, 12};
    Grid2D g(geom, Unit::dB, 0.0);
    for (std::size_t r = 0; r < geom.n_rows; ++r)
      for (std::size_t c = 0; c < geom.n_cols; ++c)
        g.at(r, c) = 3.0 + 0.002 * geom.cell_center_x(c) - 0.001 * geom.cell_center_y(r);
    auto [gx, gy] = gradient_central(g);
    for (std::size_t r = 0; r < geom.n_rows; ++r)
      for (std::size_t c = 0; c < geom.n_cols; ++c) {
        CHECK(gx.at(r, c) == doctest::Approx(0.002).epsilon(1e-9));
        CHECK(gy.at(r, c) == doctest::Approx(-0.001).epsilon(1e-9));
      }
  }
}

TEST_CASE("dead zone detection") {
  GridGeometry geom{0.0, 0.0, 100.0, 4, 4};

  SUBCASE("healthy single-station world has no dead cells") {
    Grid2D gain(geom, Unit::dB, -60.0);
    Grid2D interference(geom, Unit::LinearWatts, 1e-6); // exactly the signal
    DeadZoneReport rep = dead_zones({gain}, interference, {1.0}, -90.0, 20.0);
    for (std::size_t i = 0; i < rep.mask.size(); ++i)
      CHECK(rep.mask.values()[i] == 0.0);
    CHECK(rep.components.empty());

    // Signal is 30 dB over noise; asking for 40 kills every cell.
    DeadZoneReport all = dead_zones({gain}, interference, {1.0}, -90.0, 40.0);
    REQUIRE(all.components.size() == 1);
    CHECK(all.components[0].size() == 16);
  }

  SUBCASE("a fully blocked cell is dead on its own") {
    Grid2D gain(geom, Unit::dB, -60.0);
    gain.at(1, 1) = kDbFloor;
    Grid2D interference(geom, Unit::LinearWatts, kLinearFloor);
    DeadZoneReport rep = dead_zones({gain}, interference, {1.0}, -90.0, 0.0);
    REQUIRE(rep.components.size() == 1);
    REQUIRE(rep.components[0].size() == 1);
    CHECK(rep.components[0][0] == std::pair<std::size_t, std::size_t>{1, 1});
  }

  SUBCASE("components are 4-connected: diagonals split") {
    Grid2D gain(geom, Unit::dB, -60.0);
    gain.at(0, 0) = kDbFloor;
    gain.at(0, 1) = kDbFloor;
    gain.at(1, 1) = kDbFloor;
    gain.at(2, 2) = kDbFloor; // touches (1,1) only diagonally
    Grid2D interference(geom, Unit::LinearWatts, kLinearFloor);
    DeadZoneReport rep = dead_zones({gain}, interference, {1.0}, -90.0, 0.0);
    REQUIRE(rep.components.size() == 2);
    CHECK(rep.components[0].size() == 3);
    CHECK(rep.components[1].size() == 1);
    CHECK(rep.components[1][0] == std::pair<std::size_t, std::size_t>{2, 2});
  }

  SUBCASE("adding a station never enlarges the dead mask") {
    GridGeometry big{0.0, 0.0, 100.0, 12, 12};
    Rng rng(17);
    auto random_gain = [&]() {
      Grid2D g(big, Unit::dB, 0.0);
      for (auto& v : g.values())
        v = rng.uniform(-130.0, -70.0);
      return g;
    };
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Grid2D> gains = {random_gain(), random_gain(), random_gain()};
      Grid2D interference(big, Unit::LinearWatts, 0.0);
      for (std::size_t i = 0; i < interference.size(); ++i)
        interference.values()[i] = from_db(gains[0].values()[i]) +
                                   from_db(gains[1].values()[i]) +
                                   from_db(gains[2].values()[i]);
      DeadZoneReport two = dead_zones({gains[0], gains[1]}, interference,
                                      {1.0, 1.0}, -100.0, 3.0);
      DeadZoneReport three = dead_zones(gains, interference, {1.0, 1.0, 1.0},
                                        -100.0, 3.0);
      DeadZoneReport strict = dead_zones({gains[0], gains[1]}, interference,
                                         {1.0, 1.0}, -100.0, 6.0);
      for (std::size_t i = 0; i < two.mask.size(); ++i) {
        CHECK(three.mask.values()[i] <= two.mask.values()[i]);
        CHECK(two.mask.values()[i] <= strict.mask.values()[i]);
      }
    }
  }

  SUBCASE("input validation") {
    Grid2D gain(geom, Unit::dB, -60.0);
    Grid2D interference(geom, Unit::LinearWatts, kLinearFloor);
    GridGeometry other{0.0, 0.0, 100.0, 5, 4};
    CHECK_THROWS_AS(dead_zones({}, interference, {}, -90.0, 0.0), DataError);
    CHECK_THROWS_AS(dead_zones({gain}, interference, {1.0, 2.0}, -90.0, 0.0),
                    DataError);
    CHECK_THROWS_AS(
        dead_zones({Grid2D(other, Unit::dB, -60.0)}, interference, {1.0}, -90.0, 0.0),
        DataError);
  }
}

TEST_CASE("route SINR") {
  GridGeometry geom{0.0, 0.0, 100.0, 20, 20};

  SUBCASE("no interference reduces to signal over noise") {
    Grid2D gain(geom, Unit::dB, 0.0);
    for (std::size_t r = 0; r < geom.n_rows; ++r)
      for (std::size_t c = 0; c < geom.n_cols; ++c)
        gain.at(r, c) = -50.0 - 0.01 * geom.cell_center_x(c);
    Grid2D interference(geom, Unit::LinearWatts, kLinearFloor);

    Route route;
    route.waypoints = {{250.0, 350.0}, {1250.0, 350.0}};
    route.serving_station = {0};
    auto sinr = sinr_along_route(route, {gain}, interference, {2.0}, -100.0);
    REQUIRE(sinr.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      const double g = -50.0 - 0.01 * route.waypoints[i].first;
      const double expect = 10.0 * std::log10(2.0) + g - (-100.0);
      CHECK(sinr[i] == doctest::Approx(expect).epsilon(1e-9));
    }
  }

  SUBCASE("each waypoint uses its segment's server") {
    Grid2D g0(geom, Unit::dB, -60.0);
    Grid2D g1(geom, Unit::dB, -70.0);
    Grid2D interference(geom, Unit::LinearWatts, 0.0);
    for (std::size_t i = 0; i < interference.size(); ++i)
      interference.values()[i] = from_db(-60.0) * 1.0 + from_db(-70.0) * 2.0;

    Route route;
    route.waypoints = {{150.0, 150.0}, {950.0, 950.0}, {1650.0, 1650.0}};
    route.serving_station = {0, 1};
    auto sinr = sinr_along_route(route, {g0, g1}, interference, {1.0, 2.0}, -90.0);
    REQUIRE(sinr.size() == 3);

    const double s0 = from_db(-60.0), s1 = 2.0 * from_db(-70.0), n = from_db(-90.0);
    CHECK(sinr[0] == doctest::Approx(10.0 * std::log10(s0 / (s1 + n))).epsilon(1e-9));
    // Waypoints 1 and 2 both ride the second segment.
    CHECK(sinr[1] == doctest::Approx(10.0 * std::log10(s1 / (s0 + n))).epsilon(1e-9));
    CHECK(sinr[2] == doctest::Approx(sinr[1]).epsilon(1e-12));
  }

  SUBCASE("a wall between transmitter and route dips the SINR by its loss") {
    Scenario s;
    s.geom = {0.0, 0.0, 100.0, 20, 20};
    s.channels.centers_hz = {1e9};
    s.propagation.shadowing_sigma_db = 0.0;
    s.transmitters = {{0, 450.0, 1050.0, 1.0, 0, -30.0}};
    s.obstacles = {{1000.0, 800.0, 1000.0, 1300.0, 15.0}};
    Grid2D gain = channel_gain_map(s, 0);
    Grid2D interference(s.geom, Unit::LinearWatts, kLinearFloor);

    // All three waypoints sit 600 m from the transmitter at cell centers;
    // only the middle one looks through the wall.
    Route route;
    route.waypoints = {{450.0, 1650.0}, {1050.0, 1050.0}, {450.0, 450.0}};
    route.serving_station = {0, 0};
    auto sinr = sinr_along_route(route, {gain}, interference, {1.0}, -120.0);
    REQUIRE(sinr.size() == 3);
    CHECK(sinr[0] - sinr[1] == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(sinr[2] == doctest::Approx(sinr[0]).epsilon(1e-12));
  }

  SUBCASE("input validation") {
    Grid2D gain(geom, Unit::dB, -60.0);
    Grid2D interference(geom, Unit::LinearWatts, kLinearFloor);
    Route bad;
    bad.waypoints = {{100.0, 100.0}};
    CHECK_THROWS_AS(sinr_along_route(bad, {gain}, interference, {1.0}, -90.0),
                    DataError);
    Route mismatched;
    mismatched.waypoints = {{100.0, 100.0}, {200.0, 200.0}};
    mismatched.serving_station = {0, 0};
    CHECK_THROWS_AS(
        sinr_along_route(mismatched, {gain}, interference, {1.0}, -90.0), DataError);
    Route outside;
    outside.waypoints = {{100.0, 100.0}, {5000.0, 100.0}};
    outside.serving_station = {0};
    CHECK_THROWS_AS(
        sinr_along_route(outside, {gain}, interference, {1.0}, -90.0), BoundsError);
    Route rogue_server;
    rogue_server.waypoints = {{100.0, 100.0}, {200.0, 200.0}};
    rogue_server.serving_station = {3};
    CHECK_THROWS_AS(
        sinr_along_route(rogue_server, {gain}, interference, {1.0}, -90.0), DataError);
  }
}

TEST_CASE("anomaly detection") {
  GridGeometry geom{0.0, 0.0, 100.0, 30, 30};
  auto flat_history = [&](double level, int epochs) {
    MapSeries series(16);
    for (int t = 0; t < epochs; ++t)
      series.push_epoch_map(t, const_map(geom, 1, level));
    return series;
  };

  SUBCASE("matching the historical mean raises nothing") {
    MapSeries history = flat_history(-90.0, 4);
    AnomalyReport rep = detect_anomaly(history, const_map(geom, 1, -90.0), 5.0);
    CHECK(rep.clusters.empty());
    for (std::size_t i = 0; i < rep.flagged.size(); ++i) {
      CHECK(rep.flagged.values()[i] == 0.0);
      CHECK(rep.z_score.values()[i] == 0.0);
    }
  }

  SUBCASE("an injected disk is flagged as one tight cluster") {
    MapSeries history = flat_history(-90.0, 4);
    BandGrid current = const_map(geom, 1, -90.0);
    const double cx = geom.cell_center_x(16), cy = geom.cell_center_y(14);
    std::size_t disk_cells = 0;
    for (std::size_t r = 0; r < geom.n_rows; ++r)
      for (std::size_t c = 0; c < geom.n_cols; ++c)
        if (std::hypot(geom.cell_center_x(c) - cx, geom.cell_center_y(r) - cy) <=
            300.0) {
          current.channel(0).at(r, c) += 10.0;
          ++disk_cells;
        }

    AnomalyReport rep = detect_anomaly(history, current, 5.0);
    REQUIRE(rep.clusters.size() == 1);
    const AnomalyCluster& cl = rep.clusters[0];
    // Constant history pins the std at the 0.5 dB floor, so z = 20 inside.
    CHECK(cl.cells.size() == disk_cells);
    CHECK(cl.mean_deviation_db == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(cl.centroid_x == doctest::Approx(cx).epsilon(1e-9));
    CHECK(cl.centroid_y == doctest::Approx(cy).epsilon(1e-9));
    for (const auto& [r, c] : cl.cells) {
      CHECK(rep.flagged.at(r, c) == 1.0);
      CHECK(rep.z_score.at(r, c) == doctest::Approx(20.0).epsilon(1e-12));
    }
  }

  SUBCASE("adding a common constant changes nothing") {
    GridGeometry small{0.0, 0.0, 100.0, 12, 12};
    Rng rng(23);
    MapSeries a(8), b(8);
    for (int t = 0; t < 5; ++t) {
      BandGrid ep(small, Unit::dB, 1, 0.0);
      for (auto& v : ep.channel(0).values())
        v = -90.0 + rng.normal(0.0, 1.5);
      BandGrid shifted = ep;
      for (auto& v : shifted.channel(0).values())
        v += 7.0;
      a.push_epoch_map(t, ep);
      b.push_epoch_map(t, shifted);
    }
    BandGrid cur(small, Unit::dB, 1, 0.0);
    for (auto& v : cur.channel(0).values())
      v = -90.0 + rng.normal(0.0, 1.5);
    BandGrid cur_shifted = cur;
    for (auto& v : cur_shifted.channel(0).values())
      v += 7.0;

    AnomalyReport ra = detect_anomaly(a, cur, 4.0);
    AnomalyReport rb = detect_anomaly(b, cur_shifted, 4.0);
    for (std::size_t i = 0; i < ra.z_score.size(); ++i) {
      CHECK(ra.z_score.values()[i] ==
            doctest::Approx(rb.z_score.values()[i]).epsilon(1e-9));
      CHECK(ra.flagged.values()[i] == rb.flagged.values()[i]);
    }
  }

  SUBCASE("noise consistent with history stays silent") {
    GridGeometry big{0.0, 0.0, 100.0, 100, 100};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(mix_seed(seed, "quiet"));
      MapSeries history(8);
      for (int t = 0; t < 6; ++t) {
        BandGrid ep(big, Unit::dB, 1, 0.0);
        for (auto& v : ep.channel(0).values())
          v = -95.0 + rng.normal(0.0, 0.4);
        history.push_epoch_map(t, ep);
      }
      BandGrid cur(big, Unit::dB, 1, 0.0);
      for (auto& v : cur.channel(0).values())
        v = -95.0 + rng.normal(0.0, 0.4);
      AnomalyReport rep = detect_anomaly(history, cur, 6.0);
      CHECK(rep.clusters.empty());
    }
  }

  SUBCASE("history must be deep enough") {
    MapSeries history = flat_history(-90.0, 2);
    CHECK_THROWS_AS(detect_anomaly(history, const_map(geom, 1, -90.0), 5.0),
                    DataError);
    MapSeries ok = flat_history(-90.0, 3);
    CHECK_THROWS_AS(detect_anomaly(ok, const_map(geom, 1, -90.0), 5.0, 1),
                    DataError);
    GridGeometry other{0.0, 0.0, 100.0, 30, 31};
    CHECK_THROWS_AS(detect_anomaly(ok, const_map(other, 1, -90.0), 5.0), DataError);
  }
}

TEST_CASE("rogue localization") {
  GridGeometry geom{0.0, 0.0, 100.0, 30, 30};
  auto flat_history = [&](int epochs) {
    MapSeries series(16);
    for (int t = 0; t < epochs; ++t)
      series.push_epoch_map(t, BandGrid(geom, Unit::dB, 1, -90.0));
    return series;
  };

  SUBCASE("a point source lands within two cells over ten seeds") {
    const double tx_x = geom.cell_center_x(16);
    const double tx_y = geom.cell_center_y(16);
    std::vector<double> errors;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(mix_seed(seed, "rogue"));
      MapSeries history(8);
      for (int t = 0; t < 4; ++t) {
        BandGrid ep(geom, Unit::dB, 1, 0.0);
        for (auto& v : ep.channel(0).values())
          v = -90.0 + rng.normal(0.0, 0.3);
        history.push_epoch_map(t, ep);
      }
      BandGrid cur(geom, Unit::dB, 1, 0.0);
      for (std::size_t r = 0; r < geom.n_rows; ++r)
        for (std::size_t c = 0; c < geom.n_cols; ++c) {
          const double base_db = -90.0 + rng.normal(0.0, 0.3);
          const double d = std::max(
              std::hypot(geom.cell_center_x(c) - tx_x, geom.cell_center_y(r) - tx_y),
              50.0);
          const double rogue_db = -20.0 - 30.0 * std::log10(d);
          cur.channel(0).at(r, c) = to_db(from_db(base_db) + from_db(rogue_db));
        }
      AnomalyReport rep = detect_anomaly(history, cur, 5.0);
      RogueEstimate est = locate_rogue(rep, cur);
      errors.push_back(std::hypot(est.x - tx_x, est.y - tx_y));
      CHECK(est.excess_power_w > 0.0);
    }
    std::sort(errors.begin(), errors.end());
    CHECK(0.5 * (errors[4] + errors[5]) < 2.0 * geom.cell_size);
  }

  SUBCASE("excess power integrates the linear bump over the cluster") {
    MapSeries history = flat_history(4);
    BandGrid cur(geom, Unit::dB, 1, -90.0);
    cur.channel(0).at(10, 10) = -80.0; // one hot cell
    AnomalyReport rep = detect_anomaly(history, cur, 5.0);
    RogueEstimate est = locate_rogue(rep, cur);
    CHECK(est.x == doctest::Approx(geom.cell_center_x(10)));
    CHECK(est.y == doctest::Approx(geom.cell_center_y(10)));
    const double expect =
        (from_db(-80.0) - from_db(-90.0)) * geom.cell_size * geom.cell_size;
    CHECK(est.excess_power_w == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("equal-mass clusters break ties toward the earlier one") {
    MapSeries history = flat_history(4);
    BandGrid cur(geom, Unit::dB, 1, -90.0);
    cur.channel(0).at(2, 2) = -80.0;
    cur.channel(0).at(2, 3) = -80.0;
    cur.channel(0).at(10, 10) = -80.0;
    cur.channel(0).at(10, 11) = -80.0;
    AnomalyReport rep = detect_anomaly(history, cur, 5.0);
    REQUIRE(rep.clusters.size() == 2);
    RogueEstimate est = locate_rogue(rep, cur);
    CHECK(est.y == doctest::Approx(geom.cell_center_y(2)));
    CHECK(est.x ==
          doctest::Approx(0.5 * (geom.cell_center_x(2) + geom.cell_center_x(3))));
  }

  SUBCASE("negative or empty deviations cannot be localized") {
    MapSeries history = flat_history(4);
    AnomalyReport clean = detect_anomaly(history, BandGrid(geom, Unit::dB, 1, -90.0), 5.0);
    CHECK_THROWS_AS(locate_rogue(clean, BandGrid(geom, Unit::dB, 1, -90.0)), DataError);

    BandGrid dimmed(geom, Unit::dB, 1, -90.0);
    dimmed.channel(0).at(5, 5) = -120.0;
    AnomalyReport neg = detect_anomaly(history, dimmed, 5.0);
    REQUIRE(!neg.clusters.empty());
    CHECK_THROWS_AS(locate_rogue(neg, dimmed), DataError);
  }
}
