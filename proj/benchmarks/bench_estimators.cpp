#include <benchmark/benchmark.h>

#include "rmk/estimate.hpp"
#include "rmk/rng.hpp"
#include "rmk/sensing.hpp"

namespace {

rmk::MeasurementSet synthetic_set(std::size_t n_sensors) {
  rmk::GridGeometry geom;
  geom.cell_size = 50.0;
  geom.n_rows = 64;
  geom.n_cols = 64;

  rmk::MeasurementSet ms;
  ms.geom = geom;
  rmk::Rng rng(7);
  for (std::size_t i = 0; i < n_sensors; ++i) {
    rmk::Sensor s;
    s.id = static_cast<int>(i);
    s.x = rng.uniform(0.0, geom.max_x());
    s.y = rng.uniform(0.0, geom.max_y());
    ms.sensors.push_back(s);
    rmk::Measurement m;
    m.sensor_id = s.id;
    m.psd_db = -90.0 + 10.0 * rng.normal();
    ms.measurements.push_back(m);
  }
  return ms;
}

void bench_fit_predict(benchmark::State& state, rmk::EstimatorConfig cfg) {
  const auto ms = synthetic_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto map = rmk::estimate_map(ms, cfg);
    benchmark::DoNotOptimize(map.channel(0).at(0, 0));
  }
}

void bm_idw(benchmark::State& state) {
  rmk::EstimatorConfig cfg;
  cfg.method = rmk::EstimatorMethod::idw;
  bench_fit_predict(state, cfg);
}

void bm_kriging(benchmark::State& state) {
  rmk::EstimatorConfig cfg;
  cfg.method = rmk::EstimatorMethod::kriging;
  rmk::Variogram v;
  v.nugget = 0.5;
  v.sill = 9.0;
  v.range = 800.0;
  cfg.variogram = v;
  bench_fit_predict(state, cfg);
}

void bm_rbf(benchmark::State& state) {
  rmk::EstimatorConfig cfg;
  cfg.method = rmk::EstimatorMethod::rbf;
  cfg.rbf_kind = rmk::RbfKind::gaussian;
  cfg.rbf_ridge = 1e-8;
  bench_fit_predict(state, cfg);
}

} // namespace

BENCHMARK(bm_idw)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_kriging)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_rbf)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
