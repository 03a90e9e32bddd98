#include <benchmark/benchmark.h>

#include "rmk/scenario.hpp"
#include "rmk/temporal.hpp"

namespace {

rmk::Scenario square_scenario(std::size_t n) {
  rmk::Scenario s;
  s.geom.cell_size = 100.0;
  s.geom.n_rows = n;
  s.geom.n_cols = n;
  s.propagation.shadowing_sigma_db = 6.0;
  s.propagation.decorrelation_distance_m = 500.0;
  rmk::Transmitter tx;
  tx.id = 0;
  tx.x = 0.5 * s.geom.width();
  tx.y = 0.5 * s.geom.height();
  tx.tx_power_w = 1.0;
  s.transmitters.push_back(tx);
  s.rng_seed = 11;
  return s;
}

void bm_ground_truth(benchmark::State& state) {
  const auto s = square_scenario(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto truth = rmk::generate_ground_truth(s);
    benchmark::DoNotOptimize(truth.channel(0).at(0, 0));
  }
}

void bm_tile_roundtrip(benchmark::State& state) {
  const auto s = square_scenario(static_cast<std::size_t>(state.range(0)));
  const auto truth_db = rmk::band_to_db(rmk::generate_ground_truth(s));
  for (auto _ : state) {
    const auto tiles = rmk::quantize_tiles(truth_db, 8, 16);
    const auto back = rmk::dequantize_tiles(tiles);
    benchmark::DoNotOptimize(back.channel(0).at(0, 0));
  }
}

} // namespace

BENCHMARK(bm_ground_truth)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_tile_roundtrip)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
