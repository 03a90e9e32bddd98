#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmk/grid.hpp"

namespace rmk {

struct Transmitter {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double tx_power_w = 1.0;
  std::size_t channel_index = 0;
  double reference_gain_db = -30.0; // gain at 1 m
};

// Thin wall segment; each proper crossing costs penetration_loss_db.
struct Obstacle {
  double x1 = 0.0, y1 = 0.0;
  double x2 = 0.0, y2 = 0.0;
  double penetration_loss_db = 0.0;
};

struct PropagationParams {
  double pathloss_exponent = 3.0;
  double shadowing_sigma_db = 0.0;
  double decorrelation_distance_m = 100.0;
  double noise_floor_dbw = -140.0;
};

struct ChannelPlan {
  std::vector<double> centers_hz = {1e9};
  double width_hz = 1e6;

  std::size_t n_channels() const { return centers_hz.size(); }
};

struct Scenario {
  GridGeometry geom;
  ChannelPlan channels;
  std::vector<Transmitter> transmitters;
  std::vector<Obstacle> obstacles;
  PropagationParams propagation;
  std::uint64_t rng_seed = 0;
};

// Throws ConfigError when invariants fail (transmitter outside the area,
// channel index out of range, non-positive power or loss, bad geometry).
void validate_scenario(const Scenario& s);

// Log-distance law: reference_gain_db - 10*eta*log10(max(d, d_min) / 1 m).
// d_min guards the near-field singularity; callers pass cell_size/2.
double pathloss_gain_db(const PropagationParams& p, const Transmitter& tx,
                        double x, double y, double d_min);

// Sum of penetration losses over obstacle segments that properly cross the
// open segment from the transmitter to (x, y). Touching an endpoint or
// running collinear does not count as a crossing.
double obstruction_loss_db(const std::vector<Obstacle>& obstacles,
                           const Transmitter& tx, double x, double y);

// Zero-mean Gaussian field (dB) with covariance sigma^2 * exp(-d/L),
// L = decorrelation_distance_m. Deterministic given seed; sigma = 0 gives
// an all-zero grid.
Grid2D shadowing_field(const PropagationParams& p, const GridGeometry& geom,
                       std::uint64_t seed);

// Seed for one transmitter's shadowing field. Depends only on the scenario
// seed and the transmitter id, so a transmitter keeps its field when the
// scenario gains or loses other transmitters.
std::uint64_t shadowing_seed(const Scenario& s, int tx_id);

// Channel power gain in dB at every cell for one transmitter: path loss +
// shadowing - obstruction. Excludes transmit power.
Grid2D channel_gain_map(const Scenario& s, int tx_id);

// Per channel, per cell: sum over that channel's transmitters of
// tx_power_w * 10^(gain_db/10). Linear watts; deterministic given seed.
BandGrid generate_ground_truth(const Scenario& s);

} // namespace rmk
