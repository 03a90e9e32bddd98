#include "rmk/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "rmk/rng.hpp"

namespace rmk {

void validate_scenario(const Scenario& s) {
  if (s.geom.n_rows < 1 || s.geom.n_cols < 1 || !(s.geom.cell_size > 0.0))
    throw ConfigError("scenario grid must have positive cell size and at least one cell");
  if (s.channels.n_channels() == 0)
    throw ConfigError("scenario needs at least one channel");
  for (std::size_t k = 1; k < s.channels.centers_hz.size(); ++k)
    if (!(s.channels.centers_hz[k] > s.channels.centers_hz[k - 1]))
      throw ConfigError("channel centers must be strictly increasing");
  if (!(s.propagation.pathloss_exponent > 0.0))
    throw ConfigError("pathloss_exponent must be positive");
  if (s.propagation.shadowing_sigma_db < 0.0)
    throw ConfigError("shadowing_sigma_db must be non-negative");
  if (!(s.propagation.decorrelation_distance_m > 0.0))
    throw ConfigError("decorrelation_distance_m must be positive");
  for (const auto& tx : s.transmitters) {
    if (!(tx.tx_power_w > 0.0))
      throw ConfigError("transmitter " + std::to_string(tx.id) + " needs positive power");
    if (tx.channel_index >= s.channels.n_channels())
      throw ConfigError("transmitter " + std::to_string(tx.id) + " channel index out of range");
    if (!s.geom.contains(tx.x, tx.y))
      throw ConfigError("transmitter " + std::to_string(tx.id) + " outside the area");
  }
  for (const auto& ob : s.obstacles) {
    if (ob.x1 == ob.x2 && ob.y1 == ob.y2)
      throw ConfigError("obstacle endpoints must be distinct");
    if (!(ob.penetration_loss_db > 0.0))
      throw ConfigError("obstacle penetration loss must be positive");
  }
}

double pathloss_gain_db(const PropagationParams& p, const Transmitter& tx,
                        double x, double y, double d_min) {
  const double d = std::hypot(x - tx.x, y - tx.y);
  return tx.reference_gain_db -
         10.0 * p.pathloss_exponent * std::log10(std::max(d, d_min));
}

namespace {

// Strict proper crossing of segments (a1,a2) x (b1,b2): the segments cross
// at an interior point of both. Collinear overlap and endpoint contact
// return false.
bool segments_cross(double a1x, double a1y, double a2x, double a2y,
                    double b1x, double b1y, double b2x, double b2y) {
  auto orient = [](double px, double py, double qx, double qy, double rx, double ry) {
    return (qx - px) * (ry - py) - (qy - py) * (rx - px);
  };
  const double d1 = orient(b1x, b1y, b2x, b2y, a1x, a1y);
  const double d2 = orient(b1x, b1y, b2x, b2y, a2x, a2y);
  const double d3 = orient(a1x, a1y, a2x, a2y, b1x, b1y);
  const double d4 = orient(a1x, a1y, a2x, a2y, b2x, b2y);
  return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
         ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

} // namespace

double obstruction_loss_db(const std::vector<Obstacle>& obstacles,
                           const Transmitter& tx, double x, double y) {
  double loss = 0.0;
  for (const auto& ob : obstacles)
    if (segments_cross(tx.x, tx.y, x, y, ob.x1, ob.y1, ob.x2, ob.y2))
      loss += ob.penetration_loss_db;
  return loss;
}

std::uint64_t shadowing_seed(const Scenario& s, int tx_id) {
  return mix_seed(mix_seed(s.rng_seed, "shadowing"),
                  static_cast<std::uint64_t>(tx_id));
}

Grid2D channel_gain_map(const Scenario& s, int tx_id) {
  validate_scenario(s);
  const Transmitter* tx = nullptr;
  for (const auto& t : s.transmitters)
    if (t.id == tx_id)
      tx = &t;
  if (!tx)
    throw DataError("unknown transmitter id " + std::to_string(tx_id));

  Grid2D gain(s.geom, Unit::dB);
  Grid2D shadow;
  const bool shadowed = s.propagation.shadowing_sigma_db > 0.0;
  if (shadowed)
    shadow = shadowing_field(s.propagation, s.geom, shadowing_seed(s, tx_id));
  const double d_min = s.geom.cell_size / 2.0;
  for (std::size_t r = 0; r < s.geom.n_rows; ++r) {
    const double cy = s.geom.cell_center_y(r);
    for (std::size_t c = 0; c < s.geom.n_cols; ++c) {
      const double cx = s.geom.cell_center_x(c);
      double g = pathloss_gain_db(s.propagation, *tx, cx, cy, d_min) -
                 obstruction_loss_db(s.obstacles, *tx, cx, cy);
      if (shadowed)
        g += shadow.at(r, c);
      gain.at(r, c) = g;
    }
  }
  return gain;
}

BandGrid generate_ground_truth(const Scenario& s) {
  validate_scenario(s);
  BandGrid truth(s.geom, Unit::LinearWatts, s.channels.n_channels(), 0.0);
  truth.channel_centers_hz = s.channels.centers_hz;
  truth.channel_width_hz = s.channels.width_hz;
  for (const auto& tx : s.transmitters) {
    const Grid2D gain = channel_gain_map(s, tx.id);
    Grid2D& ch = truth.channel(tx.channel_index);
    for (std::size_t i = 0; i < ch.size(); ++i)
      ch.values()[i] += tx.tx_power_w * std::pow(10.0, gain.values()[i] / 10.0);
  }
  return truth;
}

} // namespace rmk
