#include "rmk/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rmk {

const QuantizedTile& TileSet::tile(std::size_t channel, std::size_t tile_row,
                                   std::size_t tile_col) const {
  for (const auto& t : tiles)
    if (t.channel == channel && t.tile_row == tile_row && t.tile_col == tile_col)
      return t;
  throw DataError("missing tile " + std::to_string(tile_row) + "," +
                  std::to_string(tile_col) + " on channel " +
                  std::to_string(channel));
}

namespace {

QuantizedTile encode_tile(const Grid2D& g, std::size_t channel,
                          std::size_t tile_row, std::size_t tile_col,
                          std::size_t tile_size, int n_bits) {
  QuantizedTile t;
  t.channel = channel;
  t.tile_row = tile_row;
  t.tile_col = tile_col;
  const std::size_t r0 = tile_row * tile_size;
  const std::size_t c0 = tile_col * tile_size;
  t.n_rows = std::min(tile_size, g.n_rows() - r0);
  t.n_cols = std::min(tile_size, g.n_cols() - c0);
  t.n_bits = n_bits;

  double lo = g.at(r0, c0), hi = lo;
  for (std::size_t r = 0; r < t.n_rows; ++r)
    for (std::size_t c = 0; c < t.n_cols; ++c) {
      const double v = g.at(r0 + r, c0 + c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  t.db_min = lo;
  // A constant tile still needs db_min < db_max; the offset is never
  // reached because every code is then 0.
  t.db_max = hi > lo ? hi : lo + 1e-9;

  const double levels = std::pow(2.0, n_bits) - 1.0;
  const double step = (t.db_max - t.db_min) / levels;
  t.codes.resize(t.n_rows * t.n_cols);
  for (std::size_t r = 0; r < t.n_rows; ++r)
    for (std::size_t c = 0; c < t.n_cols; ++c) {
      double code = std::round((g.at(r0 + r, c0 + c) - t.db_min) / step);
      code = std::clamp(code, 0.0, levels);
      t.codes[r * t.n_cols + c] = static_cast<std::uint16_t>(code);
    }
  return t;
}

void decode_tile(const QuantizedTile& t, std::size_t tile_size, Grid2D& g) {
  const std::size_t r0 = t.tile_row * tile_size;
  const std::size_t c0 = t.tile_col * tile_size;
  const double levels = std::pow(2.0, t.n_bits) - 1.0;
  const double step = (t.db_max - t.db_min) / levels;
  for (std::size_t r = 0; r < t.n_rows; ++r)
    for (std::size_t c = 0; c < t.n_cols; ++c)
      g.at(r0 + r, c0 + c) =
          t.db_min + static_cast<double>(t.codes[r * t.n_cols + c]) * step;
}

} // namespace

TileSet quantize_tiles(const BandGrid& map_db, int n_bits, std::size_t tile_size) {
  if (n_bits < 1 || n_bits > 16)
    throw ConfigError("tile n_bits must be in [1, 16]");
  if (tile_size < 8)
    throw ConfigError("tile_size must be at least 8");
  if (map_db.n_channels() == 0)
    throw DataError("cannot quantize an empty band grid");
  if (map_db.unit() != Unit::dB)
    throw DataError("tile store expects a dB map");

  TileSet ts;
  ts.geom = map_db.geom();
  ts.n_channels = map_db.n_channels();
  ts.tile_size = tile_size;
  ts.n_bits = n_bits;
  const std::size_t tr = (ts.geom.n_rows + tile_size - 1) / tile_size;
  const std::size_t tc = (ts.geom.n_cols + tile_size - 1) / tile_size;
  for (std::size_t k = 0; k < ts.n_channels; ++k)
    for (std::size_t r = 0; r < tr; ++r)
      for (std::size_t c = 0; c < tc; ++c)
        ts.tiles.push_back(encode_tile(map_db.channel(k), k, r, c, tile_size, n_bits));
  return ts;
}

BandGrid dequantize_tiles(const TileSet& ts) {
  if (ts.tiles.empty())
    throw DataError("empty tile set");
  BandGrid out(ts.geom, Unit::dB, ts.n_channels, kDbFloor);
  for (const auto& t : ts.tiles)
    decode_tile(t, ts.tile_size, out.channel(t.channel));
  return out;
}

MapSeries::MapSeries(std::size_t window_length) : window_length_(window_length) {
  if (window_length_ < 1)
    throw ConfigError("window_length must be at least 1");
}

namespace {

long epoch_time_of(const MeasurementSet& ms) {
  if (ms.measurements.empty())
    throw DataError("epoch needs at least one measurement");
  const long t = ms.measurements.front().time_index;
  for (const auto& m : ms.measurements)
    if (m.time_index != t)
      throw DataError("epoch measurements must share one time index");
  return t;
}

} // namespace

void MapSeries::window_update(MeasurementSet new_epoch, const EstimatorConfig& cfg,
                              std::size_t n_channels) {
  const long t = epoch_time_of(new_epoch);
  if (!epochs_.empty() && t <= epochs_.back().time_index)
    throw DataError("epoch time must be strictly increasing, got " +
                    std::to_string(t) + " after " +
                    std::to_string(epochs_.back().time_index));

  Epoch ep;
  ep.time_index = t;
  ep.measurements = std::move(new_epoch);
  epochs_.push_back(std::move(ep));
  if (epochs_.size() > window_length_)
    epochs_.erase(epochs_.begin(),
                  epochs_.begin() + static_cast<long>(epochs_.size() - window_length_));

  // Recency-weighted merge of the window: one synthetic measurement per
  // (sensor, channel) with a weighted-mean psd, then a plain map fit.
  struct Acc {
    double wsum = 0.0;
    double vsum = 0.0;
    bool quantized = false;
  };
  std::map<std::pair<int, std::size_t>, Acc> merged;
  MeasurementSet window_set;
  window_set.geom = epochs_.back().measurements.geom;
  std::map<int, Sensor> sensors; // newest position wins
  for (std::size_t e = 0; e < epochs_.size(); ++e) {
    const double age = static_cast<double>(epochs_.size() - 1 - e);
    const double w = 1.0 / (1.0 + age);
    for (const auto& m : epochs_[e].measurements.measurements) {
      if (m.flags.rejected)
        continue;
      auto& acc = merged[{m.sensor_id, m.channel_index}];
      acc.wsum += w;
      acc.vsum += w * m.psd_db;
      acc.quantized = acc.quantized || m.flags.quantized;
    }
    for (const auto& s : epochs_[e].measurements.sensors)
      sensors[s.id] = s;
  }
  for (const auto& [id, s] : sensors)
    window_set.sensors.push_back(s);
  for (const auto& [key, acc] : merged) {
    Measurement m;
    m.sensor_id = key.first;
    m.channel_index = key.second;
    m.time_index = t;
    m.psd_db = acc.vsum / acc.wsum;
    m.flags.quantized = acc.quantized;
    window_set.measurements.push_back(m);
  }

  epochs_.back().estimate = estimate_map(window_set, cfg, n_channels);
}

void MapSeries::push_epoch_map(long time_index, BandGrid estimate) {
  if (!epochs_.empty() && time_index <= epochs_.back().time_index)
    throw DataError("epoch time must be strictly increasing");
  if (estimate.n_channels() == 0)
    throw DataError("epoch map needs at least one channel");
  Epoch ep;
  ep.time_index = time_index;
  ep.estimate = std::move(estimate);
  epochs_.push_back(std::move(ep));
  if (epochs_.size() > window_length_)
    epochs_.erase(epochs_.begin(),
                  epochs_.begin() + static_cast<long>(epochs_.size() - window_length_));
}

BandGrid MapSeries::interpolate_time(double t_query) const {
  if (epochs_.empty())
    throw DataError("series has no epochs");
  const double t_first = static_cast<double>(epochs_.front().time_index);
  const double t_last = static_cast<double>(epochs_.back().time_index);
  if (t_query < t_first || t_query > t_last)
    throw BoundsError("time query outside the stored epoch span");

  for (const auto& ep : epochs_)
    if (static_cast<double>(ep.time_index) == t_query)
      return ep.estimate;

  std::size_t hi = 1;
  while (static_cast<double>(epochs_[hi].time_index) < t_query)
    ++hi;
  const Epoch& a = epochs_[hi - 1];
  const Epoch& b = epochs_[hi];
  const double da = t_query - static_cast<double>(a.time_index);
  const double db = static_cast<double>(b.time_index) - t_query;
  const double wa = (1.0 / da) / (1.0 / da + 1.0 / db);
  const double wb = 1.0 - wa;

  BandGrid out = a.estimate;
  for (std::size_t k = 0; k < out.n_channels(); ++k) {
    const auto& gb = b.estimate.channel(k);
    auto& ga = out.channel(k);
    for (std::size_t i = 0; i < ga.size(); ++i)
      ga.values()[i] = wa * ga.values()[i] + wb * gb.values()[i];
  }
  return out;
}

void MapSeries::commit_tiles(int n_bits, std::size_t tile_size) {
  if (epochs_.empty())
    throw DataError("no epoch to commit");
  committed_ = epochs_.back().estimate;
  tiles_ = quantize_tiles(committed_, n_bits, tile_size);
  has_committed_ = true;
}

std::pair<std::vector<QuantizedTile>, double>
MapSeries::incremental_update(const BandGrid& new_map, double change_threshold_db) {
  if (!has_committed_)
    throw DataError("no committed tile store; commit_tiles first");
  if (!(new_map.geom() == committed_.geom()) ||
      new_map.n_channels() != committed_.n_channels())
    throw DataError("incremental update geometry mismatch");

  std::vector<QuantizedTile> updated;
  for (auto& t : tiles_.tiles) {
    const Grid2D& cur = new_map.channel(t.channel);
    Grid2D& ref = committed_.channel(t.channel);
    const std::size_t r0 = t.tile_row * tiles_.tile_size;
    const std::size_t c0 = t.tile_col * tiles_.tile_size;
    double max_delta = 0.0;
    for (std::size_t r = 0; r < t.n_rows; ++r)
      for (std::size_t c = 0; c < t.n_cols; ++c)
        max_delta = std::max(max_delta,
                             std::fabs(cur.at(r0 + r, c0 + c) - ref.at(r0 + r, c0 + c)));
    if (max_delta > change_threshold_db) {
      t = encode_tile(cur, t.channel, t.tile_row, t.tile_col, tiles_.tile_size,
                      tiles_.n_bits);
      for (std::size_t r = 0; r < t.n_rows; ++r)
        for (std::size_t c = 0; c < t.n_cols; ++c)
          ref.at(r0 + r, c0 + c) = cur.at(r0 + r, c0 + c);
      updated.push_back(t);
    }
  }
  const double fraction =
      tiles_.tiles.empty()
          ? 0.0
          : static_cast<double>(updated.size()) / static_cast<double>(tiles_.tiles.size());
  return {std::move(updated), fraction};
}

namespace {

std::uint64_t snap_ceil(double ratio) {
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) <= 1e-9 * std::max(1.0, std::fabs(rounded)))
    return static_cast<std::uint64_t>(rounded);
  return static_cast<std::uint64_t>(std::ceil(ratio));
}

} // namespace

std::uint64_t storage_size_bits(double area_km2, double cell_m, double band_mhz,
                                double chan_mhz, double duration_h,
                                double step_min, int bits_per_px) {
  if (!(area_km2 > 0.0) || !(cell_m > 0.0) || !(band_mhz > 0.0) ||
      !(chan_mhz > 0.0) || !(duration_h > 0.0) || !(step_min > 0.0) ||
      bits_per_px < 1)
    throw ConfigError("storage_size_bits needs positive arguments");
  const double side_m = std::sqrt(area_km2) * 1000.0;
  const std::uint64_t cells_per_side = snap_ceil(side_m / cell_m);
  const std::uint64_t channels = snap_ceil(band_mhz / chan_mhz);
  const std::uint64_t steps = snap_ceil(duration_h * 60.0 / step_min);
  return channels * cells_per_side * cells_per_side * steps *
         static_cast<std::uint64_t>(bits_per_px);
}

} // namespace rmk
