#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rmk/estimate.hpp"

namespace rmk {

struct QuantizedTile {
  std::size_t channel = 0;
  std::size_t tile_row = 0;
  std::size_t tile_col = 0;
  std::size_t n_rows = 0; // cells covered; edge tiles may be smaller
  std::size_t n_cols = 0;
  int n_bits = 8;
  double db_min = 0.0;
  double db_max = 0.0;
  std::vector<std::uint16_t> codes; // row-major, < 2^n_bits
};

struct TileSet {
  GridGeometry geom;
  std::size_t n_channels = 0;
  std::size_t tile_size = 0;
  int n_bits = 8;
  std::vector<QuantizedTile> tiles;

  const QuantizedTile& tile(std::size_t channel, std::size_t tile_row,
                            std::size_t tile_col) const;
};

// Per-tile uniform quantization over [tile min, tile max] with 2^n_bits - 1
// steps, codes by rounding. The extremes map to exact codes, which makes
// quantize of a dequantized map a fixed point; the reconstruction error is
// at most (db_max - db_min) / 2^n_bits per tile.
TileSet quantize_tiles(const BandGrid& map_db, int n_bits, std::size_t tile_size);
BandGrid dequantize_tiles(const TileSet& ts);

// On-disk layout: root/epoch_<t>/chan_<k>/tile_<r>_<c>.bin, 32-byte header
// (magic, n_bits, db_min, db_max, tile dims) then codes packed at n_bits
// per value, little-endian.
void save_tiles(const TileSet& ts, long epoch, const std::string& root_dir);
TileSet load_tiles(const std::string& root_dir, long epoch, const GridGeometry& geom);

struct Epoch {
  long time_index = 0;
  MeasurementSet measurements; // may be empty for map-only epochs
  BandGrid estimate;
};

// Sliding window of per-epoch estimates plus a committed quantized tile
// store. Single writer; reads are safe against a committed snapshot.
class MapSeries {
public:
  explicit MapSeries(std::size_t window_length);

  std::size_t window_length() const { return window_length_; }
  const std::vector<Epoch>& epochs() const { return epochs_; }

  // Appends the epoch, evicts beyond the window, and re-estimates the
  // newest map from the window union. Measurements from older epochs enter
  // the merge with weight 1/(1 + age_in_epochs); repeated sensors merge to
  // a weighted mean per (sensor, channel). Stored older estimates are not
  // recomputed.
  void window_update(MeasurementSet new_epoch, const EstimatorConfig& cfg,
                     std::size_t n_channels = 0);

  // Epoch with a precomputed estimate and no measurements.
  void push_epoch_map(long time_index, BandGrid estimate);

  // dB-domain weighted mean of the two bracketing epochs, weights
  // proportional to 1/|t - t_epoch|; exact hits return the stored map.
  // Queries outside [first, last] are bounds errors.
  BandGrid interpolate_time(double t_query) const;

  // Quantizes the newest estimate into the tile store and snapshots it as
  // the full-precision reference that incremental updates diff against.
  void commit_tiles(int n_bits, std::size_t tile_size);

  // Re-encodes only tiles where some cell moved by more than the threshold
  // against the committed reference, refreshes the reference under those
  // tiles, and returns the re-encoded tiles and their fraction.
  std::pair<std::vector<QuantizedTile>, double>
  incremental_update(const BandGrid& new_map, double change_threshold_db);

  const TileSet& tiles() const { return tiles_; }
  const BandGrid& committed_map() const { return committed_; }

private:
  std::size_t window_length_;
  std::vector<Epoch> epochs_;
  TileSet tiles_;
  BandGrid committed_;
  bool has_committed_ = false;
};

// ceil(band/chan) * ceil(side/cell)^2 * ceil(duration/step) * bits_per_px
// for a square area. Ratios within 1e-9 of an integer count as exact
// before the ceiling.
std::uint64_t storage_size_bits(double area_km2, double cell_m, double band_mhz,
                                double chan_mhz, double duration_h,
                                double step_min, int bits_per_px);

} // namespace rmk
