#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rmk/grid.hpp"

namespace rmk {

enum class SensorKind { dedicated, crowd };

struct Sensor {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  SensorKind kind = SensorKind::dedicated;
};

struct MeasurementFlags {
  bool quantized = false;
  bool rejected = false;

  bool operator==(const MeasurementFlags&) const = default;
};

struct Measurement {
  int sensor_id = 0;
  std::size_t channel_index = 0;
  long time_index = 0;
  double psd_db = 0.0;
  MeasurementFlags flags;
};

// Immutable after each transformation; transformations return a new set.
struct MeasurementSet {
  GridGeometry geom;
  std::vector<Sensor> sensors;
  std::vector<Measurement> measurements;

  const Sensor& sensor_by_id(int id) const;
};

// Throws DataError on a dangling sensor_id, duplicate (sensor, channel,
// time), a non-finite unrejected psd, or an out-of-bounds sensor.
void validate_measurements(const MeasurementSet& ms);

enum class PlacementMode { uniform_grid, uniform_random, custom };

// uniform_grid: near-square lattice covering the area, first n sites in
// row-major order; n = 1 degenerates to the area center. uniform_random:
// i.i.d. uniform positions, deterministic by seed. custom: caller positions
// validated in-bounds.
std::vector<Sensor> place_sensors(const GridGeometry& area, std::size_t n,
                                  PlacementMode mode, std::uint64_t seed,
                                  const std::vector<std::pair<double, double>>& custom = {});

// psd_db = bilinear sample of the dB truth at the sensor + N(0, sigma^2),
// one measurement per sensor per channel at the given time index.
MeasurementSet synthesize_measurements(const BandGrid& truth,
                                       const std::vector<Sensor>& sensors,
                                       double noise_sigma_db, std::uint64_t seed,
                                       long time_index = 0);

// Uniform mid-rise quantizer with 2^n_bits levels over [db_min, db_max],
// clamped; idempotent at fixed settings. n_bits = 1 is a threshold test at
// the interval midpoint.
MeasurementSet quantize_measurements(const MeasurementSet& ms, int n_bits,
                                     double db_min, double db_max);

// Robust spatial outlier filter. Per unrejected measurement, the residual
// against the median of its neighbor_count nearest same-channel
// measurements; flags rejected when |residual| exceeds
// k_mad * 1.4826 * MAD of all residuals. Channels with fewer than
// neighbor_count + 1 measurements pass through untouched. psd values are
// never modified.
MeasurementSet filter_bad_data(const MeasurementSet& ms, double k_mad,
                               std::size_t neighbor_count);

// CSV with header sensor_id,x_m,y_m,channel,time_index,psd_db,flags.
// flags is empty, "q", "r", or "qr".
void save_measurements(const MeasurementSet& ms, const std::string& path);
MeasurementSet load_measurements(const std::string& path, const GridGeometry& geom);
void write_measurements(const MeasurementSet& ms, std::ostream& os);
MeasurementSet read_measurements(std::istream& is, const GridGeometry& geom);

} // namespace rmk
