#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "rmk/errors.hpp"

namespace rmk {

constexpr double kDbFloor = -200.0;
constexpr double kLinearFloor = 1e-20;

// dB re 1 W. Values at or below the linear floor clamp to the dB floor so
// that empty cells never produce -inf.
inline double to_db(double watts) {
  if (!(watts > kLinearFloor))
    return kDbFloor;
  return 10.0 * std::log10(watts);
}

inline double from_db(double db) {
  if (db <= kDbFloor)
    return kLinearFloor;
  return std::pow(10.0, db / 10.0);
}

enum class Unit { dB, LinearWatts };

std::string unit_name(Unit u);
Unit unit_from_name(const std::string& name);

// Axis-aligned raster of square cells. origin is the south-west corner of
// the covered rectangle; row 0 is the northernmost row (north-up layout).
struct GridGeometry {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  double width() const { return static_cast<double>(n_cols) * cell_size; }
  double height() const { return static_cast<double>(n_rows) * cell_size; }
  double max_x() const { return origin_x + width(); }
  double max_y() const { return origin_y + height(); }

  double cell_center_x(std::size_t col) const {
    return origin_x + (static_cast<double>(col) + 0.5) * cell_size;
  }
  double cell_center_y(std::size_t row) const {
    return origin_y + (static_cast<double>(n_rows - row) - 0.5) * cell_size;
  }

  // Cell containing (x, y); the north and east boundary edges belong to the
  // outermost cells so the full rectangle is covered.
  std::size_t col_of_x(double x) const;
  std::size_t row_of_y(double y) const;

  bool contains(double x, double y) const {
    return x >= origin_x && x <= max_x() && y >= origin_y && y <= max_y();
  }

  bool operator==(const GridGeometry& o) const {
    return origin_x == o.origin_x && origin_y == o.origin_y &&
           cell_size == o.cell_size && n_rows == o.n_rows && n_cols == o.n_cols;
  }
};

class Grid2D {
public:
  Grid2D() = default;
  Grid2D(GridGeometry geom, Unit unit, double fill = 0.0)
      : geom_(geom), unit_(unit),
        values_(geom.n_rows * geom.n_cols, fill) {}

  const GridGeometry& geom() const { return geom_; }
  Unit unit() const { return unit_; }
  void set_unit(Unit u) { unit_ = u; }

  std::size_t n_rows() const { return geom_.n_rows; }
  std::size_t n_cols() const { return geom_.n_cols; }
  std::size_t size() const { return values_.size(); }

  double& at(std::size_t row, std::size_t col) {
    return values_[row * geom_.n_cols + col];
  }
  double at(std::size_t row, std::size_t col) const {
    return values_[row * geom_.n_cols + col];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  // Bilinear interpolation between the four surrounding cell centers.
  // Exact at centers; beyond the outer ring of centers the fractional index
  // clamps, so the result never leaves the range of the nearby values.
  double sample_bilinear(double x, double y) const;

  // Nearest cell-center value.
  double sample_nearest(double x, double y) const;

  double min_value() const;
  double max_value() const;

private:
  GridGeometry geom_;
  Unit unit_ = Unit::dB;
  std::vector<double> values_;
};

Grid2D grid_to_db(const Grid2D& g);
Grid2D grid_to_linear(const Grid2D& g);

// One raster per channel, sharing the geometry. channel_centers_hz is
// strictly increasing when set.
struct BandGrid {
  std::vector<Grid2D> channels;
  std::vector<double> channel_centers_hz;
  double channel_width_hz = 0.0;

  BandGrid() = default;
  BandGrid(const GridGeometry& geom, Unit unit, std::size_t n_channels,
           double fill = 0.0) {
    channels.assign(n_channels, Grid2D(geom, unit, fill));
  }

  Grid2D& channel(std::size_t k) { return channels.at(k); }
  const Grid2D& channel(std::size_t k) const { return channels.at(k); }
  std::size_t n_channels() const { return channels.size(); }
  const GridGeometry& geom() const { return channels.front().geom(); }
  Unit unit() const { return channels.front().unit(); }
};

BandGrid band_to_db(const BandGrid& bg);
BandGrid band_to_linear(const BandGrid& bg);

// Text raster format. Line 1: "RMK-GRID 1". Line 2: origin_x origin_y
// cell_size n_rows n_cols unit. Then n_rows lines of n_cols values,
// row-major, row 0 = northernmost. Doubles are written with the shortest
// round-trip representation, so save/load is byte-stable.
void save_grid(const Grid2D& g, const std::string& path);
Grid2D load_grid(const std::string& path);
void write_grid(const Grid2D& g, std::ostream& os);
Grid2D read_grid(std::istream& is);

} // namespace rmk
