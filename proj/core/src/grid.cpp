#include "rmk/grid.hpp"

#include <algorithm>

namespace rmk {

std::string unit_name(Unit u) {
  return u == Unit::dB ? "dB" : "W";
}

Unit unit_from_name(const std::string& name) {
  if (name == "dB")
    return Unit::dB;
  if (name == "W")
    return Unit::LinearWatts;
  throw DataError("unknown raster unit: " + name);
}

std::size_t GridGeometry::col_of_x(double x) const {
  double f = (x - origin_x) / cell_size;
  long idx = static_cast<long>(std::floor(f));
  idx = std::clamp<long>(idx, 0, static_cast<long>(n_cols) - 1);
  return static_cast<std::size_t>(idx);
}

std::size_t GridGeometry::row_of_y(double y) const {
  double f = (max_y() - y) / cell_size;
  long idx = static_cast<long>(std::floor(f));
  idx = std::clamp<long>(idx, 0, static_cast<long>(n_rows) - 1);
  return static_cast<std::size_t>(idx);
}

double Grid2D::sample_bilinear(double x, double y) const {
  if (geom_.n_rows == 0 || geom_.n_cols == 0)
    throw BoundsError("sample on empty grid");
  if (!geom_.contains(x, y))
    throw BoundsError("sample point outside grid");
  // Fractional index in cell-center coordinates, clamped to the span of
  // centers so boundary samples reuse the outermost centers.
  double fc = (x - geom_.origin_x) / geom_.cell_size - 0.5;
  double fr = (geom_.max_y() - y) / geom_.cell_size - 0.5;
  fc = std::clamp(fc, 0.0, static_cast<double>(geom_.n_cols - 1));
  fr = std::clamp(fr, 0.0, static_cast<double>(geom_.n_rows - 1));
  std::size_t c0 = static_cast<std::size_t>(fc);
  std::size_t r0 = static_cast<std::size_t>(fr);
  if (c0 >= geom_.n_cols - 1)
    c0 = geom_.n_cols >= 2 ? geom_.n_cols - 2 : 0;
  if (r0 >= geom_.n_rows - 1)
    r0 = geom_.n_rows >= 2 ? geom_.n_rows - 2 : 0;
  std::size_t c1 = std::min(c0 + 1, geom_.n_cols - 1);
  std::size_t r1 = std::min(r0 + 1, geom_.n_rows - 1);
  double tx = fc - static_cast<double>(c0);
  double ty = fr - static_cast<double>(r0);
  double v00 = at(r0, c0), v01 = at(r0, c1);
  double v10 = at(r1, c0), v11 = at(r1, c1);
  double top = v00 + (v01 - v00) * tx;
  double bot = v10 + (v11 - v10) * tx;
  return top + (bot - top) * ty;
}

double Grid2D::sample_nearest(double x, double y) const {
  if (geom_.n_rows == 0 || geom_.n_cols == 0)
    throw BoundsError("sample on empty grid");
  if (!geom_.contains(x, y))
    throw BoundsError("sample point outside grid");
  return at(geom_.row_of_y(y), geom_.col_of_x(x));
}

double Grid2D::min_value() const {
  if (values_.empty())
    throw DataError("min of empty grid");
  return *std::min_element(values_.begin(), values_.end());
}

double Grid2D::max_value() const {
  if (values_.empty())
    throw DataError("max of empty grid");
  return *std::max_element(values_.begin(), values_.end());
}

Grid2D grid_to_db(const Grid2D& g) {
  if (g.unit() == Unit::dB)
    return g;
  Grid2D out(g.geom(), Unit::dB);
  for (std::size_t i = 0; i < g.size(); ++i)
    out.values()[i] = to_db(g.values()[i]);
  return out;
}

Grid2D grid_to_linear(const Grid2D& g) {
  if (g.unit() == Unit::LinearWatts)
    return g;
  Grid2D out(g.geom(), Unit::LinearWatts);
  for (std::size_t i = 0; i < g.size(); ++i)
    out.values()[i] = from_db(g.values()[i]);
  return out;
}

BandGrid band_to_db(const BandGrid& bg) {
  BandGrid out = bg;
  for (auto& g : out.channels)
    g = grid_to_db(g);
  return out;
}

BandGrid band_to_linear(const BandGrid& bg) {
  BandGrid out = bg;
  for (auto& g : out.channels)
    g = grid_to_linear(g);
  return out;
}

} // namespace rmk
