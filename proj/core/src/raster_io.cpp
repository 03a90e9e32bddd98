#include "rmk/grid.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace rmk {
namespace {

// Shortest representation that round-trips the double exactly.
void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view tok, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw DataError(std::string("bad numeric field in ") + what + ": " + std::string(tok));
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t')
      ++j;
    if (j > i)
      out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string read_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line))
    throw DataError(std::string("truncated raster: missing ") + what);
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  return line;
}

} // namespace

void write_grid(const Grid2D& g, std::ostream& os) {
  std::string buf;
  buf.reserve(g.size() * 12 + 64);
  buf += "RMK-GRID 1\n";
  append_double(buf, g.geom().origin_x);
  buf += ' ';
  append_double(buf, g.geom().origin_y);
  buf += ' ';
  append_double(buf, g.geom().cell_size);
  buf += ' ';
  buf += std::to_string(g.n_rows());
  buf += ' ';
  buf += std::to_string(g.n_cols());
  buf += ' ';
  buf += unit_name(g.unit());
  buf += '\n';
  for (std::size_t r = 0; r < g.n_rows(); ++r) {
    for (std::size_t c = 0; c < g.n_cols(); ++c) {
      if (c)
        buf += ' ';
      append_double(buf, g.at(r, c));
    }
    buf += '\n';
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Grid2D read_grid(std::istream& is) {
  std::string magic = read_line(is, "magic line");
  if (magic != "RMK-GRID 1")
    throw DataError("not a raster file (bad magic line): " + magic);
  std::string header = read_line(is, "header line");
  auto tok = split_ws(header);
  if (tok.size() != 6)
    throw DataError("raster header needs 6 fields, got " + std::to_string(tok.size()));
  GridGeometry geom;
  geom.origin_x = parse_double(tok[0], "raster header");
  geom.origin_y = parse_double(tok[1], "raster header");
  geom.cell_size = parse_double(tok[2], "raster header");
  if (!(geom.cell_size > 0.0))
    throw DataError("raster cell_size must be positive");
  double rows_d = parse_double(tok[3], "raster header");
  double cols_d = parse_double(tok[4], "raster header");
  if (rows_d < 1 || cols_d < 1 || rows_d != std::floor(rows_d) || cols_d != std::floor(cols_d))
    throw DataError("raster dimensions must be positive integers");
  geom.n_rows = static_cast<std::size_t>(rows_d);
  geom.n_cols = static_cast<std::size_t>(cols_d);
  Unit unit = unit_from_name(std::string(tok[5]));

  Grid2D g(geom, unit);
  for (std::size_t r = 0; r < geom.n_rows; ++r) {
    std::string line = read_line(is, "data row");
    auto vals = split_ws(line);
    if (vals.size() != geom.n_cols)
      throw DataError("raster row " + std::to_string(r) + " has " +
                      std::to_string(vals.size()) + " values, expected " +
                      std::to_string(geom.n_cols));
    for (std::size_t c = 0; c < geom.n_cols; ++c)
      g.at(r, c) = parse_double(vals[c], "raster data");
  }
  return g;
}

void save_grid(const Grid2D& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw DataError("cannot open for writing: " + path);
  write_grid(g, os);
  if (!os)
    throw DataError("write failed: " + path);
}

Grid2D load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw DataError("cannot open raster: " + path);
  return read_grid(is);
}

} // namespace rmk
