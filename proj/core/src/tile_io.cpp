#include <cstring>
#include <filesystem>
#include <fstream>

#include "rmk/temporal.hpp"

namespace rmk {
namespace {

constexpr char kMagic[8] = {'R', 'M', 'K', 'T', 'I', 'L', 'E', '1'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string tile_bytes(const QuantizedTile& t) {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(t.n_bits));
  put_f64(out, t.db_min);
  put_f64(out, t.db_max);
  put_u16(out, static_cast<std::uint16_t>(t.n_rows));
  put_u16(out, static_cast<std::uint16_t>(t.n_cols));

  // Codes packed LSB-first at n_bits per value.
  std::uint64_t acc = 0;
  int filled = 0;
  for (std::uint16_t code : t.codes) {
    acc |= static_cast<std::uint64_t>(code) << filled;
    filled += t.n_bits;
    while (filled >= 8) {
      out.push_back(static_cast<char>(acc & 0xff));
      acc >>= 8;
      filled -= 8;
    }
  }
  if (filled > 0)
    out.push_back(static_cast<char>(acc & 0xff));
  return out;
}

QuantizedTile parse_tile(const std::string& bytes, const std::string& what) {
  if (bytes.size() < 32 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw DataError("not a tile file: " + what);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  QuantizedTile t;
  t.n_bits = static_cast<int>(get_u32(p + 8));
  if (t.n_bits < 1 || t.n_bits > 16)
    throw DataError("tile bit depth out of range in " + what);
  t.db_min = get_f64(p + 12);
  t.db_max = get_f64(p + 20);
  t.n_rows = get_u16(p + 28);
  t.n_cols = get_u16(p + 30);
  const std::size_t n = t.n_rows * t.n_cols;
  const std::size_t need = 32 + (n * static_cast<std::size_t>(t.n_bits) + 7) / 8;
  if (bytes.size() < need)
    throw DataError("tile payload truncated: " + what);

  t.codes.resize(n);
  std::uint64_t acc = 0;
  int filled = 0;
  std::size_t byte = 32;
  const std::uint64_t mask = (1ULL << t.n_bits) - 1;
  for (std::size_t i = 0; i < n; ++i) {
    while (filled < t.n_bits) {
      acc |= static_cast<std::uint64_t>(p[byte++]) << filled;
      filled += 8;
    }
    t.codes[i] = static_cast<std::uint16_t>(acc & mask);
    acc >>= t.n_bits;
    filled -= t.n_bits;
  }
  return t;
}

} // namespace

void save_tiles(const TileSet& ts, long epoch, const std::string& root_dir) {
  namespace fs = std::filesystem;
  const fs::path epoch_dir = fs::path(root_dir) / ("epoch_" + std::to_string(epoch));
  for (const auto& t : ts.tiles) {
    const fs::path dir = epoch_dir / ("chan_" + std::to_string(t.channel));
    fs::create_directories(dir);
    const fs::path file = dir / ("tile_" + std::to_string(t.tile_row) + "_" +
                                 std::to_string(t.tile_col) + ".bin");
    std::ofstream os(file, std::ios::binary);
    if (!os)
      throw DataError("cannot write tile: " + file.string());
    const std::string bytes = tile_bytes(t);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os)
      throw DataError("tile write failed: " + file.string());
  }
}

TileSet load_tiles(const std::string& root_dir, long epoch,
                   const GridGeometry& geom) {
  namespace fs = std::filesystem;
  const fs::path epoch_dir = fs::path(root_dir) / ("epoch_" + std::to_string(epoch));
  if (!fs::is_directory(epoch_dir))
    throw DataError("missing epoch directory: " + epoch_dir.string());

  TileSet ts;
  ts.geom = geom;
  for (const auto& chan_entry : fs::directory_iterator(epoch_dir)) {
    const std::string chan_name = chan_entry.path().filename().string();
    if (chan_name.rfind("chan_", 0) != 0)
      continue;
    const std::size_t channel = std::stoul(chan_name.substr(5));
    ts.n_channels = std::max(ts.n_channels, channel + 1);
    for (const auto& tile_entry : fs::directory_iterator(chan_entry.path())) {
      std::string name = tile_entry.path().filename().string();
      if (name.rfind("tile_", 0) != 0 || name.size() < 10)
        continue;
      name = name.substr(5, name.size() - 9); // strip prefix and .bin
      const auto sep = name.find('_');
      if (sep == std::string::npos)
        continue;
      std::ifstream is(tile_entry.path(), std::ios::binary);
      if (!is)
        throw DataError("cannot open tile: " + tile_entry.path().string());
      std::string bytes((std::istreambuf_iterator<char>(is)),
                        std::istreambuf_iterator<char>());
      QuantizedTile t = parse_tile(bytes, tile_entry.path().string());
      t.channel = channel;
      t.tile_row = std::stoul(name.substr(0, sep));
      t.tile_col = std::stoul(name.substr(sep + 1));
      ts.n_bits = t.n_bits;
      ts.tile_size = std::max({ts.tile_size, t.n_rows, t.n_cols});
      ts.tiles.push_back(std::move(t));
    }
  }
  if (ts.tiles.empty())
    throw DataError("no tiles found under " + epoch_dir.string());
  return ts;
}

} // namespace rmk
