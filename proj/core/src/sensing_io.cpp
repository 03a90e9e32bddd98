#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "rmk/sensing.hpp"

namespace rmk {
namespace {

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

long parse_long(std::string_view tok, const char* what) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw DataError(std::string("bad integer field in ") + what + ": " + std::string(tok));
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

constexpr const char* kHeader = "sensor_id,x_m,y_m,channel,time_index,psd_db,flags";

} // namespace

void write_measurements(const MeasurementSet& ms, std::ostream& os) {
  std::string buf;
  buf.reserve(ms.measurements.size() * 48 + 64);
  buf += kHeader;
  buf += '\n';
  for (const auto& m : ms.measurements) {
    const Sensor& s = ms.sensor_by_id(m.sensor_id);
    buf += std::to_string(m.sensor_id);
    buf += ',';
    append_double(buf, s.x);
    buf += ',';
    append_double(buf, s.y);
    buf += ',';
    buf += std::to_string(m.channel_index);
    buf += ',';
    buf += std::to_string(m.time_index);
    buf += ',';
    append_double(buf, m.psd_db);
    buf += ',';
    if (m.flags.quantized)
      buf += 'q';
    if (m.flags.rejected)
      buf += 'r';
    buf += '\n';
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

MeasurementSet read_measurements(std::istream& is, const GridGeometry& geom) {
  std::string line;
  if (!std::getline(is, line))
    throw DataError("empty measurement file");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != kHeader)
    throw DataError("bad measurement CSV header: " + line);

  MeasurementSet ms;
  ms.geom = geom;
  std::unordered_map<int, std::size_t> sensor_index;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto f = split_csv(line);
    if (f.size() != 7)
      throw DataError("measurement line " + std::to_string(lineno) + " has " +
                      std::to_string(f.size()) + " fields, expected 7");
    Measurement m;
    m.sensor_id = static_cast<int>(parse_long(f[0], "sensor_id"));
    const double x = parse_double(f[1], "x_m");
    const double y = parse_double(f[2], "y_m");
    const long channel = parse_long(f[3], "channel");
    if (channel < 0)
      throw DataError("negative channel on line " + std::to_string(lineno));
    m.channel_index = static_cast<std::size_t>(channel);
    m.time_index = parse_long(f[4], "time_index");
    m.psd_db = parse_double(f[5], "psd_db");
    for (char c : f[6]) {
      if (c == 'q')
        m.flags.quantized = true;
      else if (c == 'r')
        m.flags.rejected = true;
      else
        throw DataError(std::string("unknown flag '") + c + "' on line " +
                        std::to_string(lineno));
    }
    auto it = sensor_index.find(m.sensor_id);
    if (it == sensor_index.end()) {
      sensor_index.emplace(m.sensor_id, ms.sensors.size());
      ms.sensors.push_back({m.sensor_id, x, y, SensorKind::dedicated});
    } else {
      const Sensor& s = ms.sensors[it->second];
      if (s.x != x || s.y != y)
        throw DataError("sensor " + std::to_string(m.sensor_id) +
                        " has conflicting positions (line " + std::to_string(lineno) + ")");
    }
    ms.measurements.push_back(m);
  }
  validate_measurements(ms);
  return ms;
}

void save_measurements(const MeasurementSet& ms, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw DataError("cannot open for writing: " + path);
  write_measurements(ms, os);
  if (!os)
    throw DataError("write failed: " + path);
}

MeasurementSet load_measurements(const std::string& path, const GridGeometry& geom) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw DataError("cannot open measurement file: " + path);
  return read_measurements(is, geom);
}

} // namespace rmk
