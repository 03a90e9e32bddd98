#include "rmk/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "rmk/rng.hpp"

namespace rmk {

const Sensor& MeasurementSet::sensor_by_id(int id) const {
  for (const auto& s : sensors)
    if (s.id == id)
      return s;
  throw DataError("unknown sensor id " + std::to_string(id));
}

void validate_measurements(const MeasurementSet& ms) {
  std::unordered_map<int, const Sensor*> by_id;
  for (const auto& s : ms.sensors) {
    if (!by_id.emplace(s.id, &s).second)
      throw DataError("duplicate sensor id " + std::to_string(s.id));
    if (!ms.geom.contains(s.x, s.y))
      throw DataError("sensor " + std::to_string(s.id) + " outside the area");
  }
  std::set<std::tuple<int, std::size_t, long>> keys;
  for (const auto& m : ms.measurements) {
    if (!by_id.count(m.sensor_id))
      throw DataError("measurement references unknown sensor " +
                      std::to_string(m.sensor_id));
    if (!keys.insert({m.sensor_id, m.channel_index, m.time_index}).second)
      throw DataError("duplicate measurement for sensor " +
                      std::to_string(m.sensor_id) + " channel " +
                      std::to_string(m.channel_index) + " time " +
                      std::to_string(m.time_index));
    if (!m.flags.rejected && !std::isfinite(m.psd_db))
      throw DataError("non-finite psd for sensor " + std::to_string(m.sensor_id));
  }
}

std::vector<Sensor> place_sensors(const GridGeometry& area, std::size_t n,
                                  PlacementMode mode, std::uint64_t seed,
                                  const std::vector<std::pair<double, double>>& custom) {
  if (n < 1)
    throw DataError("sensor count must be at least 1");
  std::vector<Sensor> out;
  out.reserve(n);
  switch (mode) {
  case PlacementMode::uniform_grid: {
    if (n > area.n_rows * area.n_cols)
      throw DataError("uniform_grid placement: " + std::to_string(n) +
                      " sensors exceed " + std::to_string(area.n_rows * area.n_cols) +
                      " grid cells");
    // Near-square lattice: row count matches the aspect ratio, then the
    // first n sites in row-major order.
    const double aspect = area.height() / area.width();
    std::size_t rows = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(n) * aspect)));
    rows = std::clamp<std::size_t>(rows, 1, n);
    const std::size_t cols = (n + rows - 1) / rows;
    const double dx = area.width() / static_cast<double>(cols);
    const double dy = area.height() / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows && out.size() < n; ++r)
      for (std::size_t c = 0; c < cols && out.size() < n; ++c)
        out.push_back({static_cast<int>(out.size()),
                       area.origin_x + (static_cast<double>(c) + 0.5) * dx,
                       area.origin_y + (static_cast<double>(r) + 0.5) * dy,
                       SensorKind::dedicated});
    break;
  }
  case PlacementMode::uniform_random: {
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.uniform(area.origin_x, area.max_x());
      const double y = rng.uniform(area.origin_y, area.max_y());
      out.push_back({static_cast<int>(i), x, y, SensorKind::dedicated});
    }
    break;
  }
  case PlacementMode::custom: {
    if (custom.size() != n)
      throw DataError("custom placement needs exactly n positions");
    for (std::size_t i = 0; i < n; ++i) {
      if (!area.contains(custom[i].first, custom[i].second))
        throw DataError("custom sensor position outside the area");
      out.push_back({static_cast<int>(i), custom[i].first, custom[i].second,
                     SensorKind::dedicated});
    }
    break;
  }
  }
  return out;
}

MeasurementSet synthesize_measurements(const BandGrid& truth,
                                       const std::vector<Sensor>& sensors,
                                       double noise_sigma_db, std::uint64_t seed,
                                       long time_index) {
  if (truth.n_channels() == 0)
    throw DataError("truth grid has no channels");
  if (noise_sigma_db < 0.0)
    throw ConfigError("noise_sigma_db must be non-negative");
  const BandGrid truth_db = band_to_db(truth);
  MeasurementSet ms;
  ms.geom = truth_db.geom();
  ms.sensors = sensors;
  Rng rng(seed);
  for (const auto& s : sensors) {
    if (!ms.geom.contains(s.x, s.y))
      throw DataError("sensor " + std::to_string(s.id) + " outside the grid");
    for (std::size_t k = 0; k < truth_db.n_channels(); ++k) {
      Measurement m;
      m.sensor_id = s.id;
      m.channel_index = k;
      m.time_index = time_index;
      m.psd_db = truth_db.channel(k).sample_bilinear(s.x, s.y);
      if (noise_sigma_db > 0.0)
        m.psd_db += rng.normal(0.0, noise_sigma_db);
      ms.measurements.push_back(m);
    }
  }
  return ms;
}

MeasurementSet quantize_measurements(const MeasurementSet& ms, int n_bits,
                                     double db_min, double db_max) {
  if (n_bits < 1)
    throw ConfigError("quantizer needs at least 1 bit");
  if (!(db_min < db_max))
    throw ConfigError("quantizer range must satisfy db_min < db_max");
  const double levels = std::pow(2.0, n_bits);
  const double step = (db_max - db_min) / levels;
  MeasurementSet out = ms;
  for (auto& m : out.measurements) {
    double code = std::floor((m.psd_db - db_min) / step);
    code = std::clamp(code, 0.0, levels - 1.0);
    m.psd_db = db_min + (code + 0.5) * step;
    m.flags.quantized = true;
  }
  return out;
}

MeasurementSet filter_bad_data(const MeasurementSet& ms, double k_mad,
                               std::size_t neighbor_count) {
  if (!(k_mad > 0.0))
    throw ConfigError("k_mad must be positive");
  if (neighbor_count < 3)
    throw ConfigError("neighbor_count must be at least 3");

  MeasurementSet out = ms;

  // Indices of unrejected measurements per channel.
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_channel;
  for (std::size_t i = 0; i < out.measurements.size(); ++i)
    if (!out.measurements[i].flags.rejected)
      by_channel[out.measurements[i].channel_index].push_back(i);

  struct Candidate {
    std::size_t index;
    double residual;
  };
  std::vector<Candidate> candidates;
  std::vector<double> residuals;

  for (const auto& [channel, idxs] : by_channel) {
    if (idxs.size() < neighbor_count + 1)
      continue;
    std::vector<double> px(idxs.size()), py(idxs.size());
    for (std::size_t a = 0; a < idxs.size(); ++a) {
      const Sensor& s = out.sensor_by_id(out.measurements[idxs[a]].sensor_id);
      px[a] = s.x;
      py[a] = s.y;
    }
    std::vector<std::size_t> order(idxs.size());
    std::vector<double> vals;
    for (std::size_t a = 0; a < idxs.size(); ++a) {
      for (std::size_t b = 0; b < idxs.size(); ++b)
        order[b] = b;
      // neighbor_count nearest others; distance ties resolved by index.
      std::nth_element(order.begin(), order.begin() + neighbor_count + 1, order.end(),
                       [&](std::size_t u, std::size_t v) {
                         const double du = std::hypot(px[u] - px[a], py[u] - py[a]);
                         const double dv = std::hypot(px[v] - px[a], py[v] - py[a]);
                         if (du != dv)
                           return du < dv;
                         return u < v;
                       });
      vals.clear();
      for (std::size_t b = 0; b < neighbor_count + 1 && vals.size() < neighbor_count; ++b) {
        if (order[b] == a)
          continue;
        vals.push_back(out.measurements[idxs[order[b]]].psd_db);
      }
      std::sort(vals.begin(), vals.end());
      const double med = vals.size() % 2 == 1
                             ? vals[vals.size() / 2]
                             : 0.5 * (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]);
      const double r = out.measurements[idxs[a]].psd_db - med;
      candidates.push_back({idxs[a], r});
      residuals.push_back(r);
    }
  }

  if (residuals.empty())
    return out;

  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 == 1 ? v[v.size() / 2]
                             : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  const double med_r = median_of(residuals);
  std::vector<double> dev(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i)
    dev[i] = std::fabs(residuals[i] - med_r);
  const double scale = 1.4826 * median_of(dev);
  const double threshold = k_mad * scale;

  for (const auto& c : candidates)
    if (std::fabs(c.residual) > threshold)
      out.measurements[c.index].flags.rejected = true;
  return out;
}

} // namespace rmk
