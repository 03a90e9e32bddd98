#include "estimate_detail.hpp"

namespace rmk {

std::string method_name(EstimatorMethod m) {
  switch (m) {
  case EstimatorMethod::idw:
    return "idw";
  case EstimatorMethod::midw:
    return "midw";
  case EstimatorMethod::rbf:
    return "rbf";
  case EstimatorMethod::kriging:
    return "kriging";
  case EstimatorMethod::model_based:
    return "model_based";
  }
  return "unknown";
}

EstimatorMethod method_from_name(const std::string& name) {
  if (name == "idw")
    return EstimatorMethod::idw;
  if (name == "midw")
    return EstimatorMethod::midw;
  if (name == "rbf")
    return EstimatorMethod::rbf;
  if (name == "kriging")
    return EstimatorMethod::kriging;
  if (name == "model_based")
    return EstimatorMethod::model_based;
  throw ConfigError("unknown estimator method: " + name);
}

std::string rbf_kind_name(RbfKind k) {
  switch (k) {
  case RbfKind::gaussian:
    return "gaussian";
  case RbfKind::multiquadric:
    return "multiquadric";
  case RbfKind::thin_plate:
    return "thin_plate";
  }
  return "unknown";
}

RbfKind rbf_kind_from_name(const std::string& name) {
  if (name == "gaussian")
    return RbfKind::gaussian;
  if (name == "multiquadric")
    return RbfKind::multiquadric;
  if (name == "thin_plate")
    return RbfKind::thin_plate;
  throw ConfigError("unknown rbf kind: " + name);
}

namespace detail {

ChannelSamples gather_channel(const MeasurementSet& ms, std::size_t channel) {
  ChannelSamples out;
  out.geom = ms.geom;
  for (const auto& m : ms.measurements) {
    if (m.channel_index != channel || m.flags.rejected)
      continue;
    const Sensor& s = ms.sensor_by_id(m.sensor_id);
    out.xs.push_back(s.x);
    out.ys.push_back(s.y);
    out.vs.push_back(m.psd_db);
  }
  return out;
}

} // namespace detail
} // namespace rmk
