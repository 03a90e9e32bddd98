#include <algorithm>
#include <cmath>

#include "estimate_detail.hpp"

namespace rmk {
namespace {

MeasurementSet channel_subset(const MeasurementSet& ms, std::size_t channel) {
  MeasurementSet out;
  out.geom = ms.geom;
  out.sensors = ms.sensors;
  for (const auto& m : ms.measurements)
    if (m.channel_index == channel)
      out.measurements.push_back(m);
  return out;
}

// Adapter so the model-based pipeline satisfies the fit/predict contract.
class ModelBasedEstimator final : public FittedEstimator {
public:
  ModelBasedEstimator(std::vector<PathLossFit> fits, double d_min)
      : fits_(std::move(fits)), d_min_(d_min) {}

  double predict(double x, double y) const override {
    double lin = 0.0;
    for (const auto& f : fits_)
      lin += detail::pathloss_fit_linear_power(f, x, y, d_min_);
    return to_db(lin);
  }

  EstimatorMethod method() const override { return EstimatorMethod::model_based; }

private:
  std::vector<PathLossFit> fits_;
  double d_min_;
};

} // namespace

std::unique_ptr<FittedEstimator> fit_estimator(const MeasurementSet& ms,
                                               std::size_t channel,
                                               const EstimatorConfig& cfg) {
  switch (cfg.method) {
  case EstimatorMethod::idw:
    return detail::make_idw(detail::gather_channel(ms, channel), cfg.d_exp, false);
  case EstimatorMethod::midw:
    return detail::make_idw(detail::gather_channel(ms, channel), cfg.d_exp, true);
  case EstimatorMethod::rbf:
    return detail::make_rbf(detail::gather_channel(ms, channel), cfg.rbf_kind,
                            cfg.rbf_shape, cfg.rbf_ridge);
  case EstimatorMethod::kriging: {
    Variogram v;
    if (cfg.variogram) {
      v = *cfg.variogram;
    } else {
      v = fit_variogram(channel_subset(ms, channel), cfg.variogram_bins,
                        cfg.variogram_max_lag);
    }
    return detail::make_kriging(detail::gather_channel(ms, channel), std::move(v));
  }
  case EstimatorMethod::model_based: {
    auto res = estimate_model_based(ms, channel, cfg.n_tx);
    return std::make_unique<ModelBasedEstimator>(std::move(res.fits),
                                                 ms.geom.cell_size / 2.0);
  }
  }
  throw ConfigError("unknown estimator method");
}

BandGrid estimate_map(const MeasurementSet& ms, const EstimatorConfig& cfg,
                      std::size_t n_channels) {
  if (ms.measurements.empty())
    throw DataError("estimate_map needs at least one measurement");
  if (n_channels == 0) {
    for (const auto& m : ms.measurements)
      n_channels = std::max(n_channels, m.channel_index + 1);
  }
  BandGrid out(ms.geom, Unit::dB, n_channels, kDbFloor);
  for (std::size_t k = 0; k < n_channels; ++k) {
    auto est = fit_estimator(ms, k, cfg);
    Grid2D& g = out.channel(k);
    for (std::size_t r = 0; r < g.n_rows(); ++r)
      for (std::size_t c = 0; c < g.n_cols(); ++c)
        g.at(r, c) = est->predict(ms.geom.cell_center_x(c), ms.geom.cell_center_y(r));
  }
  return out;
}

} // namespace rmk
