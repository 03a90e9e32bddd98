#pragma once

#include <memory>

#include "rmk/estimate.hpp"

namespace rmk::detail {

// Unrejected samples of one channel, in measurement order.
struct ChannelSamples {
  GridGeometry geom;
  std::vector<double> xs, ys, vs;
};

ChannelSamples gather_channel(const MeasurementSet& ms, std::size_t channel);

std::unique_ptr<FittedEstimator> make_idw(ChannelSamples s, double d_exp,
                                          bool angular);
std::unique_ptr<FittedEstimator> make_rbf(ChannelSamples s, RbfKind kind,
                                          double shape, double ridge);
std::unique_ptr<FittedEstimator> make_kriging(ChannelSamples s, Variogram v);

PathLossFit fit_pathloss_points(const std::vector<double>& xs,
                                const std::vector<double>& ys,
                                const std::vector<double>& vs,
                                const GridGeometry& geom,
                                std::optional<std::pair<double, double>> init);

double pathloss_fit_linear_power(const PathLossFit& f, double x, double y,
                                 double d_min);

} // namespace rmk::detail
