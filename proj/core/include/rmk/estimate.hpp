#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmk/sensing.hpp"

namespace rmk {

enum class EstimatorMethod { idw, midw, rbf, kriging, model_based };
enum class RbfKind { gaussian, multiquadric, thin_plate };

std::string method_name(EstimatorMethod m);
EstimatorMethod method_from_name(const std::string& name);
std::string rbf_kind_name(RbfKind k);
RbfKind rbf_kind_from_name(const std::string& name);

struct VariogramBin {
  double lag = 0.0;          // mean pair distance in the bin
  double semivariance = 0.0; // mean of 0.5 * (v_i - v_j)^2
  std::size_t count = 0;
};

// Exponential model with the practical-range convention:
// gamma(h) = nugget + (sill - nugget) * (1 - exp(-3h/range)).
struct Variogram {
  double nugget = 0.0; // dB^2
  double sill = 1.0;   // dB^2, >= nugget
  double range = 1.0;  // meters
  std::vector<VariogramBin> bins;
};

// Right-continuous evaluation: h <= 0 returns the nugget, so coincident
// pairs keep the matrix nonsingular when the nugget is positive. The
// system diagonal uses gamma(0) = 0 separately.
double variogram_eval(const Variogram& v, double h);

struct KrigingResult {
  double mean_db = 0.0;
  double variance_db2 = 0.0;
};

// Full solution of one ordinary Kriging system, for diagnostics: weights
// sum to 1, variance = w.gamma + lagrange.
struct KrigingSolution {
  std::vector<double> weights;
  double lagrange = 0.0;
  KrigingResult result;
};

struct PathLossFit {
  double x = 0.0;
  double y = 0.0;
  double ref_power_db = 0.0; // power + antenna gain at 1 m, dB
  double exponent = 1.0;
  double residual_rms_db = 0.0;
  bool ill_conditioned = false;
};

struct EstimatorConfig {
  EstimatorMethod method = EstimatorMethod::idw;
  // idw / midw
  double d_exp = 2.0;
  // rbf
  RbfKind rbf_kind = RbfKind::gaussian;
  double rbf_shape = 0.0; // meters; 0 selects the median pairwise distance
  double rbf_ridge = 0.0;
  // kriging; empty variogram is fitted from the data
  std::optional<Variogram> variogram;
  std::size_t variogram_bins = 12;
  double variogram_max_lag = 0.0; // 0 selects half the max pair distance
  // model_based
  std::size_t n_tx = 1;
};

// Immutable fitted model: fit once, predict anywhere inside the area.
class FittedEstimator {
public:
  virtual ~FittedEstimator() = default;
  virtual double predict(double x, double y) const = 0;
  virtual EstimatorMethod method() const = 0;
};

std::unique_ptr<FittedEstimator> fit_estimator(const MeasurementSet& ms,
                                               std::size_t channel,
                                               const EstimatorConfig& cfg);

// One-shot forms; each shares the fitted code path with fit_estimator, so a
// map sweep and a point query agree bit for bit.
double estimate_idw(const MeasurementSet& ms, std::size_t channel, double x,
                    double y, double d_exp);
double estimate_midw(const MeasurementSet& ms, std::size_t channel, double x,
                     double y, double d_exp);
double estimate_rbf(const MeasurementSet& ms, std::size_t channel, double x,
                    double y, RbfKind kind, double shape, double ridge);
KrigingResult estimate_kriging(const MeasurementSet& ms, std::size_t channel,
                               double x, double y, const Variogram& v);

// Empirical semivariogram over same-channel, same-epoch pairs up to
// max_lag (0 selects half the maximum pair distance), followed by a
// count-weighted least-squares fit of the exponential model over a
// log-spaced range grid. A grid candidate must beat the incumbent by more
// than a tiny margin, so flat (uncorrelated) data settles on the smallest
// grid range.
Variogram fit_variogram(const MeasurementSet& ms, std::size_t n_bins,
                        double max_lag = 0.0);

// Detailed single-query solve on explicit samples; test hook and the
// building block behind estimate_kriging.
KrigingSolution kriging_solve(const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              const std::vector<double>& values,
                              const Variogram& v, double x, double y);

// Nested least squares for a single log-distance transmitter: coarse
// 20x20 position grid, pattern-search refinement, closed-form (ref power,
// exponent) per candidate. init adds one extra starting candidate.
PathLossFit fit_pathloss_single(const MeasurementSet& ms, std::size_t channel,
                                std::optional<std::pair<double, double>> init = {});

struct ModelBasedResult {
  std::vector<PathLossFit> fits;
  Grid2D map_db;
};

// Greedy strongest-first seeding, nearest-seed sensor partition,
// successive linear-domain subtraction of already-fitted transmitters,
// final superposition map. n_tx = 1 reduces to fit_pathloss_single.
ModelBasedResult estimate_model_based(const MeasurementSet& ms,
                                      std::size_t channel, std::size_t n_tx);

struct RaisedCosineBasis {
  double center_hz = 0.0;
  double bandwidth_hz = 1.0; // symbol-rate bandwidth
  double rolloff = 0.25;     // in [0, 1]

  double eval(double f_hz) const;
};

// Nonnegative least squares of the linear-domain PSD onto the basis set,
// solved by projected gradient descent.
std::vector<double> psd_basis_project(const std::vector<double>& psd_db,
                                      const std::vector<double>& sample_freqs_hz,
                                      const std::vector<RaisedCosineBasis>& bases);

// Dense map sweep: one fitted estimator per channel, evaluated at every
// cell center. n_channels = 0 derives the count from the measurement set.
BandGrid estimate_map(const MeasurementSet& ms, const EstimatorConfig& cfg,
                      std::size_t n_channels = 0);

} // namespace rmk
