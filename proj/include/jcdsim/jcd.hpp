#pragma once

#include <armadillo>
#include <optional>
#include <vector>

#include "jcdsim/channel.hpp"
#include "jcdsim/constellation.hpp"
#include "jcdsim/detection.hpp"
#include "jcdsim/estimation.hpp"
#include "jcdsim/flops.hpp"
#include "jcdsim/frame.hpp"

namespace jcdsim {

struct JcdConfig {
  int layers = 2;
  EstimatorKind estimator = EstimatorKind::Ojcd;
  int ep_iterations = 5;
  double damping = 0.2;
  enum class Interpolation { None, CubicSpline } interpolation = Interpolation::None;
  bool perfect_csi = false;

  void validate() const;
};

// One OFDM symbol's worth of observations.
struct ReceivedFrame {
  arma::cx_cube y_pilot;  // (P, n_tx, n_rx); per-(rx, tx) pilot observations
  arma::cx_mat y_data;    // (K-P, n_rx)
};

struct FrameTruth {
  const ChannelRealization* channel = nullptr;
  const Frame* frame = nullptr;
};

// Per-layer outputs: the channel estimate used for detection, detector
// moments over the data block, and (when truth is supplied) error metrics.
struct LayerResult {
  EstimationResult estimate;      // data-subcarrier span
  arma::cx_mat x_p, x_e;          // (K-P, n_tx)
  arma::mat v_p, v_e;
  double mse = arma::datum::nan;
  long long bit_errors = -1;
  long long bits = 0;
};

struct LayerTrace {
  std::vector<LayerResult> layers;
  const LayerResult& final_layer() const { return layers.back(); }
};

// Layered receiver on one OFDM symbol: traditional pilot LMMSE + EP in the
// first layer, then the configured data-aided estimator fed with the
// previous layer's posterior moments, redetecting after each refinement.
// Later layers keep reusing the first layer's estimate and interpolation
// weights inside the data-aided statistics.
LayerTrace run_jcd(const ReceivedFrame& rx, const arma::cx_mat& pilot_blocks,
                   const CovarianceModel& cov, double sigma2, const JcdConfig& cfg,
                   const Constellation& constellation, const FrameTruth* truth = nullptr);

// Natural cubic-spline interpolation weights: row i gives the coefficients
// that map knot values to the spline evaluated at queries[i]. Outside the
// knot range the boundary cubic is extended.
arma::mat natural_spline_operator(const std::vector<double>& knots,
                                  const std::vector<double>& queries);

// Spline interpolation of per-symbol channel estimates from pilot-bearing
// symbol positions onto every symbol index. positions must be strictly
// increasing with at least two entries (identity when they already cover
// all symbols).
std::vector<arma::cx_cube> time_interpolate(const std::vector<arma::cx_cube>& estimates,
                                            const std::vector<int>& positions, int n_symbols);

// Evenly spread pilot-bearing symbol positions spanning [0, n_symbols-1].
std::vector<int> pilot_symbol_positions(int n_pilot_symbols, int n_symbols);

// Time-varying frame: every symbol carries data on the data subcarriers;
// the symbols listed in pilot_positions also carry pilots.
struct TimeVaryingObservation {
  std::vector<ReceivedFrame> symbols;
  std::vector<int> pilot_positions;
};

struct TimeVaryingTruth {
  const ChannelRealization* channel = nullptr;       // per-symbol CFRs
  const std::vector<Frame>* frames = nullptr;        // one per symbol
};

struct TimeVaryingResult {
  std::vector<LayerTrace> per_symbol;                // detector trace per symbol
  std::vector<double> layer_mse;                     // across all symbols
  std::vector<long long> layer_bit_errors, layer_bits;
};

// Layered receiver over a multi-symbol frame: first-layer estimates at the
// pilot-bearing symbols are splined across time before detection; data-aided
// refinement runs per pilot-bearing symbol and is splined again.
TimeVaryingResult run_jcd_time_varying(const TimeVaryingObservation& rx,
                                       const arma::cx_mat& pilot_blocks,
                                       const CovarianceModel& cov, double sigma2,
                                       const JcdConfig& cfg, const Constellation& constellation,
                                       const TimeVaryingTruth* truth = nullptr);

}  // namespace jcdsim
