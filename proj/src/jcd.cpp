#include "jcdsim/jcd.hpp"

#include <cmath>
#include <stdexcept>

#include "jcdsim/ordering.hpp"

namespace jcdsim {

void JcdConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("jcd: need at least one layer");
  if (ep_iterations < 1) throw std::invalid_argument("jcd: need at least one detector iteration");
  if (damping <= 0.0 || damping > 1.0) throw std::invalid_argument("jcd: damping must be in (0, 1]");
}

namespace {

arma::cx_cube data_slice(const arma::cx_cube& cfr_all, const std::vector<int>& data_indices) {
  const int n_rx = cfr_all.n_rows, n_tx = cfr_all.n_cols, d = int(data_indices.size());
  arma::cx_cube out(n_rx, n_tx, d);
  for (int k = 0; k < d; ++k) out.slice(k) = cfr_all.slice(data_indices[k]);
  return out;
}

arma::cx_cube truth_data_cube(const ChannelRealization& chan, const std::vector<int>& data_indices,
                              int symbol = -1) {
  const arma::cx_cube& cfr = symbol < 0 ? chan.cfr : chan.at_symbol(symbol);
  return data_slice(cfr, data_indices);
}

// EP detection across all data subcarriers of one symbol
void detect_frame(const arma::cx_cube& h_data, const arma::cx_mat& y_data, double sigma2,
                  const JcdConfig& cfg, const Constellation& c, LayerResult& out) {
  const int n_rx = h_data.n_rows, n_tx = h_data.n_cols, d = h_data.n_slices;
  out.x_p.set_size(d, n_tx);
  out.x_e.set_size(d, n_tx);
  out.v_p.set_size(d, n_tx);
  out.v_e.set_size(d, n_tx);
  arma::cx_mat h(n_rx, n_tx);
  arma::cx_vec y(n_rx);
  for (int k = 0; k < d; ++k) {
    for (int m = 0; m < n_rx; ++m) {
      for (int n = 0; n < n_tx; ++n) h(m, n) = h_data(m, n, k);
      y[m] = y_data(k, m);
    }
    SoftSymbols soft = ep_detect(h, y, sigma2, cfg.ep_iterations, cfg.damping, c);
    for (int n = 0; n < n_tx; ++n) {
      out.x_p(k, n) = soft.x_p[n];
      out.x_e(k, n) = soft.x_e[n];
      out.v_p(k, n) = soft.v_p[n];
      out.v_e(k, n) = soft.v_e[n];
    }
  }
}

double frame_mse(const arma::cx_cube& estimate, const arma::cx_cube& truth) {
  const double denom = 2.0 * double(truth.n_rows) * double(truth.n_cols) * double(truth.n_slices);
  return arma::accu(arma::square(arma::abs(arma::cx_cube(estimate - truth)))) / denom;
}

void attach_truth_metrics(LayerResult& layer, const arma::cx_cube& truth_data, const Frame& frame,
                          const Constellation& c) {
  layer.mse = frame_mse(layer.estimate.cfr_hat, truth_data);
  const int n_tx = layer.x_p.n_cols;
  const int q = c.bits_per_symbol();
  const int d = layer.x_p.n_rows;
  long long errors = 0;
  for (int n = 0; n < n_tx; ++n) {
    std::vector<int> bits = hard_demap(layer.x_p.col(n), c);
    const std::size_t base = std::size_t(n) * d * q;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      errors += bits[i] != frame.payload_bits[base + i];
    }
  }
  layer.bit_errors = errors;
  layer.bits = static_cast<long long>(n_tx) * d * q;
}

}  // namespace

LayerTrace run_jcd(const ReceivedFrame& rx, const arma::cx_mat& pilot_blocks,
                   const CovarianceModel& cov, double sigma2, const JcdConfig& cfg,
                   const Constellation& constellation, const FrameTruth* truth) {
  cfg.validate();
  if (cfg.perfect_csi && (truth == nullptr || truth->channel == nullptr)) {
    throw std::invalid_argument("jcd: perfect-CSI mode needs the true channel");
  }

  LayerTrace trace;
  arma::cx_mat w_lmmse;
  arma::cx_cube h_data_first;  // first-layer estimate reused by the data-aided statistics

  for (int layer = 1; layer <= cfg.layers; ++layer) {
    LayerResult lr;
    if (cfg.perfect_csi) {
      lr.estimate.cfr_hat = truth_data_cube(*truth->channel, cov.data_indices());
      lr.estimate.span = EstimationResult::Span::Data;
      lr.estimate.estimator = "perfect";
    } else if (layer == 1) {
      w_lmmse = lmmse_weights(cov, sigma2);
      EstimationResult full = traditional_lmmse(rx.y_pilot, pilot_blocks, w_lmmse, cov);
      lr.estimate.cfr_hat = data_slice(full.cfr_hat, cov.data_indices());
      lr.estimate.span = EstimationResult::Span::Data;
      lr.estimate.estimator = full.estimator;
      lr.estimate.flops = full.flops;
      h_data_first = lr.estimate.cfr_hat;
    } else {
      const LayerResult& prev = trace.layers.back();
      DataErrorStats stats{stack_blocks(prev.x_p), stack_blocks(prev.v_p)};
      if (cfg.estimator == EstimatorKind::Mjcd) {
        lr.estimate = mjcd_lmmse(arma::vectorise(rx.y_data), stats, cov, sigma2);
      } else {
        lr.estimate = ojcd_lmmse(rx.y_data, h_data_first, stats, pilot_blocks, w_lmmse, cov, sigma2);
      }
    }

    detect_frame(lr.estimate.cfr_hat, rx.y_data, sigma2, cfg, constellation, lr);
    if (truth != nullptr && truth->channel != nullptr && truth->frame != nullptr) {
      attach_truth_metrics(lr, truth_data_cube(*truth->channel, cov.data_indices()), *truth->frame,
                           constellation);
    }
    trace.layers.push_back(std::move(lr));
  }
  return trace;
}

arma::mat natural_spline_operator(const std::vector<double>& knots,
                                  const std::vector<double>& queries) {
  const int n = int(knots.size());
  if (n < 2) throw std::invalid_argument("spline: need at least two knots");
  for (int i = 1; i < n; ++i) {
    if (knots[i] <= knots[i - 1]) throw std::invalid_argument("spline: knots must increase");
  }

  arma::mat op(queries.size(), knots.size());
  arma::vec y(n, arma::fill::zeros), m(n);
  for (int j = 0; j < n; ++j) {
    y.zeros();
    y[j] = 1.0;

    // second derivatives, natural boundary (Thomas algorithm)
    m.zeros();
    if (n > 2) {
      const int iu = n - 2;  // interior unknowns 1..n-2
      arma::vec diag(iu), upper(iu), rhs(iu);
      for (int i = 1; i <= iu; ++i) {
        double h0 = knots[i] - knots[i - 1];
        double h1 = knots[i + 1] - knots[i];
        diag[i - 1] = (knots[i + 1] - knots[i - 1]) / 3.0;
        upper[i - 1] = h1 / 6.0;
        rhs[i - 1] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
      }
      for (int i = 1; i < iu; ++i) {
        double lower = (knots[i + 1] - knots[i]) / 6.0;  // sub-diagonal of row i
        double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      for (int i = iu - 1; i >= 0; --i) {
        double acc = rhs[i];
        if (i + 1 < iu) acc -= upper[i] * m[i + 2];
        m[i + 1] = acc / diag[i];
      }
    }

    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      double t = queries[qi];
      int i = 0;
      while (i < n - 2 && knots[i + 1] <= t) ++i;  // boundary cubic extends outside
      double h = knots[i + 1] - knots[i];
      double a = (knots[i + 1] - t) / h;
      double b = (t - knots[i]) / h;
      op(qi, j) = a * y[i] + b * y[i + 1] +
                  ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    }
  }
  return op;
}

std::vector<int> pilot_symbol_positions(int n_pilot_symbols, int n_symbols) {
  if (n_pilot_symbols < 1 || n_pilot_symbols > n_symbols) {
    throw std::invalid_argument("pilot_symbol_positions: count out of range");
  }
  std::vector<int> pos;
  if (n_pilot_symbols == 1) {
    pos.push_back(0);
    return pos;
  }
  for (int i = 0; i < n_pilot_symbols; ++i) {
    pos.push_back(int(std::lround(double(i) * (n_symbols - 1) / (n_pilot_symbols - 1))));
  }
  return pos;
}

std::vector<arma::cx_cube> time_interpolate(const std::vector<arma::cx_cube>& estimates,
                                            const std::vector<int>& positions, int n_symbols) {
  if (estimates.size() != positions.size()) {
    throw std::invalid_argument("time_interpolate: one estimate per pilot-bearing symbol");
  }
  if (int(positions.size()) > n_symbols) {
    throw std::invalid_argument("time_interpolate: more knots than symbols");
  }
  if (int(positions.size()) == n_symbols) return estimates;  // nothing to interpolate
  if (positions.size() < 2) {
    throw std::invalid_argument("time_interpolate: spline needs at least two pilot-bearing symbols");
  }

  std::vector<double> knots(positions.begin(), positions.end());
  std::vector<double> queries(n_symbols);
  for (int t = 0; t < n_symbols; ++t) queries[t] = t;
  arma::mat op = natural_spline_operator(knots, queries);

  std::vector<arma::cx_cube> out(n_symbols);
  for (int t = 0; t < n_symbols; ++t) {
    arma::cx_cube acc(estimates[0].n_rows, estimates[0].n_cols, estimates[0].n_slices,
                      arma::fill::zeros);
    for (std::size_t j = 0; j < positions.size(); ++j) acc += op(t, j) * estimates[j];
    out[t] = std::move(acc);
  }
  return out;
}

TimeVaryingResult run_jcd_time_varying(const TimeVaryingObservation& rx,
                                       const arma::cx_mat& pilot_blocks,
                                       const CovarianceModel& cov, double sigma2,
                                       const JcdConfig& cfg, const Constellation& constellation,
                                       const TimeVaryingTruth* truth) {
  cfg.validate();
  const int n_sym = int(rx.symbols.size());
  const int n_pilot_sym = int(rx.pilot_positions.size());
  if (n_sym < 1 || n_pilot_sym < 1) throw std::invalid_argument("jcd: empty time-varying frame");
  if (cfg.perfect_csi && (truth == nullptr || truth->channel == nullptr)) {
    throw std::invalid_argument("jcd: perfect-CSI mode needs the true channel");
  }
  if (n_pilot_sym < n_sym && cfg.interpolation != JcdConfig::Interpolation::CubicSpline &&
      !cfg.perfect_csi) {
    throw std::invalid_argument("jcd: sparse pilot symbols need cubic_spline interpolation");
  }

  TimeVaryingResult result;
  result.per_symbol.resize(n_sym);

  arma::cx_mat w_lmmse = lmmse_weights(cov, sigma2);
  std::vector<arma::cx_cube> first_layer_at_pilots(n_pilot_sym);
  std::vector<arma::cx_cube> h_per_symbol;

  for (int layer = 1; layer <= cfg.layers; ++layer) {
    if (cfg.perfect_csi) {
      h_per_symbol.resize(n_sym);
      for (int t = 0; t < n_sym; ++t) {
        h_per_symbol[t] = truth_data_cube(*truth->channel, cov.data_indices(), t);
      }
    } else if (layer == 1) {
      for (int i = 0; i < n_pilot_sym; ++i) {
        const int t = rx.pilot_positions[i];
        EstimationResult full = traditional_lmmse(rx.symbols[t].y_pilot, pilot_blocks, w_lmmse, cov);
        first_layer_at_pilots[i] = data_slice(full.cfr_hat, cov.data_indices());
      }
      h_per_symbol = time_interpolate(first_layer_at_pilots, rx.pilot_positions, n_sym);
    } else {
      // refine at pilot-bearing symbols with that symbol's detector feedback
      std::vector<arma::cx_cube> refined(n_pilot_sym);
      for (int i = 0; i < n_pilot_sym; ++i) {
        const int t = rx.pilot_positions[i];
        const LayerResult& prev = result.per_symbol[t].layers.back();
        DataErrorStats stats{stack_blocks(prev.x_p), stack_blocks(prev.v_p)};
        EstimationResult est;
        if (cfg.estimator == EstimatorKind::Mjcd) {
          est = mjcd_lmmse(arma::vectorise(rx.symbols[t].y_data), stats, cov, sigma2);
        } else {
          est = ojcd_lmmse(rx.symbols[t].y_data, first_layer_at_pilots[i], stats, pilot_blocks,
                           w_lmmse, cov, sigma2);
        }
        refined[i] = est.cfr_hat;
      }
      h_per_symbol = time_interpolate(refined, rx.pilot_positions, n_sym);
    }

    double sq_err = 0.0;
    long long errors = 0, bits = 0;
    for (int t = 0; t < n_sym; ++t) {
      LayerResult lr;
      lr.estimate.cfr_hat = h_per_symbol[t];
      lr.estimate.span = EstimationResult::Span::Data;
      lr.estimate.estimator = layer == 1 ? estimator_name(EstimatorKind::Traditional)
                                         : estimator_name(cfg.estimator);
      detect_frame(h_per_symbol[t], rx.symbols[t].y_data, sigma2, cfg, constellation, lr);
      if (truth != nullptr && truth->channel != nullptr && truth->frames != nullptr) {
        attach_truth_metrics(lr, truth_data_cube(*truth->channel, cov.data_indices(), t),
                             (*truth->frames)[t], constellation);
        sq_err += lr.mse;
        errors += lr.bit_errors;
        bits += lr.bits;
      }
      result.per_symbol[t].layers.push_back(std::move(lr));
    }
    result.layer_mse.push_back(sq_err / n_sym);
    result.layer_bit_errors.push_back(errors);
    result.layer_bits.push_back(bits);
  }
  return result;
}

}  // namespace jcdsim
