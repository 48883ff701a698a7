#pragma once

#include <armadillo>
#include <cstdint>
#include <string>
#include <utility>

#include "jcdsim/channel.hpp"

namespace jcdsim {

// Channel estimate over a subcarrier set, plus accounting metadata.
struct EstimationResult {
  enum class Span { Pilot, Data, All };

  arma::cx_cube cfr_hat;  // (n_rx, n_tx, |subcarrier set|)
  Span span = Span::Data;
  std::string estimator;
  std::uint64_t flops = 0;     // multiply-add count, published accounting
  int ridge_events = 0;        // regularized factorizations
  int floored_symbols = 0;     // near-zero symbol estimates floored before inversion
};

// Detector feedback consumed by the data-aided estimators: posterior symbol
// means and per-symbol error variances, stacked tx-antenna-major with the
// data subcarrier innermost.
struct DataErrorStats {
  arma::cx_vec x_hat;  // length n_tx * (K-P)
  arma::vec v;         // same length, entries >= 0

  arma::cx_mat blocks(int n_tx) const { return arma::reshape(x_hat, x_hat.n_elem / n_tx, n_tx); }
  arma::mat v_blocks(int n_tx) const { return arma::reshape(v, v.n_elem / n_tx, n_tx); }
};

// Per-(rx, tx) least-squares estimate at pilot subcarriers: y ./ x.
arma::cx_vec ls_pilot(const arma::cx_vec& y_pilot, const arma::cx_vec& pilot_symbols);

// Pilot-to-all-subcarriers LMMSE interpolation weights (K x P):
// W = R_{h h^p} (R_{h^p h^p} + sigma2 I)^{-1}
arma::cx_mat lmmse_weights(const CovarianceModel& cov, double sigma2);

// Applies LS + LMMSE interpolation to every (rx, tx) pair.
// y_pilot is (P, n_tx, n_rx); pilot_blocks is (P x n_tx).
EstimationResult traditional_lmmse(const arma::cx_cube& y_pilot, const arma::cx_mat& pilot_blocks,
                                   const arma::cx_mat& weights, const CovarianceModel& cov);

// Second-order moments of the stacked data-subcarrier system under the
// detector-feedback statistics: C_yh = E{y h^H} and C_yy = E{y y^H}.
std::pair<arma::cx_mat, arma::cx_mat> mjcd_covariances(const DataErrorStats& stats,
                                                       const CovarianceModel& cov, double sigma2);

// Data-aided LMMSE over the full stacked space-frequency system
// (Wiener-Hopf solution h = C_yh^H C_yy^{-1} y). y is stacked rx-major,
// data subcarrier inner.
EstimationResult mjcd_lmmse(const arma::cx_vec& y_stacked, const DataErrorStats& stats,
                            const CovarianceModel& cov, double sigma2);

// Removes the detected contribution of every other tx antenna from rx
// antenna m's data block: y_m - sum_{n' != n} Xhat_{n'} hhat_{m,n'}.
arma::cx_vec ojcd_interference_cancel(const arma::cx_vec& y_m_data, const arma::cx_cube& h_hat_data,
                                      const arma::cx_mat& x_hat_blocks, int n, int m);

// Shared statistics for the per-subsystem estimator; built once per frame
// and reused across tx antennas.
class OjcdWorkspace {
 public:
  OjcdWorkspace(const CovarianceModel& cov, const arma::cx_mat& w1, const arma::cx_mat& x_hat_blocks,
                const arma::cx_mat& pilot_blocks, const arma::mat& v_blocks, double sigma2);

  // (K-P) x (K-P) estimation weights for tx antenna n
  arma::cx_mat weights(int n);

  arma::cx_mat interference_gain(int n) const;       // B_n
  arma::cx_mat equivalent_noise_cov(int n) const;    // Sigma_n

  const arma::cx_mat& x_hat_blocks() const { return x_hat_; }
  std::uint64_t flops() const { return flops_; }
  int ridge_events() const { return ridge_events_; }
  int floored_symbols() const { return floored_symbols_; }

 private:
  const CovarianceModel& cov_;
  arma::cx_mat w1_;       // (K-P) x P, data rows of the pilot LMMSE weights
  arma::cx_mat x_hat_;    // (K-P) x n_tx, near-zero entries floored
  arma::cx_mat pilots_;   // P x n_tx
  arma::mat v_;           // (K-P) x n_tx
  double sigma2_;
  arma::cx_mat v_d_;                   // diagonal self-error term
  std::vector<arma::cx_mat> m_table_;  // R_dp(n1,n2) W1^H per pair
  std::vector<arma::cx_mat> pair_sum_; // per-n accumulated interference statistics
  std::vector<arma::cx_mat> vc_;       // pilot-noise propagation per antenna
  std::uint64_t flops_ = 0;
  int ridge_events_ = 0;
  int floored_symbols_ = 0;
};

// Single-antenna weight computation (builds a workspace internally; prefer
// OjcdWorkspace when estimating several antennas of one frame).
arma::cx_mat ojcd_weights(int n, const CovarianceModel& cov, const arma::cx_mat& w1,
                          const arma::cx_mat& x_hat_blocks, const arma::cx_mat& pilot_blocks,
                          const arma::mat& v_blocks, double sigma2);

// Per-subsystem data-aided LMMSE: interference cancellation, symbol-inverse
// LS, then the error-statistics-aware weights, for every (rx, tx) pair.
// y_data is ((K-P) x n_rx); h_hat_data the first-layer estimate at data
// subcarriers; w_lmmse the (K x P) pilot interpolation weights.
EstimationResult ojcd_lmmse(const arma::cx_mat& y_data, const arma::cx_cube& h_hat_data,
                            const DataErrorStats& stats, const arma::cx_mat& pilot_blocks,
                            const arma::cx_mat& w_lmmse, const CovarianceModel& cov, double sigma2);

// Magnitude floor applied to symbol estimates before inversion (phase kept).
arma::cx_mat floor_symbol_estimates(const arma::cx_mat& x_hat_blocks, int* floored);

}  // namespace jcdsim
