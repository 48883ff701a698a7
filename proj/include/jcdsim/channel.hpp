#pragma once

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

namespace jcdsim {

struct PilotPattern;  // frame.hpp

// Tapped-delay-line profile; powers are linear and sum to 1.
struct PowerDelayProfile {
  struct Tap {
    double delay_s;
    double power;
  };
  std::vector<Tap> taps;

  void validate() const;

  // 3GPP TR 38.901 TDL-C (NLOS, 24 taps) with normalized delays scaled by
  // the RMS delay spread.
  static PowerDelayProfile tdl_c(double delay_spread_s);

  // Text file with one "delay_ns power_db" pair per line; '#' comments.
  // Powers are renormalized to sum to 1.
  static PowerDelayProfile from_file(const std::string& path);
};

// N x N exponential spatial correlation, r_ij = rho^(j-i) for i <= j.
arma::mat exp_corr_matrix(int n, double rho);

// Frequency-domain correlation across subcarriers for a given profile:
// R[k,l] = sum_p power_p * exp(-j*2*pi*delta_f*(k-l)*delay_p)
arma::cx_mat freq_corr_from_pdp(const PowerDelayProfile& pdp, int n_subcarriers, double delta_f_hz);

// Separable second-order model of the MIMO-OFDM channel: receive/transmit
// spatial factors and the frequency factor, with the pilot/data partition
// baked in. The covariance of the stacked data-subcarrier channel vector
// (rx-major, tx middle, subcarrier inner) is R_rx kron R_tx kron R_freq[dd].
class CovarianceModel {
 public:
  CovarianceModel() = default;
  CovarianceModel(arma::mat r_rx, arma::mat r_tx, arma::cx_mat r_freq,
                  std::vector<int> pilot_indices, std::vector<int> data_indices);

  int n_rx() const { return static_cast<int>(r_rx_.n_rows); }
  int n_tx() const { return static_cast<int>(r_tx_.n_rows); }
  int n_subcarriers() const { return static_cast<int>(r_freq_.n_rows); }
  int n_pilots() const { return static_cast<int>(pilot_indices_.size()); }
  int n_data() const { return static_cast<int>(data_indices_.size()); }

  const arma::mat& r_rx() const { return r_rx_; }
  const arma::mat& r_tx() const { return r_tx_; }
  const arma::cx_mat& r_freq() const { return r_freq_; }
  const std::vector<int>& pilot_indices() const { return pilot_indices_; }
  const std::vector<int>& data_indices() const { return data_indices_; }

  // frequency-factor partitions
  const arma::cx_mat& freq_dd() const { return freq_dd_; }
  const arma::cx_mat& freq_dp() const { return freq_dp_; }
  const arma::cx_mat& freq_pp() const { return freq_pp_; }
  const arma::cx_mat& freq_ap() const { return freq_ap_; }  // all rows, pilot columns

  // Cross-covariances between per-(m,n) channel vectors at a common rx
  // antenna: E{h_{m,n1}^d (h_{m,n2}^d)^H} and friends.
  arma::cx_mat sub_dd(int n1, int n2) const { return r_tx_(n1, n2) * freq_dd_; }
  arma::cx_mat sub_dp(int n1, int n2) const { return r_tx_(n1, n2) * freq_dp_; }
  arma::cx_mat sub_pp(int n1, int n2) const { return r_tx_(n1, n2) * freq_pp_; }

  // Dense covariance of the stacked data-subcarrier channel vector. Built on
  // demand; quadratic in n_rx*n_tx*(K-P), intended for small systems and tests.
  arma::cx_mat chh_dense() const;

  // Symmetric PSD square roots of the factors (for sampling).
  const arma::cx_mat& sqrt_freq() const { return sqrt_freq_; }
  const arma::mat& sqrt_rx() const { return sqrt_rx_; }
  const arma::mat& sqrt_tx() const { return sqrt_tx_; }

 private:
  arma::mat r_rx_, r_tx_;
  arma::cx_mat r_freq_;
  std::vector<int> pilot_indices_, data_indices_;
  arma::cx_mat freq_dd_, freq_dp_, freq_pp_, freq_ap_;
  arma::cx_mat sqrt_freq_;
  arma::mat sqrt_rx_, sqrt_tx_;
};

CovarianceModel assemble_covariance(const PowerDelayProfile& pdp, int n_subcarriers, int n_pilots,
                                    int n_tx, int n_rx, double rho, double delta_f_hz);

// Channel frequency responses, indexed (rx antenna, tx antenna, subcarrier).
// In time-varying mode per_symbol holds one cube per OFDM symbol and cfr
// aliases the first symbol.
struct ChannelRealization {
  arma::cx_cube cfr;                      // (n_rx, n_tx, K)
  std::vector<arma::cx_cube> per_symbol;  // empty in block-fading mode
  double doppler_hz = 0.0;

  bool time_varying() const { return !per_symbol.empty(); }
  const arma::cx_cube& at_symbol(std::size_t t) const {
    return time_varying() ? per_symbol[t] : cfr;
  }
  int n_symbols() const { return time_varying() ? static_cast<int>(per_symbol.size()) : 1; }
};

// Block-fading draw from the separable model (deterministic in the seed).
ChannelRealization sample_channel(const CovarianceModel& cov, std::uint64_t seed);

// Time-varying draw: per-symbol CFRs with Jakes (Bessel-J0) temporal
// autocorrelation at max Doppler f_D = v * f_c / c, spatial/frequency
// correlation as in block fading.
ChannelRealization evolve_time_varying(const CovarianceModel& cov, double velocity_kmh,
                                       double carrier_hz, double symbol_duration_s,
                                       int n_symbols, std::uint64_t seed);

double doppler_from_velocity(double velocity_kmh, double carrier_hz);

}  // namespace jcdsim
