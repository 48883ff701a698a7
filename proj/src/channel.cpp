#include "jcdsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jcdsim/linalg.hpp"
#include "jcdsim/rng.hpp"

namespace jcdsim {

namespace {

// TR 38.901 Table 7.7.2-3: TDL-C normalized tap delays and powers.
constexpr int kTdlcTaps = 24;
constexpr double kTdlcDelay[kTdlcTaps] = {
    0.0,    0.2099, 0.2219, 0.2329, 0.2176, 0.6366, 0.6448, 0.6560,
    0.6584, 0.7935, 0.8213, 0.9336, 1.2285, 1.3083, 2.1704, 2.7105,
    4.2589, 4.6003, 5.4902, 5.6077, 6.3065, 6.6374, 7.0427, 8.6523};
constexpr double kTdlcPowerDb[kTdlcTaps] = {
    -4.4,  -1.2,  -3.5,  -5.2,  -2.5,  0.0,   -2.2,  -3.9,
    -7.4,  -7.1,  -10.7, -11.1, -5.1,  -6.8,  -8.7,  -13.2,
    -13.9, -13.9, -15.8, -17.1, -16.0, -15.7, -21.6, -22.8};

PowerDelayProfile normalize(std::vector<PowerDelayProfile::Tap> taps) {
  double total = 0.0;
  for (const auto& t : taps) total += t.power;
  if (total <= 0.0) throw std::invalid_argument("power delay profile: nonpositive total power");
  for (auto& t : taps) t.power /= total;
  PowerDelayProfile pdp{std::move(taps)};
  pdp.validate();
  return pdp;
}

}  // namespace

void PowerDelayProfile::validate() const {
  if (taps.empty()) throw std::invalid_argument("power delay profile: no taps");
  double total = 0.0;
  double prev_delay = -1.0;
  for (const auto& t : taps) {
    if (t.power <= 0.0) throw std::invalid_argument("power delay profile: nonpositive tap power");
    if (t.delay_s < 0.0) throw std::invalid_argument("power delay profile: negative delay");
    if (t.delay_s < prev_delay) throw std::invalid_argument("power delay profile: delays must be nondecreasing");
    prev_delay = t.delay_s;
    total += t.power;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("power delay profile: powers must sum to 1");
}

PowerDelayProfile PowerDelayProfile::tdl_c(double delay_spread_s) {
  std::vector<Tap> taps(kTdlcTaps);
  for (int i = 0; i < kTdlcTaps; ++i) {
    taps[i] = {kTdlcDelay[i] * delay_spread_s, std::pow(10.0, kTdlcPowerDb[i] / 10.0)};
  }
  std::sort(taps.begin(), taps.end(),
            [](const Tap& a, const Tap& b) { return a.delay_s < b.delay_s; });
  return normalize(std::move(taps));
}

PowerDelayProfile PowerDelayProfile::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("power delay profile: cannot open " + path);
  std::vector<Tap> taps;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double delay_ns = 0.0, power_db = 0.0;
    if (ls >> delay_ns >> power_db) {
      taps.push_back({delay_ns * 1e-9, std::pow(10.0, power_db / 10.0)});
    }
  }
  if (taps.empty()) throw std::runtime_error("power delay profile: no taps in " + path);
  std::sort(taps.begin(), taps.end(),
            [](const Tap& a, const Tap& b) { return a.delay_s < b.delay_s; });
  return normalize(std::move(taps));
}

arma::mat exp_corr_matrix(int n, double rho) {
  if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("exp_corr_matrix: rho must be in [0, 1)");
  arma::mat r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = std::pow(rho, std::abs(j - i));
  return r;
}

arma::cx_mat freq_corr_from_pdp(const PowerDelayProfile& pdp, int n_subcarriers, double delta_f_hz) {
  pdp.validate();
  if (n_subcarriers < 1) throw std::invalid_argument("freq_corr_from_pdp: need at least one subcarrier");
  if (delta_f_hz <= 0.0) throw std::invalid_argument("freq_corr_from_pdp: delta_f must be positive");
  // Toeplitz in the subcarrier offset; evaluate each lag once.
  arma::cx_vec lag(n_subcarriers);
  for (int d = 0; d < n_subcarriers; ++d) {
    std::complex<double> acc = 0.0;
    for (const auto& tap : pdp.taps) {
      double phase = -2.0 * arma::datum::pi * delta_f_hz * d * tap.delay_s;
      acc += tap.power * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    lag[d] = acc;
  }
  arma::cx_mat r(n_subcarriers, n_subcarriers);
  for (int k = 0; k < n_subcarriers; ++k)
    for (int l = 0; l < n_subcarriers; ++l) r(k, l) = k >= l ? lag[k - l] : std::conj(lag[l - k]);
  return r;
}

CovarianceModel::CovarianceModel(arma::mat r_rx, arma::mat r_tx, arma::cx_mat r_freq,
                                 std::vector<int> pilot_indices, std::vector<int> data_indices)
    : r_rx_(std::move(r_rx)),
      r_tx_(std::move(r_tx)),
      r_freq_(std::move(r_freq)),
      pilot_indices_(std::move(pilot_indices)),
      data_indices_(std::move(data_indices)) {
  arma::uvec pi(pilot_indices_.size()), di(data_indices_.size());
  for (std::size_t i = 0; i < pilot_indices_.size(); ++i) pi[i] = pilot_indices_[i];
  for (std::size_t i = 0; i < data_indices_.size(); ++i) di[i] = data_indices_[i];
  freq_dd_ = r_freq_.submat(di, di);
  freq_dp_ = r_freq_.submat(di, pi);
  freq_pp_ = r_freq_.submat(pi, pi);
  freq_ap_ = r_freq_.cols(pi);
  sqrt_freq_ = psd_sqrt(r_freq_);
  sqrt_rx_ = arma::real(psd_sqrt(r_rx_));
  sqrt_tx_ = arma::real(psd_sqrt(r_tx_));
}

arma::cx_mat CovarianceModel::chh_dense() const {
  arma::cx_mat spatial(arma::kron(r_rx_, r_tx_), arma::mat(r_rx_.n_rows * r_tx_.n_rows, r_rx_.n_cols * r_tx_.n_cols, arma::fill::zeros));
  return arma::kron(spatial, freq_dd_);
}

CovarianceModel assemble_covariance(const PowerDelayProfile& pdp, int n_subcarriers, int n_pilots,
                                    int n_tx, int n_rx, double rho, double delta_f_hz) {
  if (n_pilots < 1 || n_pilots > n_subcarriers) {
    throw std::invalid_argument("assemble_covariance: pilot count out of range");
  }
  // comb layout, same rule as build_pilot_pattern
  int spacing = n_subcarriers / n_pilots;
  std::vector<int> pilots, data;
  for (int i = 0; i < n_pilots; ++i) pilots.push_back(i * spacing);
  for (int k = 0, p = 0; k < n_subcarriers; ++k) {
    if (p < n_pilots && pilots[p] == k) {
      ++p;
    } else {
      data.push_back(k);
    }
  }
  return CovarianceModel(exp_corr_matrix(n_rx, rho), exp_corr_matrix(n_tx, rho),
                         freq_corr_from_pdp(pdp, n_subcarriers, delta_f_hz),
                         std::move(pilots), std::move(data));
}

namespace {

// Applies kron(L_rx, L_tx, L_freq) to an iid vector arranged as a cube
// (n_rx, n_tx, K), contracting one mode at a time.
arma::cx_cube correlate_modes(const arma::cx_vec& g, const CovarianceModel& cov) {
  const int n_rx = cov.n_rx(), n_tx = cov.n_tx(), n_sc = cov.n_subcarriers();
  arma::cx_cube t(n_rx, n_tx, n_sc);
  arma::uword idx = 0;
  for (int m = 0; m < n_rx; ++m)
    for (int n = 0; n < n_tx; ++n)
      for (int s = 0; s < n_sc; ++s) t(m, n, s) = g[idx++];

  arma::cx_vec v(n_sc);
  for (int m = 0; m < n_rx; ++m) {
    for (int n = 0; n < n_tx; ++n) {
      for (int s = 0; s < n_sc; ++s) v[s] = t(m, n, s);
      arma::cx_vec w = cov.sqrt_freq() * v;
      for (int s = 0; s < n_sc; ++s) t(m, n, s) = w[s];
    }
  }
  for (int s = 0; s < n_sc; ++s) {
    t.slice(s) = cov.sqrt_rx() * t.slice(s) * cov.sqrt_tx().st();
  }
  return t;
}

}  // namespace

ChannelRealization sample_channel(const CovarianceModel& cov, std::uint64_t seed) {
  Rng rng(seed);
  const arma::uword dim = arma::uword(cov.n_rx()) * cov.n_tx() * cov.n_subcarriers();
  ChannelRealization h;
  h.cfr = correlate_modes(rng.cgaussian_vec(dim), cov);
  return h;
}

double doppler_from_velocity(double velocity_kmh, double carrier_hz) {
  constexpr double c = 3.0e8;
  return (velocity_kmh / 3.6) * carrier_hz / c;
}

ChannelRealization evolve_time_varying(const CovarianceModel& cov, double velocity_kmh,
                                       double carrier_hz, double symbol_duration_s,
                                       int n_symbols, std::uint64_t seed) {
  if (velocity_kmh < 0.0) throw std::invalid_argument("evolve_time_varying: negative velocity");
  if (n_symbols < 1) throw std::invalid_argument("evolve_time_varying: need at least one symbol");
  const double f_d = doppler_from_velocity(velocity_kmh, carrier_hz);

  arma::mat r_time(n_symbols, n_symbols);
  for (int a = 0; a < n_symbols; ++a) {
    for (int b = 0; b < n_symbols; ++b) {
      double x = 2.0 * arma::datum::pi * f_d * symbol_duration_s * std::abs(a - b);
      r_time(a, b) = std::cyl_bessel_j(0.0, x);
    }
  }
  arma::mat sqrt_time = arma::real(psd_sqrt(r_time, 1e-6));

  Rng rng(seed);
  const arma::uword dim = arma::uword(cov.n_rx()) * cov.n_tx() * cov.n_subcarriers();
  // iid space-frequency draws per symbol; the temporal square root then
  // mixes them across the frame
  std::vector<arma::cx_cube> iid(n_symbols);
  for (int t = 0; t < n_symbols; ++t) iid[t] = correlate_modes(rng.cgaussian_vec(dim), cov);

  ChannelRealization h;
  h.doppler_hz = f_d;
  h.per_symbol.resize(n_symbols);
  for (int t = 0; t < n_symbols; ++t) {
    arma::cx_cube acc(iid[0].n_rows, iid[0].n_cols, iid[0].n_slices, arma::fill::zeros);
    for (int u = 0; u < n_symbols; ++u) acc += sqrt_time(t, u) * iid[u];
    h.per_symbol[t] = std::move(acc);
  }
  h.cfr = h.per_symbol.front();
  return h;
}

}  // namespace jcdsim
