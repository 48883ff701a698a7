#include "jcdsim/estimation.hpp"

#include <stdexcept>

#include "jcdsim/flops.hpp"
#include "jcdsim/linalg.hpp"
#include "jcdsim/ordering.hpp"

namespace jcdsim {

namespace {

constexpr double kSymbolFloor = 1e-6;  // magnitude floor before symbol inversion

arma::cx_mat to_cx(const arma::mat& a) {
  return arma::cx_mat(a, arma::mat(a.n_rows, a.n_cols, arma::fill::zeros));
}

void check_error_stats(const DataErrorStats& stats, const CovarianceModel& cov) {
  const arma::uword expected = arma::uword(cov.n_tx()) * cov.n_data();
  if (stats.x_hat.n_elem != expected || stats.v.n_elem != expected) {
    throw std::invalid_argument("data error stats: dimension mismatch");
  }
  if (stats.v.min() < 0.0) {
    throw std::invalid_argument("data error stats: negative variance");
  }
}

}  // namespace

arma::cx_vec ls_pilot(const arma::cx_vec& y_pilot, const arma::cx_vec& pilot_symbols) {
  if (y_pilot.n_elem != pilot_symbols.n_elem) {
    throw std::invalid_argument("ls_pilot: length mismatch");
  }
  if (arma::abs(pilot_symbols).min() == 0.0) {
    throw std::invalid_argument("ls_pilot: zero pilot symbol");
  }
  return y_pilot / pilot_symbols;
}

arma::cx_mat lmmse_weights(const CovarianceModel& cov, double sigma2) {
  if (sigma2 < 0.0) throw std::invalid_argument("lmmse_weights: negative noise variance");
  arma::cx_mat gram = cov.freq_pp();
  gram.diag() += sigma2;
  // W = R_{h h^p} gram^{-1}; solve on the Hermitian side
  return solve_hermitian(gram, cov.freq_ap().t()).t();
}

EstimationResult traditional_lmmse(const arma::cx_cube& y_pilot, const arma::cx_mat& pilot_blocks,
                                   const arma::cx_mat& weights, const CovarianceModel& cov) {
  const int n_rx = y_pilot.n_slices, n_tx = y_pilot.n_cols;
  const int n_sc = weights.n_rows, n_p = weights.n_cols;
  EstimationResult res;
  res.span = EstimationResult::Span::All;
  res.estimator = estimator_name(EstimatorKind::Traditional);
  res.cfr_hat.set_size(n_rx, n_tx, n_sc);
  arma::cx_vec y(n_p);
  for (int m = 0; m < n_rx; ++m) {
    for (int n = 0; n < n_tx; ++n) {
      for (int j = 0; j < n_p; ++j) y[j] = y_pilot(j, n, m);
      arma::cx_vec h = weights * ls_pilot(y, pilot_blocks.col(n));
      for (int k = 0; k < n_sc; ++k) res.cfr_hat(m, n, k) = h[k];
    }
  }
  res.flops = flop_count(EstimatorKind::Traditional, n_rx, n_tx, cov.n_subcarriers(), cov.n_pilots());
  return res;
}

std::pair<arma::cx_mat, arma::cx_mat> mjcd_covariances(const DataErrorStats& stats,
                                                       const CovarianceModel& cov, double sigma2) {
  check_error_stats(stats, cov);
  const int d = cov.n_data(), n_tx = cov.n_tx(), n_rx = cov.n_rx();
  const arma::cx_mat rt = to_cx(cov.r_tx());
  const arma::cx_mat rr = to_cx(cov.r_rx());
  const arma::cx_mat a = stats.blocks(n_tx);        // (d x n_tx), a(k, n) = xhat_{n,k}
  const arma::mat v = stats.v_blocks(n_tx);

  // symbol-weighted spatial mixing: g(k,k') = sum_{n,n'} xhat_{n,k} Rt(n,n') xhat*_{n',k'}
  const arma::cx_mat g = a * rt * a.t();
  // detection-error contribution collapses to a diagonal across subcarriers
  arma::vec vsum(d, arma::fill::zeros);
  for (int k = 0; k < d; ++k)
    for (int n = 0; n < n_tx; ++n) vsum[k] += v(k, n) * cov.r_tx()(n, n) * cov.freq_dd()(k, k).real();

  arma::cx_mat q = g % cov.freq_dd();
  q.diag() += arma::cx_vec(vsum, arma::vec(d, arma::fill::zeros));
  arma::cx_mat c_yy = arma::kron(rr, q);
  c_yy.diag() += sigma2;

  // c_yh block (m, (m', n')): Rr(m,m') * diag(sum_n Rt(n,n') xhat_{n,.}) * R_freq[dd]
  const arma::cx_mat gmat = a * rt;  // (d x n_tx)
  arma::cx_mat c0(d, arma::uword(n_tx) * d);
  for (int n = 0; n < n_tx; ++n) {
    arma::cx_mat block = cov.freq_dd();
    block.each_col() %= gmat.col(n);
    c0.cols(arma::uword(n) * d, arma::uword(n + 1) * d - 1) = block;
  }
  arma::cx_mat c_yh = arma::kron(rr, c0);
  (void)n_rx;
  return {std::move(c_yh), std::move(c_yy)};
}

EstimationResult mjcd_lmmse(const arma::cx_vec& y_stacked, const DataErrorStats& stats,
                            const CovarianceModel& cov, double sigma2) {
  const int d = cov.n_data(), n_tx = cov.n_tx(), n_rx = cov.n_rx();
  if (y_stacked.n_elem != arma::uword(n_rx) * d) {
    throw std::invalid_argument("mjcd_lmmse: stacked observation has wrong length");
  }
  auto [c_yh, c_yy] = mjcd_covariances(stats, cov, sigma2);

  EstimationResult res;
  res.span = EstimationResult::Span::Data;
  res.estimator = estimator_name(EstimatorKind::Mjcd);
  arma::cx_vec z = solve_hermitian(c_yy, y_stacked, &res.ridge_events);
  arma::cx_vec h = c_yh.t() * z;
  res.cfr_hat = unstack_h(h, n_rx, n_tx, d);
  res.flops = flop_count(EstimatorKind::Mjcd, n_rx, n_tx, cov.n_subcarriers(), cov.n_pilots());
  return res;
}

arma::cx_mat floor_symbol_estimates(const arma::cx_mat& x_hat_blocks, int* floored) {
  arma::cx_mat out = x_hat_blocks;
  int count = 0;
  for (auto& z : out) {
    const double mag = std::abs(z);
    if (mag < kSymbolFloor) {
      z = mag == 0.0 ? std::complex<double>(kSymbolFloor, 0.0) : z * (kSymbolFloor / mag);
      ++count;
    }
  }
  if (floored != nullptr) *floored += count;
  return out;
}

arma::cx_vec ojcd_interference_cancel(const arma::cx_vec& y_m_data, const arma::cx_cube& h_hat_data,
                                      const arma::cx_mat& x_hat_blocks, int n, int m) {
  const int d = y_m_data.n_elem, n_tx = x_hat_blocks.n_cols;
  if (static_cast<int>(h_hat_data.n_slices) != d || static_cast<int>(x_hat_blocks.n_rows) != d) {
    throw std::invalid_argument("ojcd_interference_cancel: dimension mismatch");
  }
  arma::cx_vec y = y_m_data;
  for (int q = 0; q < n_tx; ++q) {
    if (q == n) continue;
    for (int k = 0; k < d; ++k) y[k] -= x_hat_blocks(k, q) * h_hat_data(m, q, k);
  }
  return y;
}

OjcdWorkspace::OjcdWorkspace(const CovarianceModel& cov, const arma::cx_mat& w1,
                             const arma::cx_mat& x_hat_blocks, const arma::cx_mat& pilot_blocks,
                             const arma::mat& v_blocks, double sigma2)
    : cov_(cov), w1_(w1), pilots_(pilot_blocks), v_(v_blocks), sigma2_(sigma2) {
  const int d = cov.n_data(), p = cov.n_pilots(), n_tx = cov.n_tx();
  if (static_cast<int>(w1_.n_rows) != d || static_cast<int>(w1_.n_cols) != p) {
    throw std::invalid_argument("ojcd: weight slice has wrong shape");
  }
  if (static_cast<int>(x_hat_blocks.n_rows) != d || static_cast<int>(x_hat_blocks.n_cols) != n_tx) {
    throw std::invalid_argument("ojcd: symbol estimate blocks have wrong shape");
  }
  if (v_.min() < 0.0) throw std::invalid_argument("ojcd: negative error variance");
  x_hat_ = floor_symbol_estimates(x_hat_blocks, &floored_symbols_);

  const std::uint64_t du = d, pu = p;

  // self-error term: diagonal of R_dd weighted by the summed error variances
  arma::vec vsum(d, arma::fill::zeros);
  for (int n = 0; n < n_tx; ++n)
    for (int k = 0; k < d; ++k) vsum[k] += v_(k, n) * cov.freq_dd()(k, k).real();
  v_d_ = arma::diagmat(arma::cx_vec(vsum, arma::vec(d, arma::fill::zeros)));
  flops_ += arma::uword(n_tx) * d;

  pair_sum_.assign(n_tx, arma::cx_mat(d, d, arma::fill::zeros));
  if (n_tx < 2) return;

  // cross-covariance projections R_dp(n1,n2) W1^H, used by both the
  // interference gains and the error statistics
  m_table_.resize(std::size_t(n_tx) * n_tx);
  for (int n1 = 0; n1 < n_tx; ++n1) {
    for (int n2 = 0; n2 < n_tx; ++n2) {
      m_table_[std::size_t(n1) * n_tx + n2] = cov.sub_dp(n1, n2) * w1_.t();
      flops_ += flopmodel::gemm(du, pu, du);
    }
  }

  // pilot-noise propagation per antenna, folded with sigma2 up front
  vc_.resize(n_tx);
  std::vector<arma::cx_mat> x_outer(std::size_t(n_tx) * n_tx);
  const double sigma = std::sqrt(sigma2);
  for (int q = 0; q < n_tx; ++q) {
    if (arma::abs(pilots_.col(q)).min() == 0.0) {
      throw std::invalid_argument("ojcd: zero pilot symbol");
    }
    arma::cx_mat s = w1_;
    for (int j = 0; j < p; ++j) s.col(j) *= sigma / pilots_(j, q);
    flops_ += du * pu;
    arma::cx_mat outer = x_hat_.col(q) * x_hat_.col(q).t();
    x_outer[std::size_t(q) * n_tx + q] = outer;
    flops_ += du * du;
    vc_[q] = (s * s.t()) % outer;
    flops_ += flopmodel::gemm(du, pu, du) + du * du;
  }

  // accumulate the channel-error statistics over every interfering pair
  for (int n1 = 0; n1 < n_tx; ++n1) {
    for (int n2 = 0; n2 < n_tx; ++n2) {
      bool used = false;
      for (int n = 0; n < n_tx && !used; ++n) used = (n != n1 && n != n2);
      if (!used) continue;
      if (x_outer[std::size_t(n1) * n_tx + n2].is_empty()) {
        x_outer[std::size_t(n1) * n_tx + n2] = x_hat_.col(n1) * x_hat_.col(n2).t();
        flops_ += du * du;
      }
      const arma::cx_mat& m12 = m_table_[std::size_t(n1) * n_tx + n2];
      arma::cx_mat core = cov.sub_dd(n1, n2) - m12 - m12.t() + w1_ * cov.sub_pp(n1, n2) * w1_.t();
      flops_ += flopmodel::gemm(du, pu, pu) + flopmodel::gemm(du, pu, du);
      arma::cx_mat t = core % x_outer[std::size_t(n1) * n_tx + n2];
      flops_ += du * du;
      for (int n = 0; n < n_tx; ++n) {
        if (n != n1 && n != n2) pair_sum_[n] += t;
      }
    }
  }
}

arma::cx_mat OjcdWorkspace::interference_gain(int n) const {
  const int d = cov_.n_data(), n_tx = cov_.n_tx();
  arma::cx_mat b(d, d, arma::fill::zeros);
  if (n_tx < 2) return b;
  for (int q = 0; q < n_tx; ++q) {
    if (q == n) continue;
    // column scaling by conj(xhat_q / xhat_n)
    arma::cx_vec ratio = arma::conj(x_hat_.col(q) / x_hat_.col(n));
    arma::cx_mat term = cov_.sub_dd(n, q) - m_table_[std::size_t(n) * n_tx + q];
    term.each_row() %= ratio.st();
    b += term;
  }
  return b;
}

arma::cx_mat OjcdWorkspace::equivalent_noise_cov(int n) const {
  const int n_tx = cov_.n_tx();
  arma::cx_mat sig = pair_sum_[n] + v_d_;
  for (int q = 0; q < n_tx; ++q) {
    if (q != n && !vc_.empty()) sig += vc_[q];
  }
  sig.diag() += sigma2_;
  return sig;
}

arma::cx_mat OjcdWorkspace::weights(int n) {
  const int d = cov_.n_data(), n_tx = cov_.n_tx();
  const std::uint64_t du = d;
  arma::cx_mat b = interference_gain(n);
  flops_ += arma::uword(n_tx - 1) * (du * du + du);
  arma::cx_mat sig = equivalent_noise_cov(n);

  // R_{h^d h^LS}(n) and R_{h^LS h^LS}(n)
  arma::cx_mat r1 = cov_.sub_dd(n, n) + b;
  arma::cx_vec inv_x = 1.0 / x_hat_.col(n);
  arma::cx_mat sandwich = sig;
  sandwich.each_col() %= inv_x;
  sandwich.each_row() %= arma::conj(inv_x).st();
  flops_ += 2 * du * du + du;
  arma::cx_mat r2 = r1 + b.t() + sandwich;

  // weights = r1 r2^{-1}; r2 is Hermitian for the separable real-coefficient
  // spatial model, so solve from that side
  return solve_hermitian(r2, r1.t(), &ridge_events_).t();
}

arma::cx_mat ojcd_weights(int n, const CovarianceModel& cov, const arma::cx_mat& w1,
                          const arma::cx_mat& x_hat_blocks, const arma::cx_mat& pilot_blocks,
                          const arma::mat& v_blocks, double sigma2) {
  OjcdWorkspace ws(cov, w1, x_hat_blocks, pilot_blocks, v_blocks, sigma2);
  return ws.weights(n);
}

EstimationResult ojcd_lmmse(const arma::cx_mat& y_data, const arma::cx_cube& h_hat_data,
                            const DataErrorStats& stats, const arma::cx_mat& pilot_blocks,
                            const arma::cx_mat& w_lmmse, const CovarianceModel& cov, double sigma2) {
  check_error_stats(stats, cov);
  const int d = cov.n_data(), n_tx = cov.n_tx(), n_rx = cov.n_rx();
  if (static_cast<int>(y_data.n_rows) != d || static_cast<int>(y_data.n_cols) != n_rx) {
    throw std::invalid_argument("ojcd_lmmse: observation block has wrong shape");
  }

  // data-subcarrier rows of the first-layer interpolation weights
  arma::uvec data_rows(d);
  for (int i = 0; i < d; ++i) data_rows[i] = cov.data_indices()[i];
  arma::cx_mat w1 = w_lmmse.rows(data_rows);

  const arma::cx_mat x_blocks = stats.blocks(n_tx);
  OjcdWorkspace ws(cov, w1, x_blocks, pilot_blocks, stats.v_blocks(n_tx), sigma2);

  EstimationResult res;
  res.span = EstimationResult::Span::Data;
  res.estimator = estimator_name(EstimatorKind::Ojcd);
  res.cfr_hat.set_size(n_rx, n_tx, d);
  const std::uint64_t du = d;
  for (int n = 0; n < n_tx; ++n) {
    arma::cx_mat w_new = ws.weights(n);
    const arma::cx_vec x_n = ws.x_hat_blocks().col(n);
    for (int m = 0; m < n_rx; ++m) {
      arma::cx_vec y_hat = ojcd_interference_cancel(y_data.col(m), h_hat_data, x_blocks, n, m);
      arma::cx_vec h_ls = y_hat / x_n;
      arma::cx_vec h_new = w_new * h_ls;
      for (int k = 0; k < d; ++k) res.cfr_hat(m, n, k) = h_new[k];
    }
  }
  std::uint64_t apply = arma::uword(n_rx) * n_tx * (du * du + arma::uword(n_tx) * du);
  res.flops = ws.flops() + apply;
  res.ridge_events = ws.ridge_events();
  res.floored_symbols = ws.floored_symbols();
  return res;
}

}  // namespace jcdsim
