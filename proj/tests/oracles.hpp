#pragma once

// Test-side reference implementations, kept independent of the library code
// paths they validate: Monte Carlo moment estimators, naive dense formula
// evaluations, joint-Gaussian conditioning, and a dense-solve spline.

#include <armadillo>
#include <vector>

#include "jcdsim/channel.hpp"
#include "jcdsim/estimation.hpp"
#include "jcdsim/rng.hpp"

namespace oracles {

inline arma::cx_mat to_cx(const arma::mat& a) {
  return arma::cx_mat(a, arma::mat(a.n_rows, a.n_cols, arma::fill::zeros));
}

inline double rel_fro(const arma::cx_mat& approx, const arma::cx_mat& exact) {
  return arma::norm(arma::cx_mat(approx - exact), "fro") / arma::norm(exact, "fro");
}

// Random small covariance model: random tap profile, random spatial rho.
inline jcdsim::CovarianceModel random_model(jcdsim::Rng& rng, int k, int p, int n_tx, int n_rx,
                                            double max_rho = 0.7) {
  jcdsim::PowerDelayProfile pdp;
  const int taps = 2 + int(rng.uniform_int(5));
  double delay = 0.0;
  for (int t = 0; t < taps; ++t) {
    pdp.taps.push_back({delay, 0.2 + rng.uniform()});
    delay += 30e-9 + 250e-9 * rng.uniform();
  }
  double total = 0.0;
  for (auto& t : pdp.taps) total += t.power;
  for (auto& t : pdp.taps) t.power /= total;
  const double rho = max_rho * rng.uniform();
  return jcdsim::assemble_covariance(pdp, k, p, n_tx, n_rx, rho, 15e3);
}

// Naive dense evaluation of the stacked-system moments: builds the block
// symbol matrix and the error-variance terms literally and multiplies them
// out, with no structure shortcuts.
inline std::pair<arma::cx_mat, arma::cx_mat> dense_stacked_moments(const jcdsim::DataErrorStats& stats,
                                                                   const jcdsim::CovarianceModel& cov,
                                                                   double sigma2) {
  const int d = cov.n_data(), n_tx = cov.n_tx(), n_rx = cov.n_rx();
  const arma::uword m_dim = arma::uword(n_rx) * d;
  const arma::uword n_dim = arma::uword(n_rx) * n_tx * d;
  const arma::cx_mat chh = cov.chh_dense();

  arma::cx_mat xb(m_dim, n_dim, arma::fill::zeros);  // I_{nr} kron [(1 kron I_d) diag(x)]
  for (int m = 0; m < n_rx; ++m)
    for (int n = 0; n < n_tx; ++n)
      for (int k = 0; k < d; ++k) {
        xb(arma::uword(m) * d + k, (arma::uword(m) * n_tx + n) * d + k) =
            stats.x_hat[arma::uword(n) * d + k];
      }

  arma::cx_mat a(m_dim, n_dim, arma::fill::zeros);
  for (int m = 0; m < n_rx; ++m)
    for (int n = 0; n < n_tx; ++n)
      for (int k = 0; k < d; ++k) a(arma::uword(m) * d + k, (arma::uword(m) * n_tx + n) * d + k) = 1.0;

  arma::cx_mat vrep(n_dim, n_dim, arma::fill::zeros);  // 1_{nr x nr} kron diag(v)
  for (int mi = 0; mi < n_rx; ++mi)
    for (int mj = 0; mj < n_rx; ++mj)
      for (arma::uword i = 0; i < arma::uword(n_tx) * d; ++i) {
        vrep(arma::uword(mi) * n_tx * d + i, arma::uword(mj) * n_tx * d + i) = stats.v[i];
      }

  arma::cx_mat c_yh = xb * chh;
  arma::cx_mat b = chh % vrep;
  arma::cx_mat c_yy = xb * chh * xb.t() + a * b * a.t();
  c_yy.diag() += sigma2;
  return {std::move(c_yh), std::move(c_yy)};
}

// Monte Carlo estimate of E{y h^H} and E{y y^H} under the assumed
// statistics: h Gaussian with the model covariance, symbols x = xhat + e
// with independent zero-mean errors of variance v, independent noise.
inline std::pair<arma::cx_mat, arma::cx_mat> mc_stacked_moments(const jcdsim::DataErrorStats& stats,
                                                                const jcdsim::CovarianceModel& cov,
                                                                double sigma2, int samples,
                                                                std::uint64_t seed) {
  const int d = cov.n_data(), n_tx = cov.n_tx(), n_rx = cov.n_rx();
  const arma::uword m_dim = arma::uword(n_rx) * d;
  const arma::uword n_dim = arma::uword(n_rx) * n_tx * d;
  const arma::cx_mat l = jcdsim::psd_sqrt(cov.chh_dense());
  const double sigma = std::sqrt(sigma2);

  jcdsim::Rng rng(seed);
  arma::cx_mat syh(m_dim, n_dim, arma::fill::zeros);
  arma::cx_mat syy(m_dim, m_dim, arma::fill::zeros);
  arma::cx_vec x(arma::uword(n_tx) * d), y(m_dim);
  for (int s = 0; s < samples; ++s) {
    arma::cx_vec h = l * rng.cgaussian_vec(n_dim);
    for (arma::uword i = 0; i < x.n_elem; ++i) {
      x[i] = stats.x_hat[i] + std::sqrt(stats.v[i]) * rng.cgaussian();
    }
    for (int m = 0; m < n_rx; ++m) {
      for (int k = 0; k < d; ++k) {
        std::complex<double> acc = sigma * rng.cgaussian();
        for (int n = 0; n < n_tx; ++n) {
          acc += x[arma::uword(n) * d + k] * h[(arma::uword(m) * n_tx + n) * d + k];
        }
        y[arma::uword(m) * d + k] = acc;
      }
    }
    syh += y * h.t();
    syy += y * y.t();
  }
  return {syh / samples, syy / samples};
}

// Monte Carlo estimate of the per-subsystem interference statistics from
// their defining expectations: B_n = E{h_n^d Z_n^H} (Xhat_n^{-1})^H and
// Sigma_n = E{Z_n Z_n^H}, where Z_n collects residual interference after
// cancellation with first-layer estimates, detection error leakage, and
// noise.
struct SubsystemMoments {
  arma::cx_mat b;
  arma::cx_mat sigma;
};

inline SubsystemMoments mc_subsystem_moments(int n, const jcdsim::CovarianceModel& cov,
                                             const arma::cx_mat& w1, const arma::cx_mat& x_hat_blocks,
                                             const arma::cx_mat& pilot_blocks, const arma::mat& v_blocks,
                                             double sigma2, int samples, std::uint64_t seed) {
  const int k = cov.n_subcarriers(), d = cov.n_data(), p = cov.n_pilots(), n_tx = cov.n_tx();
  const arma::cx_mat joint = arma::kron(to_cx(cov.r_tx()), cov.r_freq());
  const arma::cx_mat l = jcdsim::psd_sqrt(joint);
  const double sigma = std::sqrt(sigma2);

  arma::uvec didx(d), pidx(p);
  for (int i = 0; i < d; ++i) didx[i] = cov.data_indices()[i];
  for (int i = 0; i < p; ++i) pidx[i] = cov.pilot_indices()[i];

  jcdsim::Rng rng(seed);
  arma::cx_mat shz(d, d, arma::fill::zeros), szz(d, d, arma::fill::zeros);
  for (int s = 0; s < samples; ++s) {
    arma::cx_vec hv = l * rng.cgaussian_vec(arma::uword(n_tx) * k);
    std::vector<arma::cx_vec> h_d(n_tx), h_p(n_tx), h_est(n_tx);
    for (int q = 0; q < n_tx; ++q) {
      arma::cx_vec h_q = hv.subvec(arma::uword(q) * k, arma::uword(q + 1) * k - 1);
      h_d[q] = h_q.elem(didx);
      h_p[q] = h_q.elem(pidx);
      // first-layer estimate: pilot LS propagated through the data rows of
      // the interpolation weights, with per-antenna independent pilot noise
      arma::cx_vec noisy = h_p[q] + (sigma * rng.cgaussian_vec(p)) / pilot_blocks.col(q);
      h_est[q] = w1 * noisy;
    }
    arma::cx_vec z = sigma * rng.cgaussian_vec(d);
    for (int q = 0; q < n_tx; ++q) {
      if (q != n) z += x_hat_blocks.col(q) % (h_d[q] - h_est[q]);
      arma::cx_vec e(d);
      for (int i = 0; i < d; ++i) e[i] = std::sqrt(v_blocks(i, q)) * rng.cgaussian();
      z += e % h_d[q];
    }
    shz += h_d[n] * z.t();
    szz += z * z.t();
  }
  SubsystemMoments out;
  out.b = shz / samples;
  for (int i = 0; i < d; ++i) out.b.col(i) *= std::conj(1.0 / x_hat_blocks(i, n));
  out.sigma = szz / samples;
  return out;
}

// E[h_all | y_p = h_pilot + noise] via joint-Gaussian conditioning on an
// explicitly assembled block covariance.
inline arma::cx_vec conditional_mean_estimate(const arma::cx_mat& r_freq,
                                              const std::vector<int>& pilot_indices, double sigma2,
                                              const arma::cx_vec& y_pilot) {
  const int k = r_freq.n_rows, p = int(pilot_indices.size());
  arma::uvec pidx(p);
  for (int i = 0; i < p; ++i) pidx[i] = pilot_indices[i];
  arma::cx_mat r_ap = r_freq.cols(pidx);
  arma::cx_mat r_pp = r_freq.submat(pidx, pidx);
  r_pp.diag() += sigma2;
  (void)k;
  return r_ap * arma::solve(r_pp, y_pilot);
}

// Natural cubic spline by assembling the full linear system densely and
// evaluating the piecewise polynomial directly.
inline double dense_spline_eval(const std::vector<double>& xs, const arma::vec& ys, double t) {
  const int n = int(xs.size());
  arma::mat a(n, n, arma::fill::zeros);
  arma::vec rhs(n, arma::fill::zeros);
  a(0, 0) = 1.0;
  a(n - 1, n - 1) = 1.0;
  for (int i = 1; i < n - 1; ++i) {
    const double h0 = xs[i] - xs[i - 1], h1 = xs[i + 1] - xs[i];
    a(i, i - 1) = h0 / 6.0;
    a(i, i) = (xs[i + 1] - xs[i - 1]) / 3.0;
    a(i, i + 1) = h1 / 6.0;
    rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
  }
  arma::vec m = arma::solve(a, rhs);
  int i = 0;
  while (i < n - 2 && xs[i + 1] <= t) ++i;
  const double h = xs[i + 1] - xs[i];
  const double aa = (xs[i + 1] - t) / h, bb = (t - xs[i]) / h;
  return aa * ys[i] + bb * ys[i + 1] +
         ((aa * aa * aa - aa) * m[i] + (bb * bb * bb - bb) * m[i + 1]) * h * h / 6.0;
}

}  // namespace oracles
