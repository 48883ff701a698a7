#include "jcdsim/detection.hpp"

#include <stdexcept>

namespace jcdsim {

namespace {
constexpr double kVarFloor = 1e-12;  // variance floor ahead of reciprocals
}

std::pair<std::complex<double>, double> moment_match(std::complex<double> x_e, double v_e,
                                                     const Constellation& c) {
  if (v_e <= 0.0) throw std::invalid_argument("moment_match: variance must be positive");
  const arma::uword n = c.points.n_elem;
  // normalize by the smallest distance so the exponentials stay in range
  arma::vec d2(n);
  for (arma::uword s = 0; s < n; ++s) d2[s] = std::norm(x_e - c.points[s]);
  const double d2_min = d2.min();
  double wsum = 0.0;
  std::complex<double> mean = 0.0;
  for (arma::uword s = 0; s < n; ++s) {
    double w = std::exp(-(d2[s] - d2_min) / v_e);
    wsum += w;
    mean += w * c.points[s];
  }
  mean /= wsum;
  double var = 0.0;
  for (arma::uword s = 0; s < n; ++s) {
    double w = std::exp(-(d2[s] - d2_min) / v_e);
    var += w * std::norm(c.points[s] - mean);
  }
  var /= wsum;
  return {mean, var};
}

namespace {

EpTrace ep_run(const arma::cx_mat& h_hat, const arma::cx_vec& y, double sigma2,
               int iterations, double damping, const Constellation& c, bool keep_history) {
  if (sigma2 <= 0.0) throw std::invalid_argument("ep_detect: noise variance must be positive");
  if (iterations < 1) throw std::invalid_argument("ep_detect: need at least one iteration");
  const int n_tx = h_hat.n_cols;

  const arma::cx_mat gram = h_hat.t() * h_hat / sigma2;
  const arma::cx_vec match = h_hat.t() * y / sigma2;

  arma::vec lambda(n_tx, arma::fill::value(1.0 / c.symbol_energy()));
  arma::cx_vec gamma(n_tx, arma::fill::zeros);

  EpTrace trace;
  trace.soft.x_p.set_size(n_tx);
  trace.soft.v_p.set_size(n_tx);
  trace.soft.x_e.set_size(n_tx);
  trace.soft.v_e.set_size(n_tx);

  for (int t = 0; t < iterations; ++t) {
    arma::cx_mat a = gram;
    a.diag() += arma::cx_vec(lambda, arma::vec(n_tx, arma::fill::zeros));
    arma::cx_mat cov;
    if (!arma::solve(cov, a, arma::cx_mat(arma::eye(n_tx, n_tx), arma::mat(n_tx, n_tx, arma::fill::zeros)),
                     arma::solve_opts::likely_sympd + arma::solve_opts::no_approx) ||
        !cov.is_finite()) {
      throw std::runtime_error("ep_detect: singular Gaussian solve (degenerate channel estimate)");
    }
    const arma::cx_vec mu = cov * (match + gamma);

    arma::vec lambda_new(n_tx);
    arma::cx_vec gamma_new(n_tx);
    for (int i = 0; i < n_tx; ++i) {
      const double sig_ii = std::max(cov(i, i).real(), kVarFloor);
      // cavity (extrinsic) moments
      double denom = 1.0 - sig_ii * lambda[i];
      double v_e = sig_ii / std::max(denom, kVarFloor);
      v_e = std::max(v_e, kVarFloor);
      std::complex<double> x_e = v_e * (mu[i] / sig_ii - gamma[i]);

      auto [x_p, v_p_raw] = moment_match(x_e, v_e, c);
      const double v_p = std::max(v_p_raw, kVarFloor);

      trace.soft.x_e[i] = x_e;
      trace.soft.v_e[i] = v_e;
      trace.soft.x_p[i] = x_p;
      trace.soft.v_p[i] = v_p;

      lambda_new[i] = 1.0 / v_p - 1.0 / v_e;
      gamma_new[i] = x_p / v_p - x_e / v_e;
      if (lambda_new[i] < 0.0) {
        lambda_new[i] = lambda[i];
        gamma_new[i] = gamma[i];
      }
    }
    lambda = damping * lambda_new + (1.0 - damping) * lambda;
    gamma = damping * gamma_new + (1.0 - damping) * gamma;
    if (keep_history) trace.lambda_history.push_back(lambda);
  }
  return trace;
}

}  // namespace

SoftSymbols ep_detect(const arma::cx_mat& h_hat, const arma::cx_vec& y, double sigma2,
                      int iterations, double damping, const Constellation& c) {
  return ep_run(h_hat, y, sigma2, iterations, damping, c, false).soft;
}

EpTrace ep_detect_trace(const arma::cx_mat& h_hat, const arma::cx_vec& y, double sigma2,
                        int iterations, double damping, const Constellation& c) {
  return ep_run(h_hat, y, sigma2, iterations, damping, c, true);
}

arma::uvec map_oracle(const arma::cx_mat& h, const arma::cx_vec& y, double /*sigma2*/,
                      const Constellation& c) {
  const int n_tx = h.n_cols;
  double candidates = std::pow(double(c.order), n_tx);
  if (candidates > 1e6) throw std::invalid_argument("map_oracle: candidate set exceeds enumeration bound");

  arma::uvec best(n_tx, arma::fill::zeros);
  arma::uvec current(n_tx, arma::fill::zeros);
  double best_metric = arma::datum::inf;
  const auto total = static_cast<std::uint64_t>(candidates);
  arma::cx_vec x(n_tx);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rem = code;
    // lexicographic order: antenna 0 is the most significant digit, so the
    // first minimizer found wins ties
    for (int i = n_tx - 1; i >= 0; --i) {
      current[i] = rem % c.order;
      rem /= c.order;
    }
    for (int i = 0; i < n_tx; ++i) x[i] = c.points[current[i]];
    const double metric = arma::accu(arma::square(arma::abs(y - h * x)));
    if (metric < best_metric) {
      best_metric = metric;
      best = current;
    }
  }
  return best;
}

}  // namespace jcdsim
