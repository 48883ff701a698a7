#pragma once

#include <armadillo>
#include <utility>
#include <vector>

#include "jcdsim/constellation.hpp"

namespace jcdsim {

// Per-subcarrier soft detector output: posterior and extrinsic moments for
// each tx antenna. Posterior variances are the detection-error variances
// consumed by the data-aided estimators; extrinsic moments feed the LLR
// demapper.
struct SoftSymbols {
  arma::cx_vec x_p;  // posterior means
  arma::vec v_p;     // posterior variances
  arma::cx_vec x_e;  // extrinsic means
  arma::vec v_e;     // extrinsic variances
};

// Gaussian-weighted moments over the alphabet: p(s) ~ exp(-|x_e - s|^2 / v_e).
std::pair<std::complex<double>, double> moment_match(std::complex<double> x_e, double v_e,
                                                     const Constellation& c);

struct EpConfig {
  int iterations = 5;
  double damping = 0.2;
};

// Expectation-propagation MIMO detector with diagonal site parameters.
// Runs `iterations` rounds of the Gaussian solve / cavity / moment-matching
// loop with the negative-precision guard and damped parameter updates.
SoftSymbols ep_detect(const arma::cx_mat& h_hat, const arma::cx_vec& y, double sigma2,
                      int iterations, double damping, const Constellation& c);

// Same loop, also reporting the site precisions after every iteration
// (for convergence diagnostics and the positivity property test).
struct EpTrace {
  SoftSymbols soft;
  std::vector<arma::vec> lambda_history;
};
EpTrace ep_detect_trace(const arma::cx_mat& h_hat, const arma::cx_vec& y, double sigma2,
                        int iterations, double damping, const Constellation& c);

// Exhaustive maximum a posteriori detection (uniform prior): minimizes
// ||y - H x||^2 over all |A|^n_tx candidate vectors. Returns constellation
// point indices per antenna; ties break to the lexicographically smallest
// index vector. Rejects instances with more than 10^6 candidates.
arma::uvec map_oracle(const arma::cx_mat& h, const arma::cx_vec& y, double sigma2,
                      const Constellation& c);

}  // namespace jcdsim
