#pragma once

#include <armadillo>
#include <stdexcept>

namespace jcdsim {

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-tol * max_eig, 0) are clamped to zero; anything more negative throws.
inline arma::cx_mat psd_sqrt(const arma::cx_mat& a, double tol = 1e-9) {
  arma::vec eigval;
  arma::cx_mat eigvec;
  if (!arma::eig_sym(eigval, eigvec, arma::cx_mat(0.5 * (a + a.t())))) {
    throw std::runtime_error("psd_sqrt: eigendecomposition failed");
  }
  const double scale = std::max(eigval.max(), 1.0);
  if (eigval.min() < -tol * scale) {
    throw std::runtime_error("psd_sqrt: matrix is not PSD within tolerance");
  }
  arma::vec clamped = arma::clamp(eigval, 0.0, arma::datum::inf);
  return eigvec * arma::diagmat(arma::sqrt(clamped)) * eigvec.t();
}

inline arma::cx_mat psd_sqrt(const arma::mat& a, double tol = 1e-9) {
  return psd_sqrt(arma::cx_mat(a, arma::mat(a.n_rows, a.n_cols, arma::fill::zeros)), tol);
}

// Solves A X = B for Hermitian A. If the factorization fails, retries once
// with a ridge of 1e-10 * trace(A)/n on the diagonal and bumps the event
// counter so callers can surface the degeneracy.
inline arma::cx_mat solve_hermitian(const arma::cx_mat& a, const arma::cx_mat& b,
                                    int* ridge_events = nullptr) {
  arma::cx_mat x;
  if (arma::solve(x, a, b, arma::solve_opts::likely_sympd + arma::solve_opts::no_approx) &&
      x.is_finite()) {
    return x;
  }
  const double ridge = 1e-10 * std::abs(arma::trace(a)) / static_cast<double>(a.n_rows);
  arma::cx_mat a_reg = a + ridge * arma::cx_mat(arma::eye(a.n_rows, a.n_rows),
                                               arma::mat(a.n_rows, a.n_rows, arma::fill::zeros));
  if (ridge_events != nullptr) ++(*ridge_events);
  if (arma::solve(x, a_reg, b, arma::solve_opts::likely_sympd + arma::solve_opts::no_approx) &&
      x.is_finite()) {
    return x;
  }
  throw std::runtime_error("solve_hermitian: singular system even after ridge");
}

inline bool is_hermitian(const arma::cx_mat& a, double tol) {
  return arma::norm(arma::cx_mat(a - a.t()), "fro") <= tol * std::max(1.0, arma::norm(a, "fro"));
}

}  // namespace jcdsim
