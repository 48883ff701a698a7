#pragma once

#include <armadillo>

namespace jcdsim {

// Stacking convention for the equivalent space-frequency system, shared by
// every code path that builds or consumes stacked vectors:
//   h: rx antenna m outermost, tx antenna n middle, subcarrier k innermost
//   y: rx antenna m outer, subcarrier k inner
//   x: tx antenna n outer, subcarrier k inner
inline arma::uword h_index(arma::uword m, arma::uword n, arma::uword k,
                           arma::uword n_tx, arma::uword n_sc) {
  return (m * n_tx + n) * n_sc + k;
}

inline arma::uword y_index(arma::uword m, arma::uword k, arma::uword n_sc) {
  return m * n_sc + k;
}

inline arma::uword x_index(arma::uword n, arma::uword k, arma::uword n_sc) {
  return n * n_sc + k;
}

// Stacks per-(m,n) channel vectors laid out as cube(m, n, k) into the h order.
inline arma::cx_vec stack_h(const arma::cx_cube& h) {
  const arma::uword n_rx = h.n_rows, n_tx = h.n_cols, n_sc = h.n_slices;
  arma::cx_vec out(n_rx * n_tx * n_sc);
  for (arma::uword m = 0; m < n_rx; ++m)
    for (arma::uword n = 0; n < n_tx; ++n)
      for (arma::uword k = 0; k < n_sc; ++k)
        out[h_index(m, n, k, n_tx, n_sc)] = h(m, n, k);
  return out;
}

inline arma::cx_cube unstack_h(const arma::cx_vec& v, arma::uword n_rx,
                               arma::uword n_tx, arma::uword n_sc) {
  arma::cx_cube h(n_rx, n_tx, n_sc);
  for (arma::uword m = 0; m < n_rx; ++m)
    for (arma::uword n = 0; n < n_tx; ++n)
      for (arma::uword k = 0; k < n_sc; ++k)
        h(m, n, k) = v[h_index(m, n, k, n_tx, n_sc)];
  return h;
}

// Stacks per-antenna columns (n_sc x n_ant) into the n-outer, k-inner order.
inline arma::cx_vec stack_blocks(const arma::cx_mat& blocks) {
  return arma::vectorise(blocks);  // column-major: column n contiguous
}

inline arma::vec stack_blocks(const arma::mat& blocks) {
  return arma::vectorise(blocks);
}

}  // namespace jcdsim
