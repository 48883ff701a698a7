#include "jcdsim/flops.hpp"

#include <stdexcept>

namespace jcdsim {

using flopmodel::factor_solve;
using flopmodel::gemm;

FlopBreakdown flop_breakdown(EstimatorKind kind, int n_rx, int n_tx, int n_subcarriers, int n_pilots) {
  if (n_rx < 1 || n_tx < 1 || n_pilots < 1 || n_pilots >= n_subcarriers) {
    throw std::invalid_argument("flop_breakdown: invalid dimensions");
  }
  const std::uint64_t nr = n_rx, nt = n_tx, k = n_subcarriers, p = n_pilots;
  const std::uint64_t d = k - p;

  FlopBreakdown fb;
  switch (kind) {
    case EstimatorKind::Traditional: {
      fb.solve = factor_solve(p, k);            // interpolation weights
      fb.apply = nr * nt * (gemm(k, p, 1) + p); // per-pair LS + interpolation
      break;
    }
    case EstimatorKind::Mjcd: {
      const std::uint64_t m = nr * d;
      const std::uint64_t n = nr * nt * d;
      fb.statistics = gemm(m, n, n)     // E{y h^H} assembly
                    + gemm(m, n, m)     // symbol-weighted channel Gram
                    + n * n             // error-variance Hadamard term
                    + m * m * nt * nt;  // antenna-summed error statistics
      fb.solve = factor_solve(m, 1);
      fb.apply = gemm(n, m, 1);
      break;
    }
    case EstimatorKind::Ojcd: {
      // pairs of interfering antennas that actually appear in the sums
      const std::uint64_t used_pairs = nt == 1 ? 0 : (nt == 2 ? 2 : nt * nt);
      const std::uint64_t cross_products = nt >= 2 ? nt * nt : 0;
      const std::uint64_t pilot_terms = nt >= 2 ? nt : 0;
      fb.statistics = cross_products * gemm(d, p, d)                  // R_dp W1^H table
                    + used_pairs * (gemm(d, p, p) + gemm(d, p, d))    // W1 R_pp W1^H
                    + used_pairs * d * d                              // symbol outer products
                    + used_pairs * d * d                              // Hadamard weighting
                    + pilot_terms * (d * p + gemm(d, p, d) + d * d)   // pilot-noise propagation
                    + nt * d                                          // self-error diagonal
                    + nt * (nt - 1) * (d * d + d)                     // interference-gain scalings
                    + nt * (2 * d * d + d);                           // symbol-inverse sandwich
      fb.excluded_weight_factorization = nt * factor_solve(d, d);
      fb.apply = nr * nt * (d * d + nt * d);
      break;
    }
  }
  return fb;
}

std::uint64_t flop_count(EstimatorKind kind, int n_rx, int n_tx, int n_subcarriers, int n_pilots) {
  return flop_breakdown(kind, n_rx, n_tx, n_subcarriers, n_pilots).total();
}

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Traditional: return "lmmse";
    case EstimatorKind::Mjcd: return "mjcd";
    case EstimatorKind::Ojcd: return "ojcd";
  }
  return "?";
}

}  // namespace jcdsim
