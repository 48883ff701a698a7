#pragma once

#include <armadillo>
#include <complex>
#include <vector>

namespace jcdsim {

// Gray-coded QAM alphabet, normalized to unit average symbol energy.
struct Constellation {
  int order = 0;                              // 4 (QPSK) or 16
  arma::cx_vec points;                        // zero mean, E{|s|^2} = 1
  std::vector<std::vector<int>> bit_labels;   // one log2(order)-bit label per point

  int bits_per_symbol() const { return static_cast<int>(std::lround(std::log2(order))); }
  double symbol_energy() const { return 1.0; }
};

// order must be 4 or 16. QPSK maps bit pair (b0,b1) to ((1-2*b0)+j(1-2*b1))/sqrt(2);
// 16-QAM applies a per-axis Gray code on levels {+3,+1,-1,-3}/sqrt(10).
Constellation make_constellation(int order);

// bits.size() must be a multiple of bits_per_symbol
arma::cx_vec modulate(const std::vector<int>& bits, const Constellation& c);

// index of the nearest constellation point (ties -> lowest index)
arma::uword nearest_point(std::complex<double> z, const Constellation& c);

// hard-decision demapping: nearest point, then its bit label
std::vector<int> hard_demap(const arma::cx_vec& symbols, const Constellation& c);

}  // namespace jcdsim
