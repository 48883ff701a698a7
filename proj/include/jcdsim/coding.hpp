#pragma once

#include <armadillo>
#include <array>
#include <vector>

#include "jcdsim/constellation.hpp"

namespace jcdsim {

// Rate-1/2 convolutional code, zero-tail terminated. Generators default to
// the standard (171, 133) octal pair at constraint length 7.
struct CodeConfig {
  int constraint_length = 7;
  std::array<unsigned, 2> generators = {0171, 0133};
  int block_length = 1984;  // info bits per codeword

  double rate() const { return 0.5; }
  int coded_length() const { return 2 * (block_length + constraint_length - 1); }
  int n_states() const { return 1 << (constraint_length - 1); }
};

// Encodes exactly block_length info bits; appends constraint_length-1 zero
// flush bits, so the codeword has 2*(block_length + constraint_length - 1) bits.
std::vector<int> conv_encode(const std::vector<int>& bits, const CodeConfig& cfg);

// Per-bit log-likelihood ratios, positive favoring bit 0:
//   LLR_b = log sum_{s: b(s)=0} exp(-|x_e - s|^2 / v_e)
//         - log sum_{s: b(s)=1} exp(-|x_e - s|^2 / v_e)
// computed with max normalization.
arma::vec demap_llr(std::complex<double> x_e, double v_e, const Constellation& c);

// Batch form over per-antenna extrinsic moments ((K-P) x n_tx matrices);
// output follows the payload bit order (antenna-major, subcarrier, bit).
arma::vec demap_llr(const arma::cx_mat& x_e, const arma::mat& v_e, const Constellation& c);

// Soft-input maximum-likelihood sequence decoding over the code trellis
// (branch metric: sum of +/- LLR/2). Expects cfg.coded_length() LLRs and
// returns block_length info bits.
std::vector<int> viterbi_decode(const arma::vec& llrs, const CodeConfig& cfg);

// Per-receive-antenna total SNR (dB) for a target Eb/N0, given the
// modulation order and code rate: SNR = Eb/N0 * bits_per_symbol * rate * n_tx.
double snr_db_from_ebn0(double ebn0_db, int bits_per_symbol, double code_rate, int n_tx);

// Fairness convention for coded-vs-uncoded comparisons: the uncoded run is
// evaluated 3 dB (one rate octave) above the coded operating point.
double uncoded_ebn0_db(double coded_ebn0_db);

}  // namespace jcdsim
