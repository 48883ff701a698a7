#pragma once

#include <armadillo>
#include <cstdint>
#include <utility>
#include <vector>

#include "jcdsim/channel.hpp"
#include "jcdsim/constellation.hpp"

namespace jcdsim {

// Comb-type subcarrier layout: P pilot subcarriers at spacing floor(K/P)
// starting from index 0, everything else data.
struct PilotPattern {
  int n_subcarriers = 0;
  int n_pilots = 0;
  std::vector<int> pilot_indices;
  std::vector<int> data_indices;

  int n_data() const { return n_subcarriers - n_pilots; }
  bool is_pilot(int k) const;
};

PilotPattern build_pilot_pattern(int n_subcarriers, int n_pilots);

// Unit-modulus pilot sequences, one column per tx antenna, pairwise
// orthogonal under the Hermitian inner product (rows of the P-point DFT
// matrix). The seed is accepted for interface stability; the construction
// is deterministic.
arma::cx_mat generate_orthogonal_pilots(int n_tx, int n_pilots, std::uint64_t seed);

// One OFDM frame: pilot and data symbol blocks per tx antenna plus the
// source bits that produced the data blocks.
struct Frame {
  PilotPattern pattern;
  arma::cx_mat pilot_blocks;       // (P x n_tx), column n = antenna n
  arma::cx_mat data_blocks;        // (K-P x n_tx)
  std::vector<int> payload_bits;   // antenna-major bit order
};

Frame build_frame(const PilotPattern& pattern, const arma::cx_mat& pilots,
                  const std::vector<int>& payload_bits, const Constellation& c);

// Equivalent per-subcarrier MIMO view at data subcarrier k (absolute index):
// channel matrix (n_rx x n_tx) and the transmitted symbol vector.
std::pair<arma::cx_mat, arma::cx_vec> per_subcarrier_system(const Frame& frame,
                                                            const ChannelRealization& channel,
                                                            int subcarrier);

}  // namespace jcdsim
