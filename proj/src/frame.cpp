#include "jcdsim/frame.hpp"

#include <algorithm>
#include <stdexcept>

namespace jcdsim {

bool PilotPattern::is_pilot(int k) const {
  return std::binary_search(pilot_indices.begin(), pilot_indices.end(), k);
}

PilotPattern build_pilot_pattern(int n_subcarriers, int n_pilots) {
  if (n_pilots < 1 || n_pilots > n_subcarriers) {
    throw std::invalid_argument("build_pilot_pattern: need 1 <= P <= K");
  }
  PilotPattern p;
  p.n_subcarriers = n_subcarriers;
  p.n_pilots = n_pilots;
  const int spacing = n_subcarriers / n_pilots;
  for (int i = 0; i < n_pilots; ++i) p.pilot_indices.push_back(i * spacing);
  for (int k = 0, i = 0; k < n_subcarriers; ++k) {
    if (i < n_pilots && p.pilot_indices[i] == k) {
      ++i;
    } else {
      p.data_indices.push_back(k);
    }
  }
  return p;
}

arma::cx_mat generate_orthogonal_pilots(int n_tx, int n_pilots, std::uint64_t /*seed*/) {
  if (n_tx > n_pilots) {
    throw std::invalid_argument("generate_orthogonal_pilots: need n_tx <= P for orthogonality");
  }
  arma::cx_mat pilots(n_pilots, n_tx);
  for (int n = 0; n < n_tx; ++n) {
    for (int j = 0; j < n_pilots; ++j) {
      double phase = -2.0 * arma::datum::pi * n * j / n_pilots;
      pilots(j, n) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  return pilots;
}

Frame build_frame(const PilotPattern& pattern, const arma::cx_mat& pilots,
                  const std::vector<int>& payload_bits, const Constellation& c) {
  const int n_tx = pilots.n_cols;
  const int n_data = pattern.n_data();
  const std::size_t bits_needed = std::size_t(n_tx) * n_data * c.bits_per_symbol();
  if (static_cast<int>(pilots.n_rows) != pattern.n_pilots) {
    throw std::invalid_argument("build_frame: pilot length does not match pattern");
  }
  if (payload_bits.size() != bits_needed) {
    throw std::invalid_argument("build_frame: payload size does not match frame capacity");
  }
  Frame f;
  f.pattern = pattern;
  f.pilot_blocks = pilots;
  f.payload_bits = payload_bits;
  f.data_blocks = arma::reshape(modulate(payload_bits, c), n_data, n_tx);
  return f;
}

std::pair<arma::cx_mat, arma::cx_vec> per_subcarrier_system(const Frame& frame,
                                                            const ChannelRealization& channel,
                                                            int subcarrier) {
  const auto& data = frame.pattern.data_indices;
  auto it = std::lower_bound(data.begin(), data.end(), subcarrier);
  if (it == data.end() || *it != subcarrier) {
    throw std::invalid_argument("per_subcarrier_system: not a data subcarrier");
  }
  const int pos = static_cast<int>(it - data.begin());
  const int n_rx = channel.cfr.n_rows, n_tx = channel.cfr.n_cols;
  arma::cx_mat h(n_rx, n_tx);
  for (int m = 0; m < n_rx; ++m)
    for (int n = 0; n < n_tx; ++n) h(m, n) = channel.cfr(m, n, subcarrier);
  arma::cx_vec x = frame.data_blocks.row(pos).st();
  return {std::move(h), std::move(x)};
}

}  // namespace jcdsim
