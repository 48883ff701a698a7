#include "jcdsim/coding.hpp"

#include <bit>
#include <stdexcept>

namespace jcdsim {

namespace {

inline int parity(unsigned x) { return std::popcount(x) & 1; }

}  // namespace

std::vector<int> conv_encode(const std::vector<int>& bits, const CodeConfig& cfg) {
  if (static_cast<int>(bits.size()) != cfg.block_length) {
    throw std::invalid_argument("conv_encode: input length must equal block_length");
  }
  const unsigned mask = (1u << cfg.constraint_length) - 1;
  std::vector<int> out;
  out.reserve(cfg.coded_length());
  unsigned reg = 0;
  auto push = [&](int bit) {
    reg = ((reg << 1) | unsigned(bit)) & mask;
    out.push_back(parity(reg & cfg.generators[0]));
    out.push_back(parity(reg & cfg.generators[1]));
  };
  for (int b : bits) push(b);
  for (int i = 0; i < cfg.constraint_length - 1; ++i) push(0);  // zero tail
  return out;
}

arma::vec demap_llr(std::complex<double> x_e, double v_e, const Constellation& c) {
  if (v_e <= 0.0) throw std::invalid_argument("demap_llr: variance must be positive");
  const int q = c.bits_per_symbol();
  const arma::uword n = c.points.n_elem;
  arma::vec metric(n);  // -|x_e - s|^2 / v_e, shifted by the max for stability
  for (arma::uword s = 0; s < n; ++s) metric[s] = -std::norm(x_e - c.points[s]) / v_e;
  const double shift = metric.max();

  arma::vec llr(q);
  for (int b = 0; b < q; ++b) {
    double p0 = 0.0, p1 = 0.0;
    for (arma::uword s = 0; s < n; ++s) {
      double w = std::exp(metric[s] - shift);
      if (c.bit_labels[s][b] == 0) {
        p0 += w;
      } else {
        p1 += w;
      }
    }
    llr[b] = std::log(p0) - std::log(p1);
  }
  return llr;
}

arma::vec demap_llr(const arma::cx_mat& x_e, const arma::mat& v_e, const Constellation& c) {
  const int d = x_e.n_rows, n_tx = x_e.n_cols, q = c.bits_per_symbol();
  if (v_e.n_rows != x_e.n_rows || v_e.n_cols != x_e.n_cols) {
    throw std::invalid_argument("demap_llr: moment shapes differ");
  }
  arma::vec out(arma::uword(d) * n_tx * q);
  arma::uword pos = 0;
  for (int n = 0; n < n_tx; ++n) {
    for (int k = 0; k < d; ++k) {
      arma::vec l = demap_llr(x_e(k, n), v_e(k, n), c);
      for (int b = 0; b < q; ++b) out[pos++] = l[b];
    }
  }
  return out;
}

std::vector<int> viterbi_decode(const arma::vec& llrs, const CodeConfig& cfg) {
  if (static_cast<int>(llrs.n_elem) != cfg.coded_length()) {
    throw std::invalid_argument("viterbi_decode: LLR length must equal coded_length");
  }
  if (cfg.constraint_length < 3 || cfg.constraint_length > 8) {
    throw std::invalid_argument("viterbi_decode: constraint length out of supported range");
  }
  const int n_states = cfg.n_states();
  const int steps = cfg.block_length + cfg.constraint_length - 1;
  const unsigned mask = (1u << cfg.constraint_length) - 1;
  const double kNegInf = -arma::datum::inf;

  // branch outputs per (state, input bit)
  std::vector<std::array<double, 2>> out_sign(std::size_t(n_states) * 2);
  std::vector<int> next_state(std::size_t(n_states) * 2);
  for (int s = 0; s < n_states; ++s) {
    for (int b = 0; b < 2; ++b) {
      unsigned reg = ((unsigned(s) << 1) | unsigned(b)) & mask;
      out_sign[std::size_t(s) * 2 + b] = {parity(reg & cfg.generators[0]) ? -1.0 : 1.0,
                                          parity(reg & cfg.generators[1]) ? -1.0 : 1.0};
      next_state[std::size_t(s) * 2 + b] = int(reg) & (n_states - 1);
    }
  }

  std::vector<double> metric(n_states, kNegInf), metric_next(n_states);
  metric[0] = 0.0;  // encoder starts in the all-zero state
  std::vector<std::uint8_t> decisions(std::size_t(steps) * n_states);

  for (int t = 0; t < steps; ++t) {
    const double l0 = 0.5 * llrs[2 * t];
    const double l1 = 0.5 * llrs[2 * t + 1];
    std::fill(metric_next.begin(), metric_next.end(), kNegInf);
    std::vector<std::uint8_t> in_bit(n_states, 0);
    std::vector<int> prev(n_states, -1);
    for (int s = 0; s < n_states; ++s) {
      if (metric[s] == kNegInf) continue;
      for (int b = 0; b < 2; ++b) {
        const auto& sg = out_sign[std::size_t(s) * 2 + b];
        double m = metric[s] + sg[0] * l0 + sg[1] * l1;
        int ns = next_state[std::size_t(s) * 2 + b];
        if (m > metric_next[ns]) {
          metric_next[ns] = m;
          in_bit[ns] = std::uint8_t(b);
          prev[ns] = s;
        }
      }
    }
    for (int s = 0; s < n_states; ++s) {
      decisions[std::size_t(t) * n_states + s] =
          std::uint8_t((in_bit[s] & 1u) | (prev[s] >= 0 ? unsigned(prev[s]) << 1 : 0u));
    }
    metric.swap(metric_next);
  }

  // zero tail: terminate in state 0 when reachable
  int state = 0;
  if (metric[0] == kNegInf) {
    state = int(std::max_element(metric.begin(), metric.end()) - metric.begin());
  }
  std::vector<int> decoded(steps);
  for (int t = steps - 1; t >= 0; --t) {
    unsigned d = decisions[std::size_t(t) * n_states + state];
    decoded[t] = int(d & 1u);
    state = int(d >> 1);
  }
  decoded.resize(cfg.block_length);  // drop the flush bits
  return decoded;
}

double snr_db_from_ebn0(double ebn0_db, int bits_per_symbol, double code_rate, int n_tx) {
  return ebn0_db + 10.0 * std::log10(double(bits_per_symbol) * code_rate * double(n_tx));
}

double uncoded_ebn0_db(double coded_ebn0_db) {
  return coded_ebn0_db + 10.0 * std::log10(2.0);
}

}  // namespace jcdsim
