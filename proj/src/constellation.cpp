#include "jcdsim/constellation.hpp"

#include <stdexcept>

namespace jcdsim {

namespace {

// 2-bit Gray code on the axis levels {+3, +1, -1, -3}
constexpr int kAxisLevels[4] = {3, 1, -1, -3};
constexpr int kAxisBits[4][2] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};

}  // namespace

Constellation make_constellation(int order) {
  Constellation c;
  c.order = order;
  if (order == 4) {
    c.points.set_size(4);
    c.bit_labels.resize(4);
    const double s = 1.0 / std::sqrt(2.0);
    int idx = 0;
    for (int b0 = 0; b0 <= 1; ++b0) {
      for (int b1 = 0; b1 <= 1; ++b1) {
        c.points[idx] = std::complex<double>((1 - 2 * b0) * s, (1 - 2 * b1) * s);
        c.bit_labels[idx] = {b0, b1};
        ++idx;
      }
    }
  } else if (order == 16) {
    c.points.set_size(16);
    c.bit_labels.resize(16);
    const double s = 1.0 / std::sqrt(10.0);
    int idx = 0;
    for (int i = 0; i < 4; ++i) {
      for (int q = 0; q < 4; ++q) {
        c.points[idx] = std::complex<double>(kAxisLevels[i] * s, kAxisLevels[q] * s);
        c.bit_labels[idx] = {kAxisBits[i][0], kAxisBits[i][1], kAxisBits[q][0], kAxisBits[q][1]};
        ++idx;
      }
    }
  } else {
    throw std::invalid_argument("make_constellation: order must be 4 or 16");
  }
  return c;
}

arma::cx_vec modulate(const std::vector<int>& bits, const Constellation& c) {
  const int q = c.bits_per_symbol();
  if (bits.size() % static_cast<std::size_t>(q) != 0) {
    throw std::invalid_argument("modulate: bit count not divisible by bits per symbol");
  }
  const std::size_t n_sym = bits.size() / static_cast<std::size_t>(q);
  arma::cx_vec out(n_sym);
  for (std::size_t s = 0; s < n_sym; ++s) {
    // labels are dense: find the point whose label matches this bit group
    arma::uword match = c.points.n_elem;
    for (arma::uword p = 0; p < c.points.n_elem; ++p) {
      bool ok = true;
      for (int b = 0; b < q; ++b) {
        if (c.bit_labels[p][static_cast<std::size_t>(b)] != bits[s * q + static_cast<std::size_t>(b)]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        match = p;
        break;
      }
    }
    if (match == c.points.n_elem) throw std::invalid_argument("modulate: bits must be 0/1");
    out[s] = c.points[match];
  }
  return out;
}

arma::uword nearest_point(std::complex<double> z, const Constellation& c) {
  arma::uword best = 0;
  double best_d = std::norm(z - c.points[0]);
  for (arma::uword p = 1; p < c.points.n_elem; ++p) {
    double d = std::norm(z - c.points[p]);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

std::vector<int> hard_demap(const arma::cx_vec& symbols, const Constellation& c) {
  const int q = c.bits_per_symbol();
  std::vector<int> bits(symbols.n_elem * static_cast<std::size_t>(q));
  for (arma::uword s = 0; s < symbols.n_elem; ++s) {
    const auto& label = c.bit_labels[nearest_point(symbols[s], c)];
    for (int b = 0; b < q; ++b) bits[s * static_cast<arma::uword>(q) + static_cast<arma::uword>(b)] = label[static_cast<std::size_t>(b)];
  }
  return bits;
}

}  // namespace jcdsim
