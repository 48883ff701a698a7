#include <doctest.h>

#include <set>

#include "jcdsim/frame.hpp"
#include "jcdsim/ordering.hpp"
#include "jcdsim/rng.hpp"

using namespace jcdsim;

TEST_SUITE_BEGIN("frame");

TEST_CASE("pilot pattern: comb layout") {
  auto p = build_pilot_pattern(128, 8);
  REQUIRE(p.pilot_indices.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(p.pilot_indices[i] == 16 * i);

  auto p2 = build_pilot_pattern(128, 16);
  for (int i = 0; i < 16; ++i) CHECK(p2.pilot_indices[i] == 8 * i);

  // non-divisible K/P: spacing floor(K/P), trailing subcarriers all data
  auto p3 = build_pilot_pattern(12, 5);
  CHECK(p3.pilot_indices == std::vector<int>{0, 2, 4, 6, 8});
  CHECK(p3.data_indices == std::vector<int>{1, 3, 5, 7, 9, 10, 11});

  CHECK_THROWS_AS(build_pilot_pattern(8, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_pilot_pattern(8, 9), std::invalid_argument);
}

TEST_CASE("pilot pattern: partition covers all subcarriers") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    int k = 2 + int(rng.uniform_int(200));
    int p = 1 + int(rng.uniform_int(arma::uword(k)));
    auto pat = build_pilot_pattern(k, p);
    std::vector<bool> seen(k, false);
    for (int idx : pat.pilot_indices) seen[idx] = true;
    for (int idx : pat.data_indices) {
      CHECK(!seen[idx]);
      seen[idx] = true;
    }
    for (bool s : seen) CHECK(s);
  }
}

TEST_CASE("orthogonal pilots: fixed examples") {
  auto s2 = generate_orthogonal_pilots(2, 2, 0);
  CHECK(std::abs(s2(0, 0) - std::complex<double>(1, 0)) < 1e-12);
  CHECK(std::abs(s2(1, 0) - std::complex<double>(1, 0)) < 1e-12);
  CHECK(std::abs(s2(0, 1) - std::complex<double>(1, 0)) < 1e-12);
  CHECK(std::abs(s2(1, 1) - std::complex<double>(-1, 0)) < 1e-12);

  auto s48 = generate_orthogonal_pilots(4, 8, 0);
  arma::cx_mat gram = s48.t() * s48;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) {
        CHECK(std::abs(gram(i, j) - std::complex<double>(8, 0)) < 1e-12);
      } else {
        CHECK(std::abs(gram(i, j)) < 1e-12);
      }
    }
  }

  auto s44 = generate_orthogonal_pilots(4, 4, 0);
  arma::cx_mat g44 = s44.t() * s44;
  g44.diag().zeros();
  CHECK(arma::abs(g44).max() < 1e-12);

  CHECK_THROWS_AS(generate_orthogonal_pilots(5, 4, 0), std::invalid_argument);
}

TEST_CASE("orthogonal pilots: property over random shapes") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    int p = 1 + int(rng.uniform_int(40));
    int nt = 1 + int(rng.uniform_int(arma::uword(p)));
    arma::cx_mat s = generate_orthogonal_pilots(nt, p, i);
    for (auto& z : s) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);  // unit modulus
    arma::cx_mat gram = s.t() * s;
    gram.diag().zeros();
    CHECK(arma::abs(gram).max() < 1e-10);
  }
}

TEST_CASE("modulate: declared Gray maps") {
  auto qpsk = make_constellation(4);
  const double s = 1.0 / std::sqrt(2.0);
  arma::cx_vec m = modulate({0, 0, 1, 1, 0, 1, 1, 0}, qpsk);
  CHECK(std::abs(m[0] - std::complex<double>(s, s)) < 1e-12);
  CHECK(std::abs(m[1] - std::complex<double>(-s, -s)) < 1e-12);
  CHECK(std::abs(m[2] - std::complex<double>(s, -s)) < 1e-12);
  CHECK(std::abs(m[3] - std::complex<double>(-s, s)) < 1e-12);
  CHECK_THROWS_AS(modulate({0, 1, 0}, qpsk), std::invalid_argument);
}

TEST_CASE("constellations: normalization and Gray property") {
  for (int order : {4, 16}) {
    auto c = make_constellation(order);
    CHECK(std::abs(arma::mean(c.points)) < 1e-12);
    double energy = 0.0;
    for (auto z : c.points) energy += std::norm(z);
    CHECK(energy / order == doctest::Approx(1.0).epsilon(1e-12));

    // full alphabet modulated once has unit average energy
    std::vector<int> all_bits;
    for (const auto& label : c.bit_labels) all_bits.insert(all_bits.end(), label.begin(), label.end());
    arma::cx_vec sym = modulate(all_bits, c);
    double e2 = 0.0;
    for (auto z : sym) e2 += std::norm(z);
    CHECK(e2 / order == doctest::Approx(1.0).epsilon(1e-12));

    // labels are a bijection
    std::set<std::vector<int>> labels(c.bit_labels.begin(), c.bit_labels.end());
    CHECK(int(labels.size()) == order);

    // nearest geometric neighbors differ in exactly one bit
    for (arma::uword a = 0; a < c.points.n_elem; ++a) {
      double dmin = arma::datum::inf;
      for (arma::uword b = 0; b < c.points.n_elem; ++b) {
        if (a != b) dmin = std::min(dmin, std::abs(c.points[a] - c.points[b]));
      }
      for (arma::uword b = 0; b < c.points.n_elem; ++b) {
        if (a == b || std::abs(c.points[a] - c.points[b]) > dmin + 1e-9) continue;
        int diff = 0;
        for (std::size_t bit = 0; bit < c.bit_labels[a].size(); ++bit) {
          diff += c.bit_labels[a][bit] != c.bit_labels[b][bit];
        }
        CHECK(diff == 1);
      }
    }
  }
}

TEST_CASE("modulate / hard_demap round trip") {
  Rng rng(3);
  for (int order : {4, 16}) {
    auto c = make_constellation(order);
    auto bits = rng.bits(std::size_t(c.bits_per_symbol()) * 500);
    CHECK(hard_demap(modulate(bits, c), c) == bits);
  }
}

TEST_CASE("per-subcarrier view matches the per-antenna receive equation") {
  Rng rng(4);
  const int n_rx = 2, n_tx = 2, k = 12, p = 4;
  auto pattern = build_pilot_pattern(k, p);
  auto pilots = generate_orthogonal_pilots(n_tx, p, 0);
  auto c = make_constellation(4);
  auto frame = build_frame(pattern, pilots, rng.bits(std::size_t(n_tx) * pattern.n_data() * 2), c);

  ChannelRealization chan;
  chan.cfr.set_size(n_rx, n_tx, k);
  for (auto& z : chan.cfr) z = rng.cgaussian();

  // noiseless per-antenna data blocks
  arma::cx_mat y(pattern.n_data(), n_rx, arma::fill::zeros);
  for (int m = 0; m < n_rx; ++m)
    for (int kk = 0; kk < pattern.n_data(); ++kk)
      for (int n = 0; n < n_tx; ++n)
        y(kk, m) += frame.data_blocks(kk, n) * chan.cfr(m, n, pattern.data_indices[kk]);

  for (int kk = 0; kk < pattern.n_data(); ++kk) {
    auto [h, x] = per_subcarrier_system(frame, chan, pattern.data_indices[kk]);
    arma::cx_vec reassembled = h * x;
    for (int m = 0; m < n_rx; ++m) CHECK(std::abs(reassembled[m] - y(kk, m)) < 1e-12);
  }

  // flat channel: equivalent matrix is all ones
  ChannelRealization flat;
  flat.cfr.set_size(n_rx, n_tx, k);
  flat.cfr.ones();
  auto [h1, x1] = per_subcarrier_system(frame, flat, pattern.data_indices[0]);
  CHECK(arma::abs(arma::cx_mat(h1 - arma::ones<arma::cx_mat>(n_rx, n_tx))).max() < 1e-15);
  CHECK(int(x1.n_elem) == n_tx);

  CHECK_THROWS_AS(per_subcarrier_system(frame, chan, pattern.pilot_indices[0]), std::invalid_argument);
}

TEST_SUITE_END();
