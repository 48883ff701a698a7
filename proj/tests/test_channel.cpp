#include <doctest.h>

#include <fstream>

#include "jcdsim/channel.hpp"
#include "jcdsim/linalg.hpp"
#include "jcdsim/rng.hpp"
#include "oracles.hpp"

using namespace jcdsim;

TEST_SUITE_BEGIN("channel");

TEST_CASE("exponential correlation matrix") {
  arma::mat i3 = exp_corr_matrix(3, 0.0);
  CHECK(arma::norm(i3 - arma::eye(3, 3), "fro") < 1e-15);

  arma::mat r2 = exp_corr_matrix(2, 0.5);
  CHECK(r2(0, 0) == doctest::Approx(1.0));
  CHECK(r2(0, 1) == doctest::Approx(0.5));
  CHECK(r2(1, 0) == doctest::Approx(0.5));

  arma::mat r3 = exp_corr_matrix(3, 0.5);
  CHECK(r3(0, 0) == doctest::Approx(1.0));
  CHECK(r3(0, 1) == doctest::Approx(0.5));
  CHECK(r3(0, 2) == doctest::Approx(0.25));

  CHECK_THROWS_AS(exp_corr_matrix(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(exp_corr_matrix(3, -0.1), std::invalid_argument);
}

TEST_CASE("frequency correlation from profile") {
  PowerDelayProfile single{{{0.0, 1.0}}};
  arma::cx_mat r = freq_corr_from_pdp(single, 6, 15e3);
  CHECK(arma::abs(arma::cx_mat(r - arma::ones<arma::cx_mat>(6, 6))).max() < 1e-14);

  // two equal taps at delays 0 and tau: |R[k,l]| = |cos(pi df (k-l) tau)|
  const double tau = 400e-9, df = 15e3;
  PowerDelayProfile two{{{0.0, 0.5}, {tau, 0.5}}};
  arma::cx_mat r2 = freq_corr_from_pdp(two, 8, df);
  for (int k = 0; k < 8; ++k) {
    for (int l = 0; l < 8; ++l) {
      double expect = std::abs(std::cos(arma::datum::pi * df * (k - l) * tau));
      CHECK(std::abs(r2(k, l)) == doctest::Approx(expect).epsilon(1e-12));
      if (k == l) CHECK(r2(k, l).real() == doctest::Approx(1.0));
    }
  }

  PowerDelayProfile empty;
  CHECK_THROWS_AS(freq_corr_from_pdp(empty, 4, 15e3), std::invalid_argument);
}

TEST_CASE("embedded TDL-C profile") {
  auto pdp = PowerDelayProfile::tdl_c(200e-9);
  CHECK(pdp.taps.size() == 24);
  double total = 0.0, prev = -1.0;
  for (const auto& t : pdp.taps) {
    CHECK(t.power > 0.0);
    CHECK(t.delay_s >= prev);
    prev = t.delay_s;
    total += t.power;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pdp.taps.back().delay_s == doctest::Approx(8.6523 * 200e-9));
}

TEST_CASE("profile file loading") {
  const char* path = "/tmp/jcdsim_test_pdp.txt";
  {
    std::ofstream f(path);
    f << "# delay_ns power_db\n0 0\n100 -3\n300 -6  # last tap\n";
  }
  auto pdp = PowerDelayProfile::from_file(path);
  REQUIRE(pdp.taps.size() == 3);
  CHECK(pdp.taps[1].delay_s == doctest::Approx(100e-9));
  const double lin = 1.0 + std::pow(10.0, -0.3) + std::pow(10.0, -0.6);
  CHECK(pdp.taps[0].power == doctest::Approx(1.0 / lin));
  CHECK_THROWS(PowerDelayProfile::from_file("/nonexistent/pdp.txt"));
}

TEST_CASE("assembled covariance: structure and PSD") {
  auto pdp = PowerDelayProfile::tdl_c(200e-9);

  // rho=0, single tap at 0: data-block covariance is I kron ones
  PowerDelayProfile flat{{{0.0, 1.0}}};
  auto cov0 = assemble_covariance(flat, 8, 2, 2, 2, 0.0, 15e3);
  arma::cx_mat chh = cov0.chh_dense();
  arma::cx_mat expected = arma::kron(oracles::to_cx(arma::eye(4, 4)), arma::ones<arma::cx_mat>(6, 6));
  CHECK(arma::abs(arma::cx_mat(chh - expected)).max() < 1e-12);

  // diagonal sub-block equals the frequency factor at rho=0
  auto covr = assemble_covariance(pdp, 16, 4, 2, 2, 0.0, 15e3);
  CHECK(oracles::rel_fro(covr.sub_dd(0, 0), covr.freq_dd()) < 1e-14);
  CHECK(arma::abs(covr.sub_dd(0, 1)).max() < 1e-14);  // cross block vanishes

  // Table II profile at K=128: PSD within the eigenvalue floor
  auto cov128 = assemble_covariance(pdp, 128, 16, 4, 4, 0.5, 15e3);
  arma::vec eig;
  arma::eig_sym(eig, cov128.r_freq());
  CHECK(eig.min() >= -1e-9);
  CHECK(arma::norm(arma::cx_mat(cov128.r_freq() - cov128.r_freq().t()), "fro") < 1e-12);
  for (int i = 0; i < 128; ++i) CHECK(cov128.r_freq()(i, i).real() == doctest::Approx(1.0));

  // chh_dense equals kron(R_r, R_t, R_freq[dd]) on a small instance
  auto covs = assemble_covariance(pdp, 8, 2, 2, 3, 0.4, 15e3);
  arma::cx_mat full = arma::kron(oracles::to_cx(arma::kron(covs.r_rx(), covs.r_tx())), covs.freq_dd());
  CHECK(oracles::rel_fro(covs.chh_dense(), full) < 1e-14);
}

TEST_CASE("channel sampling: determinism and degenerate correlation") {
  auto pdp = PowerDelayProfile::tdl_c(200e-9);
  auto cov = assemble_covariance(pdp, 16, 4, 2, 2, 0.3, 15e3);

  auto h1 = sample_channel(cov, 1234);
  auto h2 = sample_channel(cov, 1234);
  CHECK(arma::abs(arma::cx_cube(h1.cfr - h2.cfr)).max() == 0.0);  // bit identical
  auto h3 = sample_channel(cov, 1235);
  CHECK(arma::abs(arma::cx_cube(h1.cfr - h3.cfr)).max() > 0.0);

  // rank-1 frequency correlation: constant CFR across subcarriers
  PowerDelayProfile flat{{{0.0, 1.0}}};
  auto cov_flat = assemble_covariance(flat, 12, 3, 2, 2, 0.0, 15e3);
  auto hf = sample_channel(cov_flat, 7);
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n)
      for (int k = 1; k < 12; ++k) CHECK(std::abs(hf.cfr(m, n, k) - hf.cfr(m, n, 0)) < 1e-9);
}

TEST_CASE("channel sampling: empirical covariance matches the model") {
  auto pdp = PowerDelayProfile::tdl_c(200e-9);
  auto cov = assemble_covariance(pdp, 8, 2, 2, 2, 0.5, 15e3);
  const int n_rx = 2, n_tx = 2, k = 8;
  const arma::uword dim = n_rx * n_tx * k;

  arma::cx_mat target = arma::kron(oracles::to_cx(arma::kron(cov.r_rx(), cov.r_tx())), cov.r_freq());
  arma::cx_mat acc(dim, dim, arma::fill::zeros);
  const int samples = 100000;
  for (int s = 0; s < samples; ++s) {
    auto h = sample_channel(cov, 50000 + s);
    arma::cx_vec v(dim);
    arma::uword i = 0;
    for (int m = 0; m < n_rx; ++m)
      for (int n = 0; n < n_tx; ++n)
        for (int kk = 0; kk < k; ++kk) v[i++] = h.cfr(m, n, kk);
    acc += v * v.t();
  }
  acc /= samples;
  CHECK(oracles::rel_fro(acc, target) < 0.03);
}

TEST_CASE("doppler from velocity") {
  CHECK(doppler_from_velocity(300.0, 3.5e9) == doctest::Approx(972.2).epsilon(1e-3));
  CHECK(doppler_from_velocity(0.0, 3.5e9) == 0.0);
}

TEST_CASE("time-varying evolution") {
  auto pdp = PowerDelayProfile::tdl_c(200e-9);
  auto cov = assemble_covariance(pdp, 8, 2, 2, 2, 0.0, 15e3);
  const double t_sym = 1.0 / 15e3;

  CHECK_THROWS_AS(evolve_time_varying(cov, -1.0, 3.5e9, t_sym, 4, 1), std::invalid_argument);

  // zero velocity: identical CFR at all symbols
  auto h0 = evolve_time_varying(cov, 0.0, 3.5e9, t_sym, 5, 3);
  REQUIRE(h0.n_symbols() == 5);
  for (int t = 1; t < 5; ++t) {
    CHECK(arma::abs(arma::cx_cube(h0.per_symbol[t] - h0.per_symbol[0])).max() < 1e-12);
  }

  // lag-1 empirical temporal correlation tracks the Bessel autocorrelation
  const double v_kmh = 300.0;
  const double f_d = doppler_from_velocity(v_kmh, 3.5e9);
  const double expect = std::cyl_bessel_j(0.0, 2 * arma::datum::pi * f_d * t_sym);
  double num = 0.0, den = 0.0;
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    auto h = evolve_time_varying(cov, v_kmh, 3.5e9, t_sym, 2, 9000 + s);
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        for (int kk = 0; kk < 8; ++kk) {
          num += (h.per_symbol[0](m, n, kk) * std::conj(h.per_symbol[1](m, n, kk))).real();
          den += std::norm(h.per_symbol[0](m, n, kk));
        }
  }
  CHECK(num / den == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("psd square root rejects indefinite input") {
  arma::mat bad = {{1.0, 0.0}, {0.0, -0.5}};
  CHECK_THROWS_AS(psd_sqrt(bad), std::runtime_error);
}

TEST_SUITE_END();
