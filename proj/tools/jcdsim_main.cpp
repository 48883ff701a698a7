#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "jcdsim/harness.hpp"
#include "jcdsim/rng.hpp"

namespace {

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int trials,
                 long long seed, const std::string& estimator, int layers, bool coded) {
  jcdsim::ExperimentSpec spec = jcdsim::parse_config_file(config_path);
  if (trials > 0) spec.trials = trials;
  if (seed >= 0) spec.base_seed = static_cast<std::uint64_t>(seed);
  if (!estimator.empty()) jcdsim::apply_config_line(spec, "estimator", estimator);
  if (layers > 0) spec.jcd.layers = layers;
  if (coded) spec.system.coded = true;

  jcdsim::ExperimentResult result = jcdsim::run_experiment(spec);
  jcdsim::emit_results(result, spec, out_dir);

  // per-(snr, layer) summary on stdout
  struct Agg {
    double mse = 0.0;
    long long bits = 0, errors = 0;
    int n = 0;
  };
  std::map<std::pair<double, int>, Agg> agg;
  std::map<std::pair<double, int>, std::string> names;
  for (const auto& r : result.records) {
    auto key = std::make_pair(r.snr_db, r.layer);
    auto& a = agg[key];
    a.mse += r.mse;
    a.bits += r.bit_count;
    a.errors += r.error_count;
    ++a.n;
    names[key] = r.estimator;
  }
  std::printf("%10s %6s %16s %12s %12s\n", "snr_db", "layer", "estimator", "mse", "ber");
  for (const auto& [key, a] : agg) {
    std::printf("%10.2f %6d %16s %12.4e %12.4e\n", key.first, key.second, names[key].c_str(),
                a.mse / a.n, a.bits > 0 ? double(a.errors) / double(a.bits) : 0.0);
  }
  std::printf("wrote %s/results.csv (%zu records, %.1fs)\n", out_dir.c_str(),
              result.records.size(), result.wall_seconds);
  return 0;
}

int cmd_flops(int nr, int nt, int k, int p) {
  using jcdsim::EstimatorKind;
  for (auto kind : {EstimatorKind::Traditional, EstimatorKind::Mjcd, EstimatorKind::Ojcd}) {
    auto fb = jcdsim::flop_breakdown(kind, nr, nt, k, p);
    std::printf("%-12s total=%.3e  statistics=%.3e  solve=%.3e  apply=%.3e", jcdsim::estimator_name(kind),
                double(fb.total()), double(fb.statistics), double(fb.solve), double(fb.apply));
    if (fb.excluded_weight_factorization > 0) {
      std::printf("  weight_factorization=%.3e (reported separately)",
                  double(fb.excluded_weight_factorization));
    }
    std::printf("\n");
  }
  auto mjcd = jcdsim::flop_count(EstimatorKind::Mjcd, nr, nt, k, p);
  auto ojcd = jcdsim::flop_count(EstimatorKind::Ojcd, nr, nt, k, p);
  std::printf("ojcd/mjcd ratio = %.3e\n", double(ojcd) / double(mjcd));
  return 0;
}

int cmd_selftest();

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO-OFDM joint channel estimation and detection simulator"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment");
  std::string config_path, out_dir = "out", estimator;
  int trials = -1, layers = -1;
  long long seed = -1;
  bool coded = false;
  sim->add_option("--config", config_path, "experiment config file")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--trials", trials, "override trial count");
  sim->add_option("--seed", seed, "override base seed");
  sim->add_option("--estimator", estimator, "mjcd|ojcd");
  sim->add_option("--layers", layers, "override layer count");
  sim->add_flag("--coded", coded, "enable the convolutional coding chain");

  auto* fl = app.add_subcommand("flops", "print analytical complexity counts");
  int nr = 4, nt = 4, k = 128, p = 8;
  fl->add_option("--nr", nr, "receive antennas");
  fl->add_option("--nt", nt, "transmit antennas");
  fl->add_option("--k", k, "subcarriers");
  fl->add_option("--p", p, "pilot subcarriers");

  auto* st = app.add_subcommand("selftest", "run the built-in property suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, trials, seed, estimator, layers, coded);
    if (fl->parsed()) return cmd_flops(nr, nt, k, p);
    if (st->parsed()) return cmd_selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

namespace {

int cmd_selftest() {
  using namespace jcdsim;
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
  };

  {  // pilot orthogonality across random shapes
    Rng rng(7);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
      int p = 2 + int(rng.uniform_int(31));
      int nt = 1 + int(rng.uniform_int(std::uint64_t(p)));
      arma::cx_mat s = generate_orthogonal_pilots(nt, p, 0);
      arma::cx_mat gram = s.t() * s;
      gram.diag().zeros();
      ok = arma::abs(gram).max() <= 1e-10 * p;
    }
    check("pilot sequences orthogonal", ok);
  }
  {  // covariance factors Hermitian and PSD
    Rng rng(8);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
      int taps = 1 + int(rng.uniform_int(6));
      PowerDelayProfile pdp;
      double delay = 0.0;
      for (int t = 0; t < taps; ++t) {
        pdp.taps.push_back({delay, 0.1 + rng.uniform()});
        delay += 20e-9 + 200e-9 * rng.uniform();
      }
      double total = 0.0;
      for (auto& t : pdp.taps) total += t.power;
      for (auto& t : pdp.taps) t.power /= total;
      int k = 4 + int(rng.uniform_int(13));
      arma::cx_mat r = freq_corr_from_pdp(pdp, k, 15e3);
      arma::vec eig;
      arma::eig_sym(eig, r);
      ok = arma::norm(arma::cx_mat(r - r.t()), "fro") <= 1e-12 * k && eig.min() >= -1e-9;
    }
    check("frequency correlation Hermitian PSD", ok);
  }
  {  // detector site precisions stay positive
    Rng rng(9);
    Constellation c = make_constellation(4);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
      int nt = 2 + int(rng.uniform_int(3));
      int nrr = nt + int(rng.uniform_int(3));
      arma::cx_mat h(nrr, nt);
      for (auto& z : h) z = rng.cgaussian();
      arma::cx_vec x(nt);
      for (int n = 0; n < nt; ++n) x[n] = c.points[rng.uniform_int(4)];
      double sigma2 = 0.02 + rng.uniform();
      arma::cx_vec y = h * x + std::sqrt(sigma2) * rng.cgaussian_vec(nrr);
      EpTrace tr = ep_detect_trace(h, y, sigma2, 5, 0.2, c);
      for (const auto& lam : tr.lambda_history) ok = ok && lam.min() > 0.0;
    }
    check("detector precisions positive", ok);
  }
  {  // spline reproduces linear series exactly
    Rng rng(10);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
      int np = 2 + int(rng.uniform_int(13));
      std::vector<int> pos = pilot_symbol_positions(np, 14);
      if (int(pos.size()) == 14) continue;
      double a = rng.gaussian(), b = rng.gaussian();
      std::vector<arma::cx_cube> knots;
      for (int t : pos) {
        arma::cx_cube cube(1, 1, 1);
        cube(0, 0, 0) = std::complex<double>(a * t + b, -a * t);
        knots.push_back(cube);
      }
      auto full = time_interpolate(knots, pos, 14);
      for (int t = 0; t < 14; ++t) {
        ok = ok && std::abs(full[t](0, 0, 0) - std::complex<double>(a * t + b, -a * t)) < 1e-9;
      }
    }
    check("spline exact on linear series", ok);
  }
  if (failures == 0) {
    std::printf("selftest: all suites passed\n");
  } else {
    std::printf("selftest: %d suite(s) failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
