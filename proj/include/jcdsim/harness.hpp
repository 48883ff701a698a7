#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jcdsim/channel.hpp"
#include "jcdsim/coding.hpp"
#include "jcdsim/flops.hpp"
#include "jcdsim/jcd.hpp"

namespace jcdsim {

struct SystemConfig {
  int n_rx = 4;
  int n_tx = 4;
  int n_subcarriers = 128;
  int n_pilots = 16;
  int mod_order = 4;
  double rho = 0.0;
  std::vector<double> snr_grid_db = {16.0};
  bool grid_is_ebn0 = false;
  bool coded = false;
  double velocity_kmh = 0.0;
  double carrier_hz = 3.5e9;
  double subcarrier_spacing_hz = 15e3;
  int n_symbols = 14;         // time-varying frame length
  int n_pilot_symbols = 14;   // pilot-bearing symbols within it
  double delay_spread_ns = 200.0;
  std::string pdp_file;

  bool time_varying() const { return velocity_kmh > 0.0; }
  void validate() const;
};

struct ExperimentSpec {
  SystemConfig system;
  JcdConfig jcd;
  int trials = 200;
  std::uint64_t base_seed = 1;

  void validate() const;
};

struct TrialRecord {
  double snr_db = 0.0;  // grid value as specified (SNR or Eb/N0)
  int layer = 0;
  std::string estimator;
  double mse = 0.0;
  double ber = 0.0;
  long long bit_count = 0;
  long long error_count = 0;
  std::uint64_t flops = 0;
  std::uint64_t seed = 0;
};

// (1 / (2 N_test n_rx n_tx (K-P))) * sum_i ||hhat_i - h_i||^2
double mse_metric(const std::vector<arma::cx_cube>& estimates,
                  const std::vector<arma::cx_cube>& truths);

// Per-receive-antenna noise variance for a total-SNR operating point:
// sigma2 = n_tx * E_s / 10^(snr/10).
double noise_variance(double snr_db, int n_tx);

// Grid value -> per-receive-antenna SNR in dB, honoring grid_is_ebn0.
double operating_snr_db(const SystemConfig& sys, double grid_value_db);

struct ExperimentResult {
  std::vector<TrialRecord> records;
  double wall_seconds = 0.0;
};

// Monte Carlo sweep over the SNR grid. Deterministic in base_seed: trial r
// reuses seed base_seed + r at every grid point, so comparisons across SNR
// (and across estimator settings at fixed seed) are paired.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Writes results.csv (fixed column order) and manifest.json under out_dir.
void emit_results(const ExperimentResult& result, const ExperimentSpec& spec,
                  const std::string& out_dir);

std::string records_to_csv(const std::vector<TrialRecord>& records);

// key = value file mirroring ExperimentSpec; '#' comments; unknown keys rejected.
ExperimentSpec parse_config_file(const std::string& path);
void apply_config_line(ExperimentSpec& spec, const std::string& key, const std::string& value);

Constellation constellation_for(const SystemConfig& sys);
CovarianceModel covariance_for(const SystemConfig& sys);

}  // namespace jcdsim
