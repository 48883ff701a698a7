#include "jcdsim/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "jcdsim/ordering.hpp"
#include "jcdsim/rng.hpp"

namespace jcdsim {

namespace {

constexpr const char* kVersion = "jcdsim 1.0";

std::uint64_t mix_seed(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t trial_seed, std::uint64_t stream, std::uint64_t index = 0) {
  return mix_seed(trial_seed ^ (stream * 0xd1342543de82ef95ull) ^ (index * 0xaf251af3b0f025b5ull));
}

}  // namespace

void SystemConfig::validate() const {
  if (n_rx < 1 || n_tx < 1) throw std::invalid_argument("config: antenna counts must be positive");
  if (n_pilots < 1 || n_pilots >= n_subcarriers) {
    throw std::invalid_argument("config: need 1 <= pilots < subcarriers");
  }
  if (n_tx > n_pilots) throw std::invalid_argument("config: orthogonal pilots need pilots >= n_tx");
  if (mod_order != 4 && mod_order != 16) throw std::invalid_argument("config: modulation must be qpsk or 16qam");
  if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("config: rho must be in [0, 1)");
  if (snr_grid_db.empty()) throw std::invalid_argument("config: empty SNR grid");
  if (velocity_kmh < 0.0) throw std::invalid_argument("config: negative velocity");
  if (time_varying()) {
    if (n_symbols < 1 || n_pilot_symbols < 1 || n_pilot_symbols > n_symbols) {
      throw std::invalid_argument("config: pilot symbol count out of range");
    }
    if (n_pilot_symbols < 2 && n_pilot_symbols != n_symbols) {
      throw std::invalid_argument("config: time interpolation needs at least two pilot-bearing symbols");
    }
  }
}

void ExperimentSpec::validate() const {
  system.validate();
  jcd.validate();
  if (trials < 1) throw std::invalid_argument("config: trials must be positive");
}

double mse_metric(const std::vector<arma::cx_cube>& estimates,
                  const std::vector<arma::cx_cube>& truths) {
  if (estimates.size() != truths.size() || estimates.empty()) {
    throw std::invalid_argument("mse_metric: need matching nonempty sets");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].n_rows != truths[i].n_rows || estimates[i].n_cols != truths[i].n_cols ||
        estimates[i].n_slices != truths[i].n_slices) {
      throw std::invalid_argument("mse_metric: shape mismatch");
    }
    acc += arma::accu(arma::square(arma::abs(arma::cx_cube(estimates[i] - truths[i]))));
  }
  const auto& t = truths.front();
  return acc / (2.0 * double(estimates.size()) * double(t.n_rows) * double(t.n_cols) * double(t.n_slices));
}

double noise_variance(double snr_db, int n_tx) {
  return double(n_tx) / std::pow(10.0, snr_db / 10.0);
}

double operating_snr_db(const SystemConfig& sys, double grid_value_db) {
  if (!sys.grid_is_ebn0) return grid_value_db;
  const int bps = sys.mod_order == 4 ? 2 : 4;
  const double rate = sys.coded ? 0.5 : 1.0;
  return snr_db_from_ebn0(grid_value_db, bps, rate, sys.n_tx);
}

Constellation constellation_for(const SystemConfig& sys) { return make_constellation(sys.mod_order); }

CovarianceModel covariance_for(const SystemConfig& sys) {
  PowerDelayProfile pdp = sys.pdp_file.empty()
                              ? PowerDelayProfile::tdl_c(sys.delay_spread_ns * 1e-9)
                              : PowerDelayProfile::from_file(sys.pdp_file);
  return assemble_covariance(pdp, sys.n_subcarriers, sys.n_pilots, sys.n_tx, sys.n_rx, sys.rho,
                             sys.subcarrier_spacing_hz);
}

namespace {

ReceivedFrame transmit(const Frame& frame, const arma::cx_cube& cfr, const PilotPattern& pattern,
                       double sigma, Rng& noise, bool with_pilots) {
  const int n_rx = cfr.n_rows, n_tx = cfr.n_cols;
  const int p = pattern.n_pilots, d = pattern.n_data();
  ReceivedFrame rx;
  if (with_pilots) {
    rx.y_pilot.set_size(p, n_tx, n_rx);
    for (int m = 0; m < n_rx; ++m) {
      for (int n = 0; n < n_tx; ++n) {
        for (int j = 0; j < p; ++j) {
          rx.y_pilot(j, n, m) = frame.pilot_blocks(j, n) * cfr(m, n, pattern.pilot_indices[j]) +
                                sigma * noise.cgaussian();
        }
      }
    }
  }
  rx.y_data.set_size(d, n_rx);
  for (int m = 0; m < n_rx; ++m) {
    for (int k = 0; k < d; ++k) {
      std::complex<double> acc = sigma * noise.cgaussian();
      for (int n = 0; n < n_tx; ++n) {
        acc += frame.data_blocks(k, n) * cfr(m, n, pattern.data_indices[k]);
      }
      rx.y_data(k, m) = acc;
    }
  }
  return rx;
}

struct TrialContext {
  const ExperimentSpec& spec;
  const CovarianceModel& cov;
  const Constellation& constellation;
  const PilotPattern& pattern;
  const arma::cx_mat& pilots;
};

void run_uncoded_trial(const TrialContext& ctx, double grid_db, std::uint64_t trial_seed,
                       std::vector<TrialRecord>& records) {
  const SystemConfig& sys = ctx.spec.system;
  const double sigma2 = noise_variance(operating_snr_db(sys, grid_db), sys.n_tx);
  const double sigma = std::sqrt(sigma2);
  Rng bits_rng(stream_seed(trial_seed, 1));
  Rng noise_rng(stream_seed(trial_seed, 2));
  const int q = ctx.constellation.bits_per_symbol();
  const std::size_t capacity = std::size_t(sys.n_tx) * ctx.pattern.n_data() * q;

  auto make_record = [&](int layer, const std::string& estimator, double mse, long long errs,
                         long long bits, std::uint64_t flops) {
    TrialRecord r;
    r.snr_db = grid_db;
    r.layer = layer;
    r.estimator = estimator;
    r.mse = mse;
    r.ber = bits > 0 ? double(errs) / double(bits) : 0.0;
    r.bit_count = bits;
    r.error_count = errs;
    r.flops = flops;
    r.seed = trial_seed;
    records.push_back(std::move(r));
  };

  if (!sys.time_varying()) {
    ChannelRealization chan = sample_channel(ctx.cov, stream_seed(trial_seed, 3));
    Frame frame = build_frame(ctx.pattern, ctx.pilots, bits_rng.bits(capacity), ctx.constellation);
    ReceivedFrame rx = transmit(frame, chan.cfr, ctx.pattern, sigma, noise_rng, true);
    FrameTruth truth{&chan, &frame};
    LayerTrace trace = run_jcd(rx, ctx.pilots, ctx.cov, sigma2, ctx.spec.jcd, ctx.constellation, &truth);
    for (std::size_t l = 0; l < trace.layers.size(); ++l) {
      const LayerResult& lr = trace.layers[l];
      make_record(int(l) + 1, lr.estimate.estimator, lr.mse, lr.bit_errors, lr.bits,
                  lr.estimate.flops);
    }
    return;
  }

  const double symbol_duration = 1.0 / sys.subcarrier_spacing_hz;
  ChannelRealization chan = evolve_time_varying(ctx.cov, sys.velocity_kmh, sys.carrier_hz,
                                                symbol_duration, sys.n_symbols,
                                                stream_seed(trial_seed, 3));
  TimeVaryingObservation obs;
  obs.pilot_positions = pilot_symbol_positions(sys.n_pilot_symbols, sys.n_symbols);
  std::vector<Frame> frames(sys.n_symbols);
  for (int t = 0; t < sys.n_symbols; ++t) {
    frames[t] = build_frame(ctx.pattern, ctx.pilots, bits_rng.bits(capacity), ctx.constellation);
    bool has_pilots = std::find(obs.pilot_positions.begin(), obs.pilot_positions.end(), t) !=
                      obs.pilot_positions.end();
    obs.symbols.push_back(transmit(frames[t], chan.at_symbol(t), ctx.pattern, sigma, noise_rng,
                                   has_pilots));
  }
  TimeVaryingTruth truth{&chan, &frames};
  TimeVaryingResult tv = run_jcd_time_varying(obs, ctx.pilots, ctx.cov, sigma2, ctx.spec.jcd,
                                              ctx.constellation, &truth);
  for (std::size_t l = 0; l < tv.layer_mse.size(); ++l) {
    const char* name = l == 0 ? estimator_name(EstimatorKind::Traditional)
                              : estimator_name(ctx.spec.jcd.estimator);
    std::uint64_t fl = l == 0 ? flop_count(EstimatorKind::Traditional, sys.n_rx, sys.n_tx,
                                           sys.n_subcarriers, sys.n_pilots)
                              : flop_count(ctx.spec.jcd.estimator, sys.n_rx, sys.n_tx,
                                           sys.n_subcarriers, sys.n_pilots);
    make_record(int(l) + 1, ctx.spec.jcd.perfect_csi ? "perfect" : name, tv.layer_mse[l],
                tv.layer_bit_errors[l], tv.layer_bits[l], fl);
  }
}

void run_coded_trial(const TrialContext& ctx, double grid_db, std::uint64_t trial_seed,
                     std::vector<TrialRecord>& records) {
  const SystemConfig& sys = ctx.spec.system;
  const double sigma2 = noise_variance(operating_snr_db(sys, grid_db), sys.n_tx);
  const double sigma = std::sqrt(sigma2);
  Rng bits_rng(stream_seed(trial_seed, 1));
  Rng noise_rng(stream_seed(trial_seed, 2));
  const int q = ctx.constellation.bits_per_symbol();
  const std::size_t capacity = std::size_t(sys.n_tx) * ctx.pattern.n_data() * q;

  CodeConfig code;
  std::vector<int> info = bits_rng.bits(code.block_length);
  std::vector<int> coded = conv_encode(info, code);
  const std::size_t coded_len = coded.size();
  const int n_frames = int((coded_len + capacity - 1) / capacity);

  // coded bits fill consecutive frames; the tail is padded with filler bits
  std::vector<int> stream = coded;
  stream.resize(std::size_t(n_frames) * capacity);
  for (std::size_t i = coded_len; i < stream.size(); ++i) stream[i] = bits_rng.bit();

  arma::vec llrs(coded_len);
  double mse_acc = 0.0;
  for (int f = 0; f < n_frames; ++f) {
    std::vector<int> payload(stream.begin() + std::ptrdiff_t(f * capacity),
                             stream.begin() + std::ptrdiff_t((f + 1) * capacity));
    ChannelRealization chan = sample_channel(ctx.cov, stream_seed(trial_seed, 3, f));
    Frame frame = build_frame(ctx.pattern, ctx.pilots, payload, ctx.constellation);
    ReceivedFrame rx = transmit(frame, chan.cfr, ctx.pattern, sigma, noise_rng, true);
    FrameTruth truth{&chan, &frame};
    LayerTrace trace = run_jcd(rx, ctx.pilots, ctx.cov, sigma2, ctx.spec.jcd, ctx.constellation, &truth);
    const LayerResult& fin = trace.final_layer();
    mse_acc += fin.mse;
    arma::vec frame_llrs = demap_llr(fin.x_e, fin.v_e, ctx.constellation);
    const std::size_t base = std::size_t(f) * capacity;
    for (std::size_t i = 0; i < capacity && base + i < coded_len; ++i) {
      llrs[base + i] = frame_llrs[i];
    }
  }
  std::vector<int> decoded = viterbi_decode(llrs, code);
  long long errors = 0;
  for (int i = 0; i < code.block_length; ++i) errors += decoded[i] != info[i];

  TrialRecord r;
  r.snr_db = grid_db;
  r.layer = ctx.spec.jcd.layers;
  r.estimator = std::string(ctx.spec.jcd.perfect_csi
                                ? "perfect"
                                : estimator_name(ctx.spec.jcd.layers == 1 ? EstimatorKind::Traditional
                                                                          : ctx.spec.jcd.estimator)) +
                "+viterbi";
  r.mse = mse_acc / n_frames;
  r.bit_count = code.block_length;
  r.error_count = errors;
  r.ber = double(errors) / double(code.block_length);
  r.flops = flop_count(ctx.spec.jcd.layers == 1 ? EstimatorKind::Traditional : ctx.spec.jcd.estimator,
                       sys.n_rx, sys.n_tx, sys.n_subcarriers, sys.n_pilots);
  r.seed = trial_seed;
  records.push_back(std::move(r));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.system.coded && spec.system.time_varying()) {
    throw std::invalid_argument("run_experiment: coded time-varying runs are driven per symbol; "
                                "use the block-fading coded mode or uncoded time-varying mode");
  }
  const auto t0 = std::chrono::steady_clock::now();

  CovarianceModel cov = covariance_for(spec.system);
  Constellation constellation = constellation_for(spec.system);
  PilotPattern pattern = build_pilot_pattern(spec.system.n_subcarriers, spec.system.n_pilots);
  arma::cx_mat pilots = generate_orthogonal_pilots(spec.system.n_tx, spec.system.n_pilots,
                                                   spec.base_seed);
  TrialContext ctx{spec, cov, constellation, pattern, pilots};

  ExperimentResult result;
  for (double grid_db : spec.system.snr_grid_db) {
    for (int r = 0; r < spec.trials; ++r) {
      const std::uint64_t trial_seed = spec.base_seed + std::uint64_t(r);
      if (spec.system.coded) {
        run_coded_trial(ctx, grid_db, trial_seed, result.records);
      } else {
        run_uncoded_trial(ctx, grid_db, trial_seed, result.records);
      }
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out << "snr_db,layer,estimator,mse,ber,bit_count,error_count,flops,seed\n";
  for (const auto& r : records) {
    out << format_double(r.snr_db) << ',' << r.layer << ',' << r.estimator << ','
        << format_double(r.mse) << ',' << format_double(r.ber) << ',' << r.bit_count << ','
        << r.error_count << ',' << r.flops << ',' << r.seed << '\n';
  }
  return out.str();
}

void emit_results(const ExperimentResult& result, const ExperimentSpec& spec,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("emit_results: cannot create " + out_dir + ": " + ec.message());

  const fs::path csv_path = fs::path(out_dir) / "results.csv";
  {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("emit_results: cannot write " + csv_path.string());
    csv << records_to_csv(result.records);
  }

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["wall_seconds"] = result.wall_seconds;
  manifest["records"] = result.records.size();
  nlohmann::json sys;
  const SystemConfig& s = spec.system;
  sys["n_rx"] = s.n_rx;
  sys["n_tx"] = s.n_tx;
  sys["subcarriers"] = s.n_subcarriers;
  sys["pilots"] = s.n_pilots;
  sys["modulation"] = s.mod_order == 4 ? "qpsk" : "16qam";
  sys["rho"] = s.rho;
  sys["snr_db"] = s.snr_grid_db;
  sys["grid_is_ebn0"] = s.grid_is_ebn0;
  sys["coded"] = s.coded;
  sys["velocity_kmh"] = s.velocity_kmh;
  sys["carrier_hz"] = s.carrier_hz;
  sys["subcarrier_spacing_hz"] = s.subcarrier_spacing_hz;
  sys["n_symbols"] = s.n_symbols;
  sys["pilot_symbols"] = s.n_pilot_symbols;
  sys["delay_spread_ns"] = s.delay_spread_ns;
  sys["pdp_file"] = s.pdp_file;
  manifest["system"] = sys;
  nlohmann::json jcd;
  jcd["layers"] = spec.jcd.layers;
  jcd["estimator"] = estimator_name(spec.jcd.estimator);
  jcd["ep_iterations"] = spec.jcd.ep_iterations;
  jcd["damping"] = spec.jcd.damping;
  jcd["interpolation"] = spec.jcd.interpolation == JcdConfig::Interpolation::CubicSpline
                             ? "cubic_spline"
                             : "none";
  jcd["perfect_csi"] = spec.jcd.perfect_csi;
  manifest["jcd"] = jcd;
  manifest["trials"] = spec.trials;
  manifest["seed"] = spec.base_seed;

  const fs::path man_path = fs::path(out_dir) / "manifest.json";
  std::ofstream man(man_path, std::ios::binary);
  if (!man) throw std::runtime_error("emit_results: cannot write " + man_path.string());
  man << manifest.dump(2) << '\n';
}

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + v + "'");
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list");
  return out;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_line(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  SystemConfig& sys = spec.system;
  if (key == "nr") {
    sys.n_rx = std::stoi(value);
  } else if (key == "nt") {
    sys.n_tx = std::stoi(value);
  } else if (key == "subcarriers") {
    sys.n_subcarriers = std::stoi(value);
  } else if (key == "pilots") {
    sys.n_pilots = std::stoi(value);
  } else if (key == "modulation") {
    if (value == "qpsk") {
      sys.mod_order = 4;
    } else if (value == "16qam") {
      sys.mod_order = 16;
    } else {
      throw std::invalid_argument("config: modulation must be qpsk or 16qam");
    }
  } else if (key == "rho") {
    sys.rho = std::stod(value);
  } else if (key == "snr_db") {
    sys.snr_grid_db = parse_list(value);
  } else if (key == "grid_is_ebn0") {
    sys.grid_is_ebn0 = parse_bool(value);
  } else if (key == "coded") {
    sys.coded = parse_bool(value);
  } else if (key == "velocity_kmh") {
    sys.velocity_kmh = std::stod(value);
  } else if (key == "carrier_hz") {
    sys.carrier_hz = std::stod(value);
  } else if (key == "subcarrier_spacing_hz") {
    sys.subcarrier_spacing_hz = std::stod(value);
  } else if (key == "n_symbols") {
    sys.n_symbols = std::stoi(value);
  } else if (key == "pilot_symbols") {
    sys.n_pilot_symbols = std::stoi(value);
  } else if (key == "delay_spread_ns") {
    sys.delay_spread_ns = std::stod(value);
  } else if (key == "pdp_file") {
    sys.pdp_file = value;
  } else if (key == "trials") {
    spec.trials = std::stoi(value);
  } else if (key == "seed") {
    spec.base_seed = std::stoull(value);
  } else if (key == "estimator") {
    if (value == "mjcd") {
      spec.jcd.estimator = EstimatorKind::Mjcd;
    } else if (value == "ojcd") {
      spec.jcd.estimator = EstimatorKind::Ojcd;
    } else {
      throw std::invalid_argument("config: estimator must be mjcd or ojcd");
    }
  } else if (key == "layers") {
    spec.jcd.layers = std::stoi(value);
  } else if (key == "ep_iterations") {
    spec.jcd.ep_iterations = std::stoi(value);
  } else if (key == "damping") {
    spec.jcd.damping = std::stod(value);
  } else if (key == "interpolation") {
    if (value == "none") {
      spec.jcd.interpolation = JcdConfig::Interpolation::None;
    } else if (value == "cubic_spline") {
      spec.jcd.interpolation = JcdConfig::Interpolation::CubicSpline;
    } else {
      throw std::invalid_argument("config: interpolation must be none or cubic_spline");
    }
  } else if (key == "perfect_csi") {
    spec.jcd.perfect_csi = parse_bool(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  ExperimentSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) + " is not key = value");
    }
    apply_config_line(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return spec;
}

}  // namespace jcdsim
