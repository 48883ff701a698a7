#pragma once

#include <armadillo>
#include <complex>
#include <cstdint>
#include <random>

namespace jcdsim {

// Deterministic Gaussian source. Box-Muller over the raw mt19937_64 stream,
// so a given seed yields the same draws on every platform and build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * arma::datum::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // CN(0, 1): real and imaginary parts N(0, 1/2)
  std::complex<double> cgaussian() {
    constexpr double half = 0.70710678118654752440;
    double re = gaussian() * half;
    double im = gaussian() * half;
    return {re, im};
  }

  arma::cx_vec cgaussian_vec(arma::uword n) {
    arma::cx_vec v(n);
    for (arma::uword i = 0; i < n; ++i) v[i] = cgaussian();
    return v;
  }

  arma::vec gaussian_vec(arma::uword n) {
    arma::vec v(n);
    for (arma::uword i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  int bit() { return static_cast<int>(engine_() & 1u); }

  std::vector<int> bits(std::size_t n) {
    std::vector<int> b(n);
    for (auto& x : b) x = bit();
    return b;
  }

  // uniform integer in [0, bound)
  std::uint64_t uniform_int(std::uint64_t bound) {
    return engine_() % bound;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace jcdsim
