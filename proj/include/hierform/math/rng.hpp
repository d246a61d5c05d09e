#pragma once
// Deterministic RNG utilities. All stochastic code in the library goes through
// Rng so that results are reproducible across platforms and standard library
// versions (std::normal_distribution et al. are not portable).

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace hierform {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d49bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream derivation: stream k of a master seed.  Used to give
// each chain (and each auxiliary purpose) its own independent generator.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(0x9e3779b97f4a7c15ULL * (stream + 1)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller; one value per call, pairs cached
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  double exponential() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Inversion by sequential search; adequate for the rate ranges seen here.
  long long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 60.0) {
      double p = std::exp(-lambda);
      double cum = p;
      const double u = uniform();
      long long k = 0;
      while (u > cum && k < 10000) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cum += p;
      }
      return k;
    }
    // split recursively to keep the sequential search short
    return poisson(lambda / 2.0) + poisson(lambda / 2.0);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hierform
