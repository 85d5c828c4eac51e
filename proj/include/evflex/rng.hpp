#pragma once

#include <cmath>
#include <cstdint>

namespace evflex {

// Deterministic 64-bit generator (splitmix64). All sampling in the project
// goes through this type so that results are bit-reproducible for a fixed
// seed, independent of the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1): 53-bit mantissa.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0; modulo bias is negligible for
  // the small ranges used here, but we reject to keep draws exactly uniform.
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Standard normal via Box-Muller. One value per call; the spare is kept.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double next_normal(double mean, double stddev) { return mean + stddev * next_normal(); }

  // Lognormal parameterized by the underlying normal's mu/sigma.
  double next_lognormal(double mu, double sigma) { return std::exp(next_normal(mu, sigma)); }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Derived per-entity seed. Used to give every simulated vehicle its own
// independent stream while keeping the whole run a function of one seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  Rng mixer(base ^ (salt * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  return mixer.next_u64();
}

}  // namespace evflex
