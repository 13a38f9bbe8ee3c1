#pragma once

#include <cmath>
#include <cstdint>

namespace gflab {

// Counter-based generator: the value at position n is a pure function of
// (key, n), so a stream can be replayed or split without shared state.
// The update is the splitmix64 sequence, which passes BigCrush and is
// more than adequate for Monte Carlo work.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(derive_key(master_seed, stream)) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^
                 mix64(stream + 0xd1b54a32d192ed03ULL));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ + counter_);
  }

  // Uniform in [0,1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Box-Muller with one cached value per pair.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Exact von Mises sampler (Best & Fisher 1979 wrapped-Cauchy rejection).
// Returns an angle in [-pi, pi).
inline double sample_von_mises(CounterRng& rng, double mu, double kappa) {
  constexpr double kPi = 3.14159265358979323846264338327950288;
  if (kappa < 1e-10) {
    return rng.uniform(-kPi, kPi);
  }
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  double f = 0.0;
  for (;;) {
    const double u1 = rng.next_double();
    const double z = std::cos(kPi * u1);
    f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.next_double();
    if (u2 < c * (2.0 - c)) break;
    if (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  const double u3 = rng.next_double();
  double theta = mu + (u3 < 0.5 ? -1.0 : 1.0) * std::acos(f);
  // wrap to [-pi, pi)
  theta -= 2.0 * kPi * std::floor((theta + kPi) / (2.0 * kPi));
  return theta;
}

inline double wrap_angle(double x) {
  constexpr double kPi = 3.14159265358979323846264338327950288;
  return x - 2.0 * kPi * std::floor((x + kPi) / (2.0 * kPi));
}

}  // namespace gflab
