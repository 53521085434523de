#pragma once

// Shared test utilities: a portable deterministic RNG (so frozen expected
// values stay frozen across platforms) and small numeric helpers.

#include <cmath>
#include <cstdint>
#include <vector>

#include "qinterp/su2.hpp"

namespace test {

/// splitmix64; identical output everywhere, unlike std distributions.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  long uniform_int(long lo, long hi) {  // inclusive
    return lo + static_cast<long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  qinterp::Vec3 unit_vector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, qinterp::kTwoPi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

  qinterp::Rotation rotation() {
    return qinterp::Rotation(uniform(0.0, qinterp::kTwoPi), unit_vector(),
                             uniform(-qinterp::kPi, qinterp::kPi));
  }
};

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline qinterp::Rotation inverse(const qinterp::Rotation& r) {
  return qinterp::Rotation(-r.theta(), r.axis(), -r.phase());
}

/// g r g^{-1}
inline qinterp::Rotation conjugate(const qinterp::Rotation& g, const qinterp::Rotation& r) {
  return qinterp::compose(qinterp::compose(g, r), inverse(g));
}

}  // namespace test
