#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fgc/model.hpp"

namespace fgc::test {

// splitmix64; tiny, seedable and identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int index(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

inline DriveField random_field(Rng& rng, double max_mag) {
  return DriveField(rng.uniform(0.0, max_mag), rng.uniform(0.0, kTwoPi));
}

inline StateVector random_state(Rng& rng) {
  StateVector v;
  double n = 0.0;
  for (auto& z : v) {
    z = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    n += std::norm(z);
  }
  for (auto& z : v) z /= std::sqrt(n);
  return v;
}

// Resonant, p = 0, omega12 = omega23: the systems the closed forms cover.
inline D2System random_admissible(Rng& rng, bool random_initial = false) {
  D2System s;
  for (auto& g : s.gamma) g = rng.uniform(0.2, 3.0);
  s.omega12 = s.omega23 = rng.uniform(5.0, 30.0);
  for (auto& f : s.drives) f = random_field(rng, 3.0);
  s.initial = random_initial ? random_state(rng) : basis_state(Level::kB);
  return s;
}

inline D1System random_d1(Rng& rng) {
  D1System s;
  s.gamma = rng.uniform(0.3, 2.0);
  s.optical1 = random_field(rng, 2.0);
  s.optical2 = random_field(rng, 2.0);
  s.microwave1 = random_field(rng, 2.0);
  s.microwave2 = random_field(rng, 2.0);
  return s;
}

inline D2System loop_with_phases(double phi2, double phi3) {
  D2System s;
  s.drives = {DriveField(2.0, 0.0), DriveField(1.0, phi2), DriveField(1.0, phi3), DriveField(2.0, 0.0)};
  return s;
}

inline double rel_diff(cplx a, cplx b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace fgc::test
