#pragma once

#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fgc {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Amplitude order throughout: A1, A2, A3, B.
using StateVector = std::array<cplx, 4>;

inline double norm_sq(const StateVector& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

// Phase wrapped into [0, 2pi).
inline double wrap_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// Phase wrapped into (-pi, pi].
inline double wrap_signed(double phi) {
  double r = wrap_phase(phi);
  return r > kPi ? r - kTwoPi : r;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures (integrator, convergence, singular solves).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fgc
