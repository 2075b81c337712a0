#pragma once

#include <array>
#include <string>
#include <vector>

#include "fgc/model.hpp"
#include "fgc/polynomial.hpp"

namespace fgc {

enum class SpectrumMethod { kAnalytic, kTimeDomain };

std::string to_string(SpectrumMethod m);

// One term residue / (delta - pole)^order of a branch amplitude, in the
// reporting detuning. Amplitudes are analytic in the lower half plane, so
// physical poles sit at Im >= 0; width (FWHM of |.|^2 for a simple pole)
// is 2 Im(pole).
struct PoleTerm {
  cplx pole;
  cplx residue;
  int order = 1;
  bool removable = false;  // cancelled by the numerator
  bool trapped = false;    // Im(pole) within tolerance of zero

  double location() const { return pole.real(); }
  double width() const { return 2.0 * pole.imag(); }
};

struct SpectrumResult {
  std::vector<double> grid;
  std::array<std::vector<double>, 3> branch_intensity;
  std::vector<double> total;
  std::array<std::vector<PoleTerm>, 3> branch_poles;
  std::array<double, 3> branch_weight{};  // Gamma_n
  SpectrumMethod method = SpectrumMethod::kAnalytic;
  bool cross_terms = false;
};

class PoleHit : public NumericalError {
 public:
  PoleHit(int branch, double delta);
  int branch() const { return branch_; }
  double delta() const { return delta_; }

 private:
  int branch_;
  double delta_;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

std::vector<double> linear_grid(double lo, double hi, std::size_t count);

// Offset between the reporting detuning and branch n's own variable:
// x_n = delta + branch_shift(n), i.e. +omega12, 0, -omega12.
double branch_shift(const D2System& sys, int branch);

// det(x + K) for K = H - i diag(G1/2, G2/2, G3/2, 0), monic in x.
QuarticPoly characteristic_quartic(const D2System& sys, double shift);

// Numerator N_n(x) with amplitude_n(x) = N_n(x) / D(x), all initial terms.
Poly amplitude_numerator(const D2System& sys, int branch);

// Closed-form Laplace amplitudes (A1~, A2~, A3~) of every branch at its
// shifted argument. Throws PoleHit when |D| < 1e-12 of its magnitude scale.
std::array<cplx, 3> steady_state_amplitudes(const D2System& sys, double delta);

// Independent route: LU solve of (s - M) X = X0 at s = i x_n.
std::array<cplx, 3> laplace_solve_oracle(const D2System& sys, double delta);

std::vector<PoleTerm> partial_fractions(const Poly& numerator, const Poly& denominator, double shift);
std::array<std::vector<PoleTerm>, 3> pole_expansion(const D2System& sys);
// Sum over non-removable terms.
cplx evaluate_poles(const std::vector<PoleTerm>& terms, double delta);

SpectrumResult spectrum_analytic(const D2System& sys, const std::vector<double>& grid,
                                 bool cross_terms = false);

// The D1 amplitude -i delta (Oo1 Om1 + Om2 Oo2*) / D(delta): the printed
// numerator with the overall sign of this library's transform, so it equals
// the central branch of d1_to_chain.
cplx d1_amplitude(const D1System& sys, double delta);
SpectrumResult d1_spectrum(const D1System& sys, const std::vector<double>& grid);

// Integral over the whole real line of the pole expansion: cross-term free
// sum of branch areas, or the coherent |sum_n sqrt(G_n) A_n|^2 version.
double exact_spectral_area(const SpectrumResult& spec, bool coherent = false);

}  // namespace fgc
