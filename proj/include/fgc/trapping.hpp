#pragma once

#include <array>
#include <optional>

#include "fgc/model.hpp"

namespace fgc {

struct SgcVerdict {
  bool feasible = false;
  bool trivial = false;  // no drives at all: c0 vanishes without any SGC question
  cplx c0;
  // Phase-independent lower bound of Re(c0):
  // G1 G2/4 |O4|^2 + G2 G3/4 |O1|^2 + (|O2 O4| - |O1 O3|)^2.
  double witness = 0.0;
};

struct TrappingReport {
  cplx delta_coefficient_residual;  // coefficient of i delta in the central numerator
  cplx constant_residual;           // delta-independent part
  double magnitude_condition = 0.0;
  double phase_condition = 0.0;     // wrapped into (-pi, pi]
  double gamma_condition = 0.0;
  bool satisfied = false;
  std::optional<std::array<DriveField, 4>> solved_fields;
};

class DivisionByZeroDrive : public Error {
 public:
  using Error::Error;
};

// Constant term of the characteristic quartic.
cplx sgc_constant_term(const D2System& sys);
SgcVerdict sgc_feasible(const D2System& sys, double tol = 1e-9);

// (i delta + G1/2) O3 O4 + (i delta + G3/2) O1 O2*: the initial-B numerator
// of the central branch up to sign.
cplx fgc_central_numerator(const D2System& sys, double delta);
TrappingReport fgc_check(const D2System& sys, double tol = 1e-9);

// Completes |O4| = m1 m2 / m3 and phi3 = pi - phi2; O1 and O4 real.
std::array<DriveField, 4> fgc_solve(double m1, double m2, double m3, double phi2);

TrappingReport d1_trapping_check(const D1System& sys, double tol = 1e-9);

}  // namespace fgc
