#include "fgc/trapping.hpp"

#include <algorithm>
#include <cmath>

namespace fgc {

namespace {

// Phase offset from pi folded into (-pi, pi]; values a rounding error away
// from -pi are reported as +pi.
double phase_from_pi(double phi) {
  double r = wrap_signed(phi - kPi);
  if (r <= -kPi + 1e-12) r = kPi;
  return r;
}

void require_valid(const D2System& sys) {
  auto r = validate_system(sys);
  if (!r.ok()) throw InvalidSystem(std::move(r));
}

}  // namespace

cplx sgc_constant_term(const D2System& sys) {
  require_valid(sys);
  const auto& g = sys.gamma;
  const double s1 = std::norm(sys.omega(1));
  const double s2 = std::norm(sys.omega(2));
  const double s3 = std::norm(sys.omega(3));
  const double s4 = std::norm(sys.omega(4));
  const cplx loop = std::conj(sys.omega(1)) * sys.omega(2) * sys.omega(3) * sys.omega(4);
  return g[0] * g[1] / 4.0 * s4 + g[1] * g[2] / 4.0 * s1 + s2 * s4 + s1 * s3 - loop - std::conj(loop);
}

SgcVerdict sgc_feasible(const D2System& sys, double tol) {
  SgcVerdict v;
  v.c0 = sgc_constant_term(sys);
  const auto& g = sys.gamma;
  const double m1 = sys.drives[0].magnitude();
  const double m2 = sys.drives[1].magnitude();
  const double m3 = sys.drives[2].magnitude();
  const double m4 = sys.drives[3].magnitude();
  const double gap = m2 * m4 - m1 * m3;
  v.witness = g[0] * g[1] / 4.0 * m4 * m4 + g[1] * g[2] / 4.0 * m1 * m1 + gap * gap;
  v.trivial = m1 == 0.0 && m2 == 0.0 && m3 == 0.0 && m4 == 0.0;
  const double scale = std::max({m2 * m4 * m2 * m4, m1 * m3 * m1 * m3, g[0] * g[1] * m4 * m4, g[1] * g[2] * m1 * m1});
  v.feasible = !v.trivial && std::abs(v.c0) <= tol * scale;
  return v;
}

cplx fgc_central_numerator(const D2System& sys, double delta) {
  const cplx a = sys.omega(3) * sys.omega(4);
  const cplx b = sys.omega(1) * std::conj(sys.omega(2));
  return (kI * delta + sys.gamma[0] / 2.0) * a + (kI * delta + sys.gamma[2] / 2.0) * b;
}

TrappingReport fgc_check(const D2System& sys, double tol) {
  require_valid(sys);
  const cplx a = sys.omega(3) * sys.omega(4);
  const cplx b = sys.omega(1) * std::conj(sys.omega(2));
  const double ma = std::abs(a);
  const double mb = std::abs(b);

  TrappingReport r;
  r.delta_coefficient_residual = a + b;
  r.constant_residual = sys.gamma[0] / 2.0 * a + sys.gamma[2] / 2.0 * b;
  r.magnitude_condition = sys.drives[2].magnitude() * sys.drives[3].magnitude() -
                          sys.drives[0].magnitude() * sys.drives[1].magnitude();
  // Loop phase; reduces to phi2 + phi3 when O1 and O4 are real.
  const double loop_phase = sys.drives[1].phase() + sys.drives[2].phase() + sys.drives[3].phase() - sys.drives[0].phase();
  r.phase_condition = phase_from_pi(loop_phase);
  r.gamma_condition = sys.gamma[0] - sys.gamma[2];

  const double scale = std::max(ma, mb);
  const bool magnitude_ok = std::abs(r.magnitude_condition) <= tol * scale;
  const bool phase_ok = scale == 0.0 || std::abs(r.phase_condition) <= tol;
  const bool gamma_ok = std::abs(r.gamma_condition) <= tol;
  r.satisfied = magnitude_ok && phase_ok && gamma_ok;
  return r;
}

std::array<DriveField, 4> fgc_solve(double m1, double m2, double m3, double phi2) {
  if (m3 == 0.0) throw DivisionByZeroDrive("fgc_solve: |Omega3| = 0, |Omega4| is undetermined");
  return {DriveField(m1, 0.0), DriveField(m2, phi2), DriveField(m3, kPi - phi2), DriveField(m1 * m2 / m3, 0.0)};
}

TrappingReport d1_trapping_check(const D1System& sys, double tol) {
  auto v = validate_d1(sys);
  if (!v.ok()) throw InvalidSystem(std::move(v));
  const cplx a = sys.optical1.value() * sys.microwave1.value();
  const cplx b = sys.microwave2.value() * std::conj(sys.optical2.value());

  TrappingReport r;
  r.delta_coefficient_residual = a + b;
  r.constant_residual = 0.0;
  r.magnitude_condition = std::abs(a) - std::abs(b);
  r.phase_condition = phase_from_pi(sys.optical1.phase() + sys.microwave1.phase() + sys.optical2.phase() -
                                    sys.microwave2.phase());
  r.gamma_condition = 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  r.satisfied = std::abs(a + b) <= tol * scale;
  return r;
}

}  // namespace fgc
