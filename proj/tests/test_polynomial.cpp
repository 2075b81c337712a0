#include <Eigen/Dense>
#include <algorithm>

#include "doctest.h"
#include "fgc/polynomial.hpp"
#include "fgc/spectrum.hpp"
#include "support.hpp"

using namespace fgc;

namespace {

Poly from_roots(const std::vector<cplx>& roots) {
  Poly p(cplx(1.0));
  for (const auto& r : roots) p *= Poly::monomial_x() - Poly(r);
  return p;
}

bool contains(const std::vector<cplx>& roots, cplx z, double tol) {
  return std::any_of(roots.begin(), roots.end(), [&](cplx r) { return std::abs(r - z) < tol; });
}

// det(x I + K) straight from the 4x4 matrix; independent of the printed
// coefficient list.
cplx matrix_determinant(const D2System& s, cplx x) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  const cplx o1 = s.omega(1), o2 = s.omega(2), o3 = s.omega(3), o4 = s.omega(4);
  m(0, 0) = x - kI * s.gamma[0] / 2.0;
  m(1, 1) = x - kI * s.gamma[1] / 2.0;
  m(2, 2) = x - kI * s.gamma[2] / 2.0;
  m(3, 3) = x;
  m(0, 1) = o2;
  m(1, 0) = std::conj(o2);
  m(1, 2) = o3;
  m(2, 1) = std::conj(o3);
  m(2, 3) = o4;
  m(3, 2) = std::conj(o4);
  m(0, 3) = o1;
  m(3, 0) = std::conj(o1);
  return m.determinant();
}

}  // namespace

TEST_CASE("polynomial arithmetic") {
  const Poly x = Poly::monomial_x();
  const Poly p = x * x - Poly(cplx(1.0));
  CHECK(p.degree() == 2);
  CHECK(std::abs(p(cplx(3.0))) == 8.0);
  CHECK(p.derivative().degree() == 1);
  CHECK(std::abs(p.derivative()(cplx(2.0)) - cplx(4.0)) == 0.0);
  CHECK((p - p).degree() == 0);
  CHECK(std::abs((-p)(cplx(0.0)) - cplx(1.0)) == 0.0);

  const auto t = p.taylor(cplx(1.0));  // (1+h)^2 - 1 = 2h + h^2
  REQUIRE(t.size() == 3);
  CHECK(std::abs(t[0]) == 0.0);
  CHECK(std::abs(t[1] - cplx(2.0)) < 1e-15);
  CHECK(std::abs(t[2] - cplx(1.0)) < 1e-15);
}

TEST_CASE("quartic roots of x^4 form one cluster of multiplicity four") {
  QuarticPoly q;
  const auto r = quartic_roots(q);
  REQUIRE(r.distinct.size() == 1);
  CHECK(r.distinct[0].multiplicity == 4);
  CHECK(std::abs(r.distinct[0].value) < 1e-12);
  CHECK(r.roots.size() == 4);
}

TEST_CASE("quartic roots of x^2 (x^2 - 1)") {
  QuarticPoly q;
  q.c = {1.0, 0.0, -1.0, 0.0, 0.0};
  const auto r = quartic_roots(q);
  REQUIRE(r.distinct.size() == 3);
  int mult_at_zero = 0;
  for (const auto& d : r.distinct) {
    if (std::abs(d.value) < 1e-9) mult_at_zero = d.multiplicity;
  }
  CHECK(mult_at_zero == 2);
  CHECK(contains(r.roots, 1.0, 1e-12));
  CHECK(contains(r.roots, -1.0, 1e-12));
}

TEST_CASE("random quartics: small residuals and a faithful re-expansion") {
  test::Rng rng(99);
  for (int i = 0; i < 300; ++i) {
    QuarticPoly q;
    for (int k = 1; k < 5; ++k) q.c[k] = cplx(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    const auto r = quartic_roots(q);
    REQUIRE(r.roots.size() == 4);
    int total = 0;
    for (const auto& d : r.distinct) total += d.multiplicity;
    CHECK(total == 4);
    for (const auto& z : r.roots) CHECK(std::abs(q(z)) < 1e-9 * q.scale());
    const Poly back = from_roots(r.roots);
    for (int k = 0; k <= 4; ++k) CHECK(std::abs(back.coeff(k) - q.as_poly().coeff(k)) < 1e-8 * q.scale());
  }
}

TEST_CASE("clustered roots survive perturbation") {
  // (x - 1)^3 (x + 2): a triple root the eigen-solver scatters by ~1e-5.
  const Poly p = from_roots({1.0, 1.0, 1.0, -2.0});
  const auto r = polynomial_roots(p);
  REQUIRE(r.distinct.size() == 2);
  for (const auto& d : r.distinct) {
    if (std::abs(d.value - 1.0) < 1e-4) CHECK(d.multiplicity == 3);
    else CHECK(std::abs(d.value + 2.0) < 1e-12);
  }
}

TEST_CASE("characteristic quartic without drives factors into bare poles") {
  D2System s;
  s.initial = basis_state(Level::kA1);
  const auto q = characteristic_quartic(s, 0.0);
  const auto r = quartic_roots(q);
  CHECK(contains(r.roots, 0.0, 1e-12));
  int near_half = 0;
  for (const auto& z : r.roots) near_half += std::abs(z - cplx(0.0, 0.5)) < 1e-4 ? 1 : 0;
  CHECK(near_half == 3);
  for (const auto& d : r.distinct) {
    if (std::abs(d.value - cplx(0.0, 0.5)) < 1e-4) CHECK(d.multiplicity == 3);
  }
}

TEST_CASE("characteristic quartic of a single undamped Rabi drive") {
  D2System s;
  s.gamma = {0.0, 0.0, 0.0};
  s.drives[0] = DriveField(1.0, 0.0);
  const auto q = characteristic_quartic(s, 0.0);
  CHECK(std::abs(q.c2() + 1.0) < 1e-15);
  CHECK(std::abs(q.c0()) < 1e-15);
  const auto r = quartic_roots(q);
  CHECK(contains(r.roots, 1.0, 1e-12));
  CHECK(contains(r.roots, -1.0, 1e-12));
  int at_zero = 0;
  for (const auto& z : r.roots) at_zero += std::abs(z) < 1e-7 ? 1 : 0;
  CHECK(at_zero == 2);
}

TEST_CASE("trapping phases give a real positive constant term") {
  const auto q = characteristic_quartic(test::loop_with_phases(kPi, 0.0), 0.0);
  CHECK(std::abs(q.c0().imag()) < 1e-14);
  CHECK(q.c0().real() > 0.0);
}

TEST_CASE("quartic coefficients match the matrix determinant") {
  test::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const D2System s = test::random_admissible(rng);
    const auto q = characteristic_quartic(s, 0.0);
    for (int k = 0; k < 5; ++k) {
      const cplx x(rng.uniform(-6.0, 6.0), rng.uniform(-2.0, 2.0));
      const cplx det = matrix_determinant(s, x);
      CHECK(std::abs(q(x) - det) <= 1e-11 * std::max(1.0, q.as_poly().magnitude_at(x)));
    }
    // The shift only relabels the variable.
    const double sh = branch_shift(s, 1);
    const auto q1 = characteristic_quartic(s, sh);
    CHECK(std::abs(q1(cplx(0.4)) - q(cplx(0.4))) < 1e-12 * q.as_poly().magnitude_at(0.4));
  }
}
