#include <algorithm>

#include "doctest.h"
#include "fgc/dynamics.hpp"
#include "fgc/spectrum.hpp"
#include "fgc/trapping.hpp"
#include "support.hpp"

using namespace fgc;

TEST_CASE("constant term of the characteristic quartic") {
  CHECK(std::abs(sgc_constant_term(D2System{})) == 0.0);

  D2System real = test::loop_with_phases(kPi, 0.0);
  real.drives[0] = DriveField(1.3, 0.0);
  const cplx c = sgc_constant_term(real);
  CHECK(std::abs(c.imag()) < 1e-14);
  CHECK(c.real() > 0.0);

  const cplx open = sgc_constant_term(test::loop_with_phases(kPi / 2.0, 3.0 * kPi / 2.0));
  CHECK(std::abs(open) > 0.1);
  // Same number as the characteristic quartic's c0.
  test::Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const auto s = test::random_admissible(rng);
    CHECK(std::abs(sgc_constant_term(s) - characteristic_quartic(s, 0.0).c0()) < 1e-12 * (1.0 + std::abs(sgc_constant_term(s))));
  }
}

TEST_CASE("no physical system satisfies the SGC constant-term condition") {
  test::Rng rng(1000);
  int counterexamples = 0;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    D2System s;
    for (auto& g : s.gamma) g = rng.uniform(1e-3, 5.0);
    for (auto& f : s.drives) f = test::random_field(rng, 4.0);
    // Some draws switch drives off to probe the edges of the claim.
    if (rng.uniform() < 0.2) s.drives[static_cast<std::size_t>(rng.index(4))] = DriveField(0.0, 0.0);
    const double m24 = s.drives[1].magnitude() * s.drives[3].magnitude();
    const double m13 = s.drives[0].magnitude() * s.drives[2].magnitude();
    if (m24 == 0.0 && m13 == 0.0) continue;
    ++checked;
    const auto v = sgc_feasible(s);
    if (v.feasible || !(v.c0.real() > 0.0)) ++counterexamples;
    CHECK(v.c0.real() >= v.witness * (1.0 - 1e-12));
  }
  CHECK(checked > 900);
  CHECK(counterexamples == 0);
}

TEST_CASE("SGC verdict edge cases") {
  const auto none = sgc_feasible(D2System{});
  CHECK(none.trivial);
  CHECK_FALSE(none.feasible);
  CHECK(std::abs(none.c0) == 0.0);

  D2System s = test::loop_with_phases(kPi, 0.0);
  s.gamma[1] = 1e-9;
  const auto v = sgc_feasible(s);
  CHECK_FALSE(v.feasible);
  CHECK(v.c0.real() > 0.0);
}

TEST_CASE("central numerator under the trapping condition") {
  const auto trap = test::loop_with_phases(kPi, 0.0);
  for (double d : {-10.0, -1.0, 0.0, 0.5, 3.0}) CHECK(std::abs(fgc_central_numerator(trap, d)) < 1e-14);

  D2System eq;
  const double m = 1.7;
  eq.drives = {DriveField(m, 0.0), DriveField(m, 0.0), DriveField(m, 0.0), DriveField(m, 0.0)};
  for (double d : {-2.0, 0.0, 1.5}) {
    CHECK(std::abs(fgc_central_numerator(eq, d) - 2.0 * m * m * (kI * d + 0.5)) < 1e-14);
  }

  D2System g = trap;
  g.gamma = {1.0, 1.0, 2.0};
  CHECK(std::abs(fgc_central_numerator(g, 0.0)) == doctest::Approx(0.5 * 2.0).epsilon(1e-14));
}

TEST_CASE("trapping checks on the reference loops") {
  const auto yes = fgc_check(test::loop_with_phases(kPi, 0.0));
  CHECK(yes.satisfied);
  CHECK(std::abs(yes.delta_coefficient_residual) < 1e-14);
  CHECK(std::abs(yes.constant_residual) < 1e-14);

  const auto no = fgc_check(test::loop_with_phases(kPi / 2.0, 3.0 * kPi / 2.0));
  CHECK_FALSE(no.satisfied);
  CHECK(std::abs(no.phase_condition) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(no.magnitude_condition == doctest::Approx(0.0));

  D2System g = test::loop_with_phases(kPi, 0.0);
  g.gamma = {1.0, 1.0, 2.0};
  const auto rg = fgc_check(g);
  CHECK_FALSE(rg.satisfied);
  CHECK(std::abs(rg.gamma_condition) == doctest::Approx(1.0));
  CHECK(rg.phase_condition == doctest::Approx(0.0));

  // The other sign choice of the two phases also traps.
  CHECK(fgc_check(test::loop_with_phases(0.0, kPi)).satisfied);
}

TEST_CASE("completing the drive set") {
  const auto a = fgc_solve(2.0, 1.0, 1.0, kPi);
  CHECK(a[3].magnitude() == doctest::Approx(2.0));
  CHECK(a[2].phase() == doctest::Approx(0.0).epsilon(1e-15));
  const auto b = fgc_solve(1.0, 1.0, 1.0, 0.0);
  CHECK(b[3].magnitude() == doctest::Approx(1.0));
  CHECK(b[2].phase() == doctest::Approx(kPi));
  CHECK_THROWS_AS(fgc_solve(1.0, 1.0, 0.0, 0.0), DivisionByZeroDrive);
}

TEST_CASE("solved drive sets always trap and darken the central branch") {
  test::Rng rng(77);
  const auto grid = linear_grid(-30.0, 30.0, 301);
  for (int i = 0; i < 200; ++i) {
    D2System s = test::random_admissible(rng, i % 4 == 0);
    s.gamma[2] = s.gamma[0];
    s.drives = fgc_solve(rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), rng.uniform(0.0, kTwoPi));
    s.initial = basis_state(Level::kB);
    const auto r = fgc_check(s);
    CHECK(r.satisfied);
    if (i % 10 == 0) {
      const auto spec = spectrum_analytic(s, grid);
      CHECK(*std::max_element(spec.branch_intensity[1].begin(), spec.branch_intensity[1].end()) < 1e-20);
    }
  }
}

TEST_CASE("under the trapping condition the central amplitude never builds up") {
  const auto s = test::loop_with_phases(kPi, 0.0);
  const auto traj = propagate(s, 40.0, 1e-10);
  double worst = 0.0;
  for (const auto& a : traj.amps) worst = std::max(worst, std::abs(a[1]));
  CHECK(worst < 1e-8);
  // The bare loop still empties through the outer branches.
  CHECK(trapped_fraction(s, 60.0) < 1e-9);
}

TEST_CASE("D1 trapping condition") {
  D1System d;
  d.optical1 = DriveField(1.0, 0.0);
  d.microwave1 = DriveField(1.0, 0.0);
  d.optical2 = DriveField(1.0, kPi);
  d.microwave2 = DriveField(1.0, 0.0);
  CHECK(d1_trapping_check(d).satisfied);

  const auto a = d1_trapping_check(std::get<D1System>(preset("d1-fig3a").system));
  CHECK_FALSE(a.satisfied);

  D1System o = d;
  o.optical1 = DriveField(0.0, 0.0);
  o.optical2 = DriveField(0.7, 0.3);
  o.microwave2 = DriveField(0.4, 0.0);
  CHECK_FALSE(d1_trapping_check(o).satisfied);
}

TEST_CASE("D1 trapping implies a dark spectrum and a fully trapped atom") {
  test::Rng rng(55);
  const auto grid = linear_grid(-6.0, 6.0, 601);
  for (int i = 0; i < 10; ++i) {
    D1System d = test::random_d1(rng);
    // Force |o1 m1| = |m2 o2| and phases summing to pi.
    d.optical1 = DriveField(rng.uniform(0.5, 1.5), d.optical1.phase());
    d.optical2 = DriveField(rng.uniform(0.5, 1.5), d.optical2.phase());
    d.microwave1 = DriveField(rng.uniform(0.5, 1.5), 0.0);
    const double target = d.optical1.magnitude() * d.microwave1.magnitude();
    d.microwave2 = DriveField(target / d.optical2.magnitude(), 0.0);
    d.optical2 = DriveField(d.optical2.magnitude(), kPi - d.optical1.phase());
    REQUIRE(d1_trapping_check(d).satisfied);
    const auto spec = d1_spectrum(d, grid);
    CHECK(*std::max_element(spec.total.begin(), spec.total.end()) == 0.0);
    CHECK(std::abs(trapped_fraction(d1_to_chain(d), 60.0) - 1.0) < 1e-6);
  }
}
