#pragma once

#include <vector>

#include "fgc/types.hpp"

namespace fgc {

// Dense complex polynomial, coefficients in ascending degree.
class Poly {
 public:
  Poly() = default;
  Poly(cplx c) : c_{c} {}  // NOLINT: implicit so closed forms read naturally
  explicit Poly(std::vector<cplx> ascending);

  static Poly monomial_x() { return Poly(std::vector<cplx>{0.0, 1.0}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx coeff(int k) const;

  cplx operator()(cplx x) const;
  Poly derivative() const;
  // Coefficients t_k with p(a + h) = sum_k t_k h^k.
  std::vector<cplx> taylor(cplx a) const;
  // Sum of |c_k| |x|^k: the magnitude scale of an evaluation at x.
  double magnitude_at(cplx x) const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Poly& o);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Poly& b) { return a *= b; }
  friend Poly operator-(Poly a);

 private:
  void trim();
  std::vector<cplx> c_{cplx{0.0}};
};

// Monic quartic in the branch-shifted variable x = delta + shift.
struct QuarticPoly {
  // Descending: c[0] = c4 = 1, ..., c[4] = c0.
  std::array<cplx, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};
  double shift = 0.0;

  cplx c4() const { return c[0]; }
  cplx c3() const { return c[1]; }
  cplx c2() const { return c[2]; }
  cplx c1() const { return c[3]; }
  cplx c0() const { return c[4]; }

  cplx operator()(cplx x) const;
  Poly as_poly() const;
  double scale() const;  // max |c_i|
};

struct Root {
  cplx value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<cplx> roots;     // with repetition, degree entries
  std::vector<Root> distinct;  // clustered, multiplicities summing to degree
};

// Companion-matrix eigenvalues, two Newton polish steps, then clustering of
// coincident roots (distance below 1e-7 relative, or a derivative test at
// the cluster mean for the wider spread of a perturbed multiple root).
RootSet polynomial_roots(const Poly& p);
RootSet quartic_roots(const QuarticPoly& q);

}  // namespace fgc
