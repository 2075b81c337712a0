#include "fgc/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fgc {

Poly::Poly(std::vector<cplx> ascending) : c_(std::move(ascending)) {
  if (c_.empty()) c_.push_back(0.0);
  trim();
}

void Poly::trim() {
  while (c_.size() > 1 && c_.back() == cplx{0.0}) c_.pop_back();
}

cplx Poly::coeff(int k) const {
  if (k < 0 || k > degree()) return 0.0;
  return c_[static_cast<std::size_t>(k)];
}

cplx Poly::operator()(cplx x) const {
  cplx acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (degree() == 0) return Poly{};
  std::vector<cplx> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Poly(std::move(d));
}

std::vector<cplx> Poly::taylor(cplx a) const {
  // Repeated synthetic division by (x - a).
  std::vector<cplx> work = c_;
  const std::size_t n = work.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = n - 1; j > k; --j) work[j - 1] += a * work[j];
  }
  return work;
}

double Poly::magnitude_at(cplx x) const {
  double acc = 0.0;
  const double ax = std::abs(x);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * ax + std::abs(*it);
  return acc;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  trim();
  return *this;
}

Poly& Poly::operator*=(const Poly& o) {
  std::vector<cplx> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) {
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  }
  c_ = std::move(r);
  trim();
  return *this;
}

Poly operator-(Poly a) {
  for (auto& z : a.c_) z = -z;
  return a;
}

cplx QuarticPoly::operator()(cplx x) const {
  cplx acc = 0.0;
  for (const auto& ci : c) acc = acc * x + ci;
  return acc;
}

Poly QuarticPoly::as_poly() const { return Poly(std::vector<cplx>{c[4], c[3], c[2], c[1], c[0]}); }

double QuarticPoly::scale() const {
  double s = 0.0;
  for (const auto& ci : c) s = std::max(s, std::abs(ci));
  return s;
}

namespace {

void newton_polish(const Poly& p, const Poly& dp, cplx& x) {
  for (int it = 0; it < 2; ++it) {
    const cplx f = p(x);
    const cplx d = dp(x);
    if (std::abs(d) <= 1e-12 * p.magnitude_at(x)) return;  // near a multiple root
    const cplx next = x - f / d;
    if (std::abs(p(next)) < std::abs(f)) {
      x = next;
    } else {
      return;
    }
  }
}

// Multiplicity of a zero of p at m judged from its Taylor coefficients
// against the magnitude each coefficient would have without cancellation.
int zero_order_at(const Poly& p, cplx m, int max_order) {
  const auto t = p.taylor(m);
  const int d = p.degree();
  const double am = std::abs(m);
  int order = 0;
  for (int j = 0; j < max_order && j <= d; ++j) {
    double scale = 0.0;
    double binom = 1.0;  // C(i, j) for i = j upward
    for (int i = j; i <= d; ++i) {
      scale += std::abs(p.coeff(i)) * binom * std::pow(am, i - j);
      binom = binom * (i + 1) / (i + 1 - j);
    }
    if (std::abs(t[static_cast<std::size_t>(j)]) <= 1e-8 * scale) {
      ++order;
    } else {
      break;
    }
  }
  return std::max(order, 1);
}

}  // namespace

RootSet polynomial_roots(const Poly& p) {
  const int n = p.degree();
  if (n < 1) throw std::invalid_argument("polynomial_roots needs degree >= 1");
  const cplx lead = p.coeff(n);

  std::vector<cplx> raw;
  if (n == 1) {
    raw = {-p.coeff(0) / lead};
  } else {
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.coeff(i) / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericalError("companion eigenvalue solve failed");
    for (int i = 0; i < n; ++i) raw.push_back(es.eigenvalues()(i));
  }

  // Order deterministically: by real part, then imaginary part.
  std::sort(raw.begin(), raw.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  double rscale = 1.0;
  for (const auto& r : raw) rscale = std::max(rscale, std::abs(r));
  const double tight = 1e-7 * rscale;
  const double loose = 1e-3 * rscale;

  // A multiple root comes back from the eigensolver as a symmetric spray
  // whose mean is far more accurate than its members, so clustering works on
  // the raw eigenvalues and only simple roots are Newton polished.
  RootSet out;
  const Poly dp = p.derivative();
  std::vector<bool> used(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::size_t> near{i};
    for (std::size_t j = i + 1; j < raw.size(); ++j) {
      if (!used[j] && std::abs(raw[j] - raw[i]) < loose) near.push_back(j);
    }
    std::size_t take = 1;
    if (near.size() > 1) {
      cplx mean = 0.0;
      for (auto k : near) mean += raw[k];
      mean /= static_cast<double>(near.size());
      take = static_cast<std::size_t>(zero_order_at(p, mean, static_cast<int>(near.size())));
      for (std::size_t k = 1; k < near.size(); ++k) {
        if (std::abs(raw[near[k]] - raw[i]) < tight) take = std::max(take, k + 1);
      }
    }
    cplx centre = 0.0;
    for (std::size_t k = 0; k < take; ++k) centre += raw[near[k]];
    centre /= static_cast<double>(take);
    for (std::size_t k = 0; k < take; ++k) used[near[k]] = true;
    if (take == 1) newton_polish(p, dp, centre);
    out.distinct.push_back({centre, static_cast<int>(take)});
    for (std::size_t k = 0; k < take; ++k) out.roots.push_back(centre);
  }
  return out;
}

RootSet quartic_roots(const QuarticPoly& q) { return polynomial_roots(q.as_poly()); }

}  // namespace fgc
