#include "fgc/spectrum.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <optional>

namespace fgc {

std::string to_string(SpectrumMethod m) {
  return m == SpectrumMethod::kAnalytic ? "analytic" : "timedomain";
}

PoleHit::PoleHit(int branch, double delta)
    : NumericalError("PoleHit: branch " + std::to_string(branch) + " denominator vanishes at delta = " +
                     std::to_string(delta)),
      branch_(branch),
      delta_(delta) {}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count < 2) throw std::invalid_argument("grid needs at least two points");
  if (!(hi > lo)) throw std::invalid_argument("grid needs max > min");
  std::vector<double> g(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

double branch_shift(const D2System& sys, int branch) {
  switch (branch) {
    case 1: return sys.omega12;
    case 2: return 0.0;
    case 3: return -sys.omega12;
  }
  throw std::invalid_argument("branch must be 1, 2 or 3");
}

QuarticPoly characteristic_quartic(const D2System& sys, double shift) {
  require_analytic(sys);
  const double a = sys.gamma[0] / 2.0;
  const double b = sys.gamma[1] / 2.0;
  const double c = sys.gamma[2] / 2.0;
  const double s1 = std::norm(sys.omega(1));
  const double s2 = std::norm(sys.omega(2));
  const double s3 = std::norm(sys.omega(3));
  const double s4 = std::norm(sys.omega(4));
  const cplx loop = std::conj(sys.omega(1)) * sys.omega(2) * sys.omega(3) * sys.omega(4);

  QuarticPoly q;
  q.shift = shift;
  q.c[1] = -kI * (a + b + c);
  q.c[2] = -(a * c + b * c + a * b) - (s1 + s2 + s3 + s4);
  q.c[3] = kI * (a * b * c + (a + b) * s4 + a * s3 + c * s2 + (b + c) * s1);
  q.c[4] = a * b * s4 + b * c * s1 + s2 * s4 + s1 * s3 - 2.0 * loop.real();
  return q;
}

namespace {

// Rows: branch amplitude A1~, A2~, A3~. Columns: initial A1, A2, A3, B.
// Adjugate of (x + K) times -i, written out so the same text serves plain
// evaluation (T = cplx) and polynomial construction (T = Poly).
template <class T>
std::array<std::array<T, 4>, 3> numerators(const D2System& s, const T& x) {
  const cplx I = kI;
  const cplx O1 = s.omega(1), O2 = s.omega(2), O3 = s.omega(3), O4 = s.omega(4);
  const cplx C1 = std::conj(O1), C2 = std::conj(O2), C3 = std::conj(O3), C4 = std::conj(O4);
  const T w1 = x - I * (s.gamma[0] / 2.0);
  const T w2 = x - I * (s.gamma[1] / 2.0);
  const T w3 = x - I * (s.gamma[2] / 2.0);

  std::array<std::array<T, 4>, 3> n;
  n[0][0] = I * C3 * O3 * x + I * C4 * O4 * w2 - I * w2 * w3 * x;
  n[0][1] = I * C3 * C4 * O1 + O2 * (-I * C4 * O4 + I * w3 * x);
  n[0][2] = -I * C4 * O1 * w2 - I * O2 * O3 * x;
  n[0][3] = O1 * (-I * C3 * O3 + I * w2 * w3) + I * O2 * O3 * O4;

  n[1][0] = I * C1 * O3 * O4 - I * C2 * C4 * O4 + I * C2 * w3 * x;
  n[1][1] = I * C1 * O1 * w3 + I * C4 * O4 * w1 - I * w1 * w3 * x;
  n[1][2] = O1 * (-I * C1 * O3 + I * C2 * C4) + I * O3 * w1 * x;
  n[1][3] = -I * C2 * O1 * w3 - I * O3 * O4 * w1;

  n[2][0] = -I * C1 * O4 * w2 - I * C2 * C3 * x;
  n[2][1] = -I * C1 * C3 * O1 + I * C1 * O2 * O4 + I * C3 * w1 * x;
  n[2][2] = I * C1 * O1 * w2 + I * C2 * O2 * x - I * w1 * w2 * x;
  n[2][3] = I * C2 * C3 * O1 - I * C2 * O2 * O4 + I * O4 * w1 * w2;
  return n;
}

template <class T>
T branch_numerator(const D2System& s, int branch, const T& x) {
  const auto n = numerators(s, x);
  T acc = T(cplx{0.0});
  for (std::size_t j = 0; j < 4; ++j) {
    if (s.initial[j] != cplx{0.0}) acc = acc + n[static_cast<std::size_t>(branch - 1)][j] * s.initial[j];
  }
  return acc;
}

// Closed form at branch variable x, or nullopt when x sits on a root of D.
std::optional<cplx> closed_form_at(const D2System& s, const QuarticPoly& q, int branch, double x) {
  const cplx d = q(x);
  const Poly dp = q.as_poly();
  if (!(std::abs(d) > 1e-12 * dp.magnitude_at(x))) return std::nullopt;
  return branch_numerator<cplx>(s, branch, cplx{x}) / d;
}

bool is_trapped_pole(cplx p) { return std::abs(p.imag()) <= 1e-9 * std::max(1.0, std::abs(p)); }

void flag_removable(std::vector<PoleTerm>& terms, double threshold) {
  for (auto& t : terms) t.removable = !(std::abs(t.residue) > threshold);
}

double max_residue(const std::vector<PoleTerm>& terms) {
  double m = 0.0;
  for (const auto& t : terms) m = std::max(m, std::abs(t.residue));
  return m;
}

bool all_removable(const std::vector<PoleTerm>& terms) {
  return std::all_of(terms.begin(), terms.end(), [](const PoleTerm& t) { return t.removable; });
}

}  // namespace

Poly amplitude_numerator(const D2System& sys, int branch) {
  require_analytic(sys);
  if (branch < 1 || branch > 3) throw std::invalid_argument("branch must be 1, 2 or 3");
  return branch_numerator<Poly>(sys, branch, Poly::monomial_x());
}

std::array<cplx, 3> steady_state_amplitudes(const D2System& sys, double delta) {
  require_analytic(sys);
  std::array<cplx, 3> out{};
  for (int n = 1; n <= 3; ++n) {
    const double shift = branch_shift(sys, n);
    const auto q = characteristic_quartic(sys, shift);
    const double x = delta + shift;
    if (auto v = closed_form_at(sys, q, n, x)) {
      out[static_cast<std::size_t>(n - 1)] = *v;
      continue;
    }
    const Poly num = branch_numerator<Poly>(sys, n, Poly::monomial_x());
    if (num.degree() == 0 && num.coeff(0) == cplx{0.0}) continue;
    throw PoleHit(n, delta);
  }
  return out;
}

std::array<cplx, 3> laplace_solve_oracle(const D2System& sys, double delta) {
  require_analytic(sys);
  const cplx I = kI;
  Eigen::Matrix4cd m;
  const cplx O1 = sys.omega(1), O2 = sys.omega(2), O3 = sys.omega(3), O4 = sys.omega(4);
  m << -sys.gamma[0] / 2.0, -I * O2, 0.0, -I * O1,
       -I * std::conj(O2), -sys.gamma[1] / 2.0, -I * O3, 0.0,
       0.0, -I * std::conj(O3), -sys.gamma[2] / 2.0, -I * O4,
       -I * std::conj(O1), 0.0, -I * std::conj(O4), 0.0;
  Eigen::Vector4cd x0;
  for (int j = 0; j < 4; ++j) x0(j) = sys.initial[static_cast<std::size_t>(j)];

  std::array<cplx, 3> out{};
  if (x0.isZero(0.0)) return out;
  for (int n = 1; n <= 3; ++n) {
    const cplx s = I * (delta + branch_shift(sys, n));
    const Eigen::Matrix4cd a = s * Eigen::Matrix4cd::Identity() - m;
    Eigen::FullPivLU<Eigen::Matrix4cd> lu(a);
    lu.setThreshold(1e-13);
    if (lu.rank() < 4) throw SingularSystem("SingularSystem: Laplace matrix singular at delta = " + std::to_string(delta));
    const Eigen::Vector4cd sol = lu.solve(x0);
    out[static_cast<std::size_t>(n - 1)] = sol(n - 1);
  }
  return out;
}

std::vector<PoleTerm> partial_fractions(const Poly& numerator, const Poly& denominator, double shift) {
  if (numerator.degree() >= denominator.degree()) {
    throw std::invalid_argument("partial_fractions needs a proper rational function");
  }
  const auto roots = polynomial_roots(denominator);
  std::vector<PoleTerm> out;
  for (const auto& r : roots.distinct) {
    const auto tn = numerator.taylor(r.value);
    const auto td = denominator.taylor(r.value);
    const auto k = static_cast<std::size_t>(r.multiplicity);
    // Denominator = (x - m)^k q(x); its Taylor coefficients are td shifted by k.
    auto q = [&](std::size_t j) { return j + k < td.size() ? td[j + k] : cplx{0.0}; };
    std::vector<cplx> f(k);
    for (std::size_t j = 0; j < k; ++j) {
      cplx acc = j < tn.size() ? tn[j] : cplx{0.0};
      for (std::size_t i = 1; i <= j; ++i) acc -= q(i) * f[j - i];
      f[j] = acc / q(0);
    }
    const cplx pole = r.value - shift;
    for (std::size_t j = 0; j < k; ++j) {
      PoleTerm t;
      t.pole = pole;
      t.residue = f[j];
      t.order = static_cast<int>(k - j);
      t.trapped = is_trapped_pole(pole);
      out.push_back(t);
    }
  }
  return out;
}

std::array<std::vector<PoleTerm>, 3> pole_expansion(const D2System& sys) {
  require_analytic(sys);
  std::array<std::vector<PoleTerm>, 3> out;
  double biggest = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const double shift = branch_shift(sys, n);
    const Poly den = characteristic_quartic(sys, shift).as_poly();
    auto& terms = out[static_cast<std::size_t>(n - 1)];
    terms = partial_fractions(branch_numerator<Poly>(sys, n, Poly::monomial_x()), den, shift);
    biggest = std::max(biggest, max_residue(terms));
  }
  for (auto& terms : out) flag_removable(terms, 1e-11 * biggest);
  return out;
}

cplx evaluate_poles(const std::vector<PoleTerm>& terms, double delta) {
  cplx acc = 0.0;
  for (const auto& t : terms) {
    if (t.removable) continue;
    const cplx d = delta - t.pole;
    if (d == cplx{0.0}) throw NumericalError("evaluate_poles: delta coincides with an undamped pole");
    acc += t.residue / std::pow(d, t.order);
  }
  return acc;
}

namespace {

void fill_intensities(SpectrumResult& r, const std::vector<std::array<cplx, 3>>& amps) {
  const std::size_t n = r.grid.size();
  for (auto& b : r.branch_intensity) b.assign(n, 0.0);
  r.total.assign(n, 0.0);
  const double inv2pi = 1.0 / kTwoPi;
  for (std::size_t i = 0; i < n; ++i) {
    cplx coherent = 0.0;
    double sum = 0.0;
    for (std::size_t b = 0; b < 3; ++b) {
      const double w = r.branch_weight[b];
      const double v = w * std::norm(amps[i][b]) * inv2pi;
      r.branch_intensity[b][i] = v;
      sum += v;
      coherent += std::sqrt(w) * amps[i][b];
    }
    r.total[i] = r.cross_terms ? std::norm(coherent) * inv2pi : sum;
  }
}

}  // namespace

SpectrumResult spectrum_analytic(const D2System& sys, const std::vector<double>& grid, bool cross_terms) {
  require_analytic(sys);
  SpectrumResult r;
  r.grid = grid;
  r.method = SpectrumMethod::kAnalytic;
  r.cross_terms = cross_terms;
  r.branch_weight = sys.gamma;
  r.branch_poles = pole_expansion(sys);

  std::array<QuarticPoly, 3> quartics;
  std::array<bool, 3> dark{};
  for (int n = 1; n <= 3; ++n) {
    const auto b = static_cast<std::size_t>(n - 1);
    quartics[b] = characteristic_quartic(sys, branch_shift(sys, n));
    dark[b] = all_removable(r.branch_poles[b]);
  }

  std::vector<std::array<cplx, 3>> amps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int n = 1; n <= 3; ++n) {
      const auto b = static_cast<std::size_t>(n - 1);
      if (dark[b]) continue;
      const double x = grid[i] + quartics[b].shift;
      if (auto v = closed_form_at(sys, quartics[b], n, x)) {
        amps[i][b] = *v;
      } else {
        amps[i][b] = evaluate_poles(r.branch_poles[b], grid[i]);
      }
    }
  }
  fill_intensities(r, amps);
  return r;
}

namespace {

cplx d1_loop_sum(const D1System& sys) {
  return sys.optical1.value() * sys.microwave1.value() + sys.microwave2.value() * std::conj(sys.optical2.value());
}

bool d1_numerator_vanishes(const D1System& sys) {
  const double scale = sys.optical1.magnitude() * sys.microwave1.magnitude() +
                       sys.microwave2.magnitude() * sys.optical2.magnitude();
  return std::abs(d1_loop_sum(sys)) <= 1e-12 * scale;
}

}  // namespace

cplx d1_amplitude(const D1System& sys, double delta) {
  const D2System chain = d1_to_chain(sys);
  const auto q = characteristic_quartic(chain, 0.0);
  if (sys.initial != D1Level::kG3) {
    if (auto v = closed_form_at(chain, q, 2, delta)) return *v;
    throw PoleHit(2, delta);
  }
  if (d1_numerator_vanishes(sys)) return 0.0;
  const cplx d = q(delta);
  if (!(std::abs(d) > 1e-12 * q.as_poly().magnitude_at(delta))) throw PoleHit(2, delta);
  return -kI * delta * d1_loop_sum(sys) / d;
}

SpectrumResult d1_spectrum(const D1System& sys, const std::vector<double>& grid) {
  const D2System chain = d1_to_chain(sys);
  const auto q = characteristic_quartic(chain, 0.0);

  SpectrumResult r;
  r.grid = grid;
  r.method = SpectrumMethod::kAnalytic;
  r.branch_weight = chain.gamma;

  Poly num;
  if (sys.initial == D1Level::kG3) {
    if (!d1_numerator_vanishes(sys)) num = Poly(std::vector<cplx>{0.0, -kI * d1_loop_sum(sys)});
  } else {
    num = amplitude_numerator(chain, 2);
  }
  auto& poles = r.branch_poles[1];
  poles = partial_fractions(num, q.as_poly(), 0.0);
  flag_removable(poles, 1e-11 * max_residue(poles));
  const bool dark = all_removable(poles);

  std::vector<std::array<cplx, 3>> amps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (dark) continue;
    try {
      amps[i][1] = d1_amplitude(sys, grid[i]);
    } catch (const PoleHit&) {
      amps[i][1] = evaluate_poles(poles, grid[i]);
    }
  }
  fill_intensities(r, amps);
  return r;
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct WeightedTerm {
  cplx pole;
  cplx coeff;
  int order;
};

// Integral over R of sum_j c_j (d - q_j)^-b_j times its conjugate, by closing
// the contour in the upper half plane around each q_j.
double line_integral(const std::vector<WeightedTerm>& terms) {
  cplx acc = 0.0;
  for (const auto& tj : terms) {
    for (const auto& tk : terms) {
      const int b = tj.order;
      const int a = tk.order;
      const double sign = (b - 1) % 2 == 0 ? 1.0 : -1.0;
      const cplx base = tj.pole - std::conj(tk.pole);
      acc += tj.coeff * std::conj(tk.coeff) * kI * kTwoPi * sign * binomial(a + b - 2, b - 1) *
             std::pow(base, -(a + b - 1));
    }
  }
  return acc.real();
}

}  // namespace

double exact_spectral_area(const SpectrumResult& spec, bool coherent) {
  if (spec.method != SpectrumMethod::kAnalytic) {
    throw std::invalid_argument("exact_spectral_area needs the pole expansion of an analytic spectrum");
  }
  std::array<std::vector<WeightedTerm>, 3> per_branch;
  for (std::size_t b = 0; b < 3; ++b) {
    const double w = spec.branch_weight[b];
    if (w == 0.0) continue;
    for (const auto& t : spec.branch_poles[b]) {
      if (t.removable) continue;
      if (!(t.pole.imag() > 0.0) || t.trapped) {
        throw NumericalError("exact_spectral_area: undamped pole carries emission, area diverges");
      }
      per_branch[b].push_back({t.pole, std::sqrt(w) * t.residue, t.order});
    }
  }
  if (coherent) {
    std::vector<WeightedTerm> all;
    for (const auto& v : per_branch) all.insert(all.end(), v.begin(), v.end());
    return line_integral(all) / kTwoPi;
  }
  double sum = 0.0;
  for (const auto& v : per_branch) sum += line_integral(v);
  return sum / kTwoPi;
}

}  // namespace fgc
