#include "fgc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace fgc {

StepSizeUnderflow::StepSizeUnderflow(double time_reached)
    : NumericalError("StepSizeUnderflow: integrator step collapsed at t = " + std::to_string(time_reached)),
      time_reached_(time_reached) {}

NotConverged::NotConverged(const std::string& what, double previous_average, double last_average)
    : NumericalError("NotConverged: " + what + " (window averages " + std::to_string(previous_average) + ", " +
                     std::to_string(last_average) + ")"),
      previous_average_(previous_average),
      last_average_(last_average) {}

StateVector AmplitudeTrajectory::at(double t) const {
  if (times.empty()) throw std::out_of_range("empty trajectory");
  if (t <= times.front()) return amps.front();
  if (t >= times.back()) return amps.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin());
  const double u = (t - times[i - 1]) / (times[i] - times[i - 1]);
  StateVector out;
  for (std::size_t j = 0; j < 4; ++j) out[j] = (1.0 - u) * amps[i - 1][j] + u * amps[i][j];
  return out;
}

AmplitudeEquations::AmplitudeEquations(const D2System& sys) : sys_(sys) {
  const bool resonant = std::all_of(sys.detunings.begin(), sys.detunings.end(), [](double d) { return d == 0.0; });
  const bool no_cross = std::all_of(sys.alignments.begin(), sys.alignments.end(), [](double p) { return p == 0.0; });
  constant_ = resonant && no_cross;
  base_ = matrix_at(0.0);
}

AmplitudeEquations::Matrix AmplitudeEquations::matrix_at(double t) const {
  const cplx I = kI;
  const auto& g = sys_.gamma;
  const auto& d = sys_.detunings;
  const auto& p = sys_.alignments;
  auto rot = [t](double w) { return w == 0.0 ? cplx{1.0} : std::polar(1.0, w * t); };

  const cplx d1 = sys_.omega(1) * rot(d[0]);
  const cplx d2 = sys_.omega(2) * rot(d[1]);
  const cplx d3 = sys_.omega(3) * rot(d[2]);
  const cplx d4 = sys_.omega(4) * rot(d[3]);

  Matrix m{};
  m[0] = {-g[0] / 2.0, -I * d2, 0.0, -I * d1};
  m[1] = {-I * std::conj(d2), -g[1] / 2.0, -I * d3, 0.0};
  m[2] = {0.0, -I * std::conj(d3), -g[2] / 2.0, -I * d4};
  m[3] = {-I * std::conj(d1), 0.0, -I * std::conj(d4), 0.0};

  // Cross damping: the (i, j) entry carries exp(-i w_ij t) and its mirror
  // the conjugate phase, keeping the damping matrix Hermitian.
  const double w12 = sys_.omega12;
  const double w23 = sys_.omega23;
  const double w13 = w12 + w23;
  auto cross = [&](std::size_t i, std::size_t j, double pij, double wij) {
    if (pij == 0.0) return;
    const double s = pij * std::sqrt(g[i] * g[j]) / 2.0;
    const cplx e = std::polar(1.0, -wij * t);
    m[i][j] -= s * e;
    m[j][i] -= s * std::conj(e);
  };
  cross(0, 1, p[0], w12);
  cross(0, 2, p[1], w13);
  cross(1, 2, p[2], w23);
  return m;
}

StateVector AmplitudeEquations::operator()(double t, const StateVector& y) const {
  const Matrix& m = constant_ ? base_ : matrix_at(t);
  StateVector out{};
  for (std::size_t i = 0; i < 4; ++i) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < 4; ++j) acc += m[i][j] * y[j];
    out[i] = acc;
  }
  return out;
}

double AmplitudeEquations::curvature_bound() const {
  double rows = 0.0;
  for (const auto& row : base_) {
    double s = 0.0;
    for (const auto& z : row) s += std::abs(z);
    rows = std::max(rows, s);
  }
  double rate = 0.0;
  for (std::size_t i = 0; i < 4; ++i) rate += std::abs(sys_.detunings[i]) * sys_.drives[i].magnitude();
  const auto& g = sys_.gamma;
  const double w13 = sys_.omega12 + sys_.omega23;
  rate += std::abs(sys_.alignments[0]) * std::sqrt(g[0] * g[1]) * sys_.omega12;
  rate += std::abs(sys_.alignments[1]) * std::sqrt(g[0] * g[2]) * w13;
  rate += std::abs(sys_.alignments[2]) * std::sqrt(g[1] * g[2]) * sys_.omega23;
  return rows * rows + rate;
}

namespace {

StateVector axpy(const StateVector& y, double a, const StateVector& k) {
  StateVector out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = y[i] + a * k[i];
  return out;
}

// Classical RK4 with step doubling; the accepted state is the Richardson
// extrapolated one.
class Rk4Doubling {
 public:
  Rk4Doubling(const AmplitudeEquations& f, double tol, double h0) : f_(f), tol_(tol), h_(h0) {}

  void advance_to(double& t, StateVector& y, double target) {
    while (t < target) {
      const double remaining = target - t;
      if (remaining <= 1e-13 * std::max(1.0, std::abs(target))) {
        t = target;
        break;
      }
      if (h_ < 1e-13 * std::max(1.0, std::abs(t))) throw StepSizeUnderflow(t);
      const bool truncated = h_ >= remaining;
      const double h = truncated ? remaining : h_;

      const StateVector k1 = f_(t, y);
      const StateVector full = step(t, y, k1, h);
      const StateVector mid = step(t, y, k1, h / 2.0);
      const StateVector two = step(t + h / 2.0, mid, f_(t + h / 2.0, mid), h / 2.0);

      double err = 0.0;
      for (std::size_t i = 0; i < 4; ++i) err = std::max(err, std::abs(two[i] - full[i]) / 15.0);
      const double factor = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(tol_ / err, 0.2), 0.2, 4.0);

      if (err <= tol_) {
        for (std::size_t i = 0; i < 4; ++i) y[i] = two[i] + (two[i] - full[i]) / 15.0;
        t = truncated ? target : t + h;
        if (!truncated) h_ = h * factor;
      } else {
        h_ = h * factor;
      }
    }
  }

 private:
  StateVector step(double t, const StateVector& y, const StateVector& k1, double h) const {
    const StateVector k2 = f_(t + h / 2.0, axpy(y, h / 2.0, k1));
    const StateVector k3 = f_(t + h / 2.0, axpy(y, h / 2.0, k2));
    const StateVector k4 = f_(t + h, axpy(y, h, k3));
    StateVector out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
  }

  const AmplitudeEquations& f_;
  double tol_;
  double h_;
};

// Walks the solution through the uniform times k h.
class UniformSampler {
 public:
  UniformSampler(const AmplitudeEquations& f, const StateVector& y0, double h, double tol)
      : rk_(f, tol, std::min(h, 0.05)), h_(h), y_(y0) {}

  std::size_t index() const { return k_; }
  double time() const { return static_cast<double>(k_) * h_; }
  const StateVector& state() const { return y_; }

  void next() {
    const double target = static_cast<double>(k_ + 1) * h_;
    rk_.advance_to(t_, y_, target);
    ++k_;
  }

 private:
  Rk4Doubling rk_;
  double h_;
  double t_ = 0.0;
  std::size_t k_ = 0;
  StateVector y_;
};

D2System checked(const D2System& sys) {
  auto r = validate_chain(sys);
  if (!r.ok()) throw InvalidSystem(std::move(r));
  return sys;
}

}  // namespace

AmplitudeTrajectory propagate(const D2System& sys, double t_final, double tol) {
  const D2System s = checked(sys);
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const AmplitudeEquations f(s);

  // Linear interpolation error is at most h^2/8 max|y''|.
  double h = std::min(0.01, std::sqrt(8.0 * tol / std::max(f.curvature_bound(), 1e-300)));
  if (s.omega12 > 0.0) h = std::min(h, 0.1 / s.omega12);
  const auto n = static_cast<std::size_t>(std::ceil(t_final / h));
  h = t_final / static_cast<double>(n);

  AmplitudeTrajectory traj;
  traj.times.reserve(n + 1);
  traj.amps.reserve(n + 1);
  UniformSampler sampler(f, s.initial, h, tol);
  traj.times.push_back(0.0);
  traj.amps.push_back(s.initial);
  for (std::size_t k = 0; k < n; ++k) {
    sampler.next();
    traj.times.push_back(k + 1 == n ? t_final : sampler.time());
    traj.amps.push_back(sampler.state());
  }
  return traj;
}

double trapped_fraction(const D2System& sys, double t_final, double tol) {
  const D2System s = checked(sys);
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
  const AmplitudeEquations f(s);
  constexpr std::size_t n = 4000;
  constexpr std::size_t k_window = n - n / 10;
  constexpr std::size_t k_mid = n - n / 20;
  const double h = t_final / static_cast<double>(n);

  UniformSampler sampler(f, s.initial, h, tol);
  double first = 0.0;
  double second = 0.0;
  double prev = norm_sq(s.initial);
  for (std::size_t k = 0; k < n; ++k) {
    sampler.next();
    const double cur = norm_sq(sampler.state());
    if (k >= k_window) (k < k_mid ? first : second) += 0.5 * (prev + cur);
    prev = cur;
  }
  first /= static_cast<double>(k_mid - k_window);
  second /= static_cast<double>(n - k_mid);
  if (std::abs(second - first) > tol) {
    throw NotConverged("norm has no plateau on the last 10% of the window", first, second);
  }
  return std::clamp(prev, 0.0, 1.0);
}

namespace {

struct FilonWeights {
  cplx w00, w10, w01, w11;  // value/derivative weights, already scaled by h
  cplx step;                // exp(-s h)
};

// Exact integral of exp(-s tau) against the cubic Hermite interpolant on one
// interval of length h, via the moments m_k = int_0^1 u^k exp(-z u) du.
FilonWeights filon_weights(cplx s, double h) {
  const cplx z = s * h;
  std::array<cplx, 4> m{};
  if (std::abs(z) < 0.5) {
    for (int k = 0; k < 4; ++k) {
      cplx term = 1.0;  // (-z)^j / j!
      cplx sum = 0.0;
      for (int j = 0; j < 40; ++j) {
        const cplx add = term / static_cast<double>(k + j + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        term *= -z / static_cast<double>(j + 1);
      }
      m[static_cast<std::size_t>(k)] = sum;
    }
  } else {
    const cplx e = std::exp(-z);
    m[0] = (1.0 - e) / z;
    for (int k = 1; k < 4; ++k) m[static_cast<std::size_t>(k)] = (static_cast<double>(k) * m[static_cast<std::size_t>(k - 1)] - e) / z;
  }
  FilonWeights w;
  w.w00 = h * (2.0 * m[3] - 3.0 * m[2] + m[0]);
  w.w10 = h * h * (m[3] - 2.0 * m[2] + m[1]);
  w.w01 = h * (-2.0 * m[3] + 3.0 * m[2]);
  w.w11 = h * h * (m[3] - m[2]);
  w.step = std::exp(-z);
  return w;
}

struct Query {
  std::size_t branch;  // 0-based
  double x;            // branch-shifted detuning
};

double quadrature_spacing(const D2System& s) {
  double h = 0.01;
  if (s.omega12 > 0.0) h = std::min(h, 0.1 / s.omega12);
  if (s.omega23 > 0.0) h = std::min(h, 0.1 / s.omega23);
  return h;
}

enum class RunStatus { kDone, kTrapped };

struct RunResult {
  RunStatus status;
  std::vector<cplx> values;
};

// Accumulates every query's Laplace integral while stepping, doubling the
// horizon until the queried amplitudes have decayed. With eps > 0 the
// horizon is fixed by the convergence factor instead.
RunResult run_integrals(const D2System& s, const std::vector<Query>& queries, const DynamicsOptions& o, double eps) {
  const AmplitudeEquations f(s);
  const double h = quadrature_spacing(s);

  struct Channel {
    FilonWeights w;
    cplx s;
    cplx phase = 1.0;
    cplx acc = 0.0;
  };
  std::vector<Channel> ch;
  ch.reserve(queries.size());
  for (const auto& q : queries) {
    const cplx sv = kI * q.x + eps;
    ch.push_back({filon_weights(sv, h), sv});
  }
  std::array<bool, 3> watched{};
  for (const auto& q : queries) watched[q.branch] = true;

  double horizon = o.t_final;
  if (eps > 0.0) horizon = std::min(o.t_max, std::log(1.0 / o.tail_tol) / eps);
  auto target_index = [h](double T) { return static_cast<std::size_t>(std::ceil(T / h - 1e-9)); };
  std::size_t n_target = target_index(horizon);
  std::size_t k_window = n_target - n_target / 10;
  std::size_t k_mid = n_target - n_target / 20;

  UniformSampler sampler(f, s.initial, h, o.tol);
  StateVector y0 = s.initial;
  StateVector d0 = f(0.0, y0);
  double tail = 0.0;
  double first = 0.0;
  double second = 0.0;
  double prev_norm = norm_sq(y0);

  constexpr std::size_t kReanchor = 4096;
  while (true) {
    sampler.next();
    const std::size_t k1 = sampler.index();
    const double t1 = sampler.time();
    const StateVector& y1 = sampler.state();
    const StateVector d1 = f(t1, y1);
    for (std::size_t c = 0; c < ch.size(); ++c) {
      auto& cc = ch[c];
      const std::size_t b = queries[c].branch;
      cc.acc += cc.phase * (cc.w.w00 * y0[b] + cc.w.w10 * d0[b] + cc.w.w01 * y1[b] + cc.w.w11 * d1[b]);
      cc.phase = (k1 % kReanchor == 0) ? std::exp(-cc.s * t1) : cc.phase * cc.w.step;
    }

    const double nrm = norm_sq(y1);
    if (k1 > k_window) {
      for (std::size_t b = 0; b < 3; ++b) {
        if (watched[b]) tail = std::max(tail, std::abs(y1[b]));
      }
      (k1 <= k_mid ? first : second) += 0.5 * (prev_norm + nrm);
    }
    prev_norm = nrm;
    y0 = y1;
    d0 = d1;

    if (k1 < n_target) continue;
    if (eps > 0.0 || tail <= o.tail_tol) break;

    first /= static_cast<double>(k_mid - k_window);
    second /= static_cast<double>(n_target - k_mid);
    if (std::abs(second - first) <= o.tol && second > o.tol) return {RunStatus::kTrapped, {}};
    if (2.0 * horizon > o.t_max) {
      throw NotConverged("amplitudes still above tail tolerance at t_max", first, second);
    }
    horizon *= 2.0;
    n_target = target_index(horizon);
    k_window = n_target - n_target / 10;
    k_mid = n_target - n_target / 20;
    tail = first = second = 0.0;
  }

  RunResult r{RunStatus::kDone, {}};
  r.values.reserve(ch.size());
  for (const auto& cc : ch) r.values.push_back(cc.acc);
  return r;
}

std::vector<cplx> laplace_integrals(const D2System& s, const std::vector<Query>& queries, const DynamicsOptions& o) {
  if (queries.empty()) return {};
  auto plain = run_integrals(s, queries, o, 0.0);
  if (plain.status == RunStatus::kDone) return plain.values;
  // Population stays trapped: F(0) ~ 2 F(eps) - F(2 eps).
  const auto a = run_integrals(s, queries, o, o.epsilon).values;
  const auto b = run_integrals(s, queries, o, 2.0 * o.epsilon).values;
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 2.0 * a[i] - b[i];
  return out;
}

// Splits independent queries into contiguous chunks; each chunk repeats the
// propagation, so results do not depend on the thread count.
std::vector<cplx> laplace_integrals_parallel(const D2System& s, const std::vector<Query>& queries,
                                             const DynamicsOptions& o) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t chunks = std::min<std::size_t>(std::min<std::size_t>(hw, 8), std::max<std::size_t>(1, queries.size() / 256));
  if (chunks <= 1) return laplace_integrals(s, queries, o);

  std::vector<std::vector<cplx>> parts(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> pool;
  const std::size_t per = (queries.size() + chunks - 1) / chunks;
  for (std::size_t c = 0; c < chunks; ++c) {
    pool.emplace_back([&, c] {
      try {
        const auto lo = std::min(queries.size(), c * per);
        const auto hi = std::min(queries.size(), lo + per);
        const std::vector<Query> sub(queries.begin() + static_cast<std::ptrdiff_t>(lo),
                                     queries.begin() + static_cast<std::ptrdiff_t>(hi));
        parts[c] = laplace_integrals(s, sub, o);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<cplx> out;
  out.reserve(queries.size());
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

cplx branch_amplitude_numeric(const D2System& sys, int branch, double delta, const DynamicsOptions& opts) {
  const D2System s = checked(sys);
  if (branch < 1 || branch > 3) throw std::invalid_argument("branch must be 1, 2 or 3");
  const double shift = branch == 1 ? s.omega12 : branch == 3 ? -s.omega12 : 0.0;
  return laplace_integrals(s, {{static_cast<std::size_t>(branch - 1), delta + shift}}, opts).front();
}

std::vector<std::array<cplx, 3>> branch_amplitudes_numeric(const D2System& sys, const std::vector<double>& grid,
                                                           const DynamicsOptions& opts, bool include_undamped) {
  const D2System s = checked(sys);
  const std::array<double, 3> shift{s.omega12, 0.0, -s.omega12};
  std::vector<Query> queries;
  for (std::size_t b = 0; b < 3; ++b) {
    if (s.gamma[b] == 0.0 && !include_undamped) continue;
    for (double d : grid) queries.push_back({b, d + shift[b]});
  }
  const auto values = laplace_integrals_parallel(s, queries, opts);
  std::vector<std::array<cplx, 3>> out(grid.size());
  for (std::size_t q = 0; q < queries.size(); ++q) out[q % grid.size()][queries[q].branch] = values[q];
  return out;
}

SpectrumResult spectrum_time_domain(const D2System& sys, const std::vector<double>& grid, const DynamicsOptions& opts) {
  const auto amps = branch_amplitudes_numeric(sys, grid, opts);
  SpectrumResult r;
  r.grid = grid;
  r.method = SpectrumMethod::kTimeDomain;
  r.cross_terms = opts.cross_terms;
  r.branch_weight = sys.gamma;
  const std::size_t n = grid.size();
  for (auto& b : r.branch_intensity) b.assign(n, 0.0);
  r.total.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cplx coherent = 0.0;
    double sum = 0.0;
    for (std::size_t b = 0; b < 3; ++b) {
      const double v = sys.gamma[b] * std::norm(amps[i][b]) / kTwoPi;
      r.branch_intensity[b][i] = v;
      sum += v;
      coherent += std::sqrt(sys.gamma[b]) * amps[i][b];
    }
    r.total[i] = r.cross_terms ? std::norm(coherent) / kTwoPi : sum;
  }
  return r;
}

}  // namespace fgc
