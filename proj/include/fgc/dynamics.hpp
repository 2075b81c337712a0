#pragma once

#include <array>
#include <vector>

#include "fgc/model.hpp"
#include "fgc/spectrum.hpp"

namespace fgc {

struct AmplitudeTrajectory {
  std::vector<double> times;
  std::vector<StateVector> amps;

  double norm_at(std::size_t i) const { return norm_sq(amps.at(i)); }
  // Linear interpolation between samples.
  StateVector at(double t) const;
};

class StepSizeUnderflow : public NumericalError {
 public:
  explicit StepSizeUnderflow(double time_reached);
  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

class NotConverged : public NumericalError {
 public:
  NotConverged(const std::string& what, double previous_average, double last_average);
  double previous_average() const { return previous_average_; }
  double last_average() const { return last_average_; }

 private:
  double previous_average_;
  double last_average_;
};

// Right-hand side of the amplitude equations in the order (A1, A2, A3, B),
// drive terms carrying exp(+-i Delta t) and cross-damping terms their
// exp(-+i omega t) factors.
class AmplitudeEquations {
 public:
  explicit AmplitudeEquations(const D2System& sys);

  StateVector operator()(double t, const StateVector& y) const;
  // Bound on |y''| for |y| <= 1.
  double curvature_bound() const;

 private:
  using Matrix = std::array<std::array<cplx, 4>, 4>;
  Matrix matrix_at(double t) const;

  D2System sys_;
  bool constant_;
  Matrix base_;
};

struct DynamicsOptions {
  double tol = 1e-8;        // integrator local error
  double t_final = 60.0;    // first horizon for Laplace integrals
  double t_max = 1e4;       // horizon may double up to this
  double tail_tol = 1e-7;   // |A_n| on the last 10% counts as decayed
  double epsilon = 1e-3;    // convergence factor when population stays trapped
  bool cross_terms = false;
};

AmplitudeTrajectory propagate(const D2System& sys, double t_final, double tol = 1e-8);

// Plateau of the norm over the last 10% of [0, t_final]; NotConverged when
// the two half-window averages differ by more than tol.
double trapped_fraction(const D2System& sys, double t_final, double tol = 1e-8);

// Integral_0^inf exp(-i delta_n t) A_n(t) dt with delta_n the branch-shifted
// detuning; the same convention as steady_state_amplitudes.
cplx branch_amplitude_numeric(const D2System& sys, int branch, double delta,
                              const DynamicsOptions& opts = {});

// All three branch amplitudes on a grid. Branches with Gamma_n = 0 are left
// at zero unless include_undamped is set.
std::vector<std::array<cplx, 3>> branch_amplitudes_numeric(const D2System& sys, const std::vector<double>& grid,
                                                           const DynamicsOptions& opts = {},
                                                           bool include_undamped = false);

SpectrumResult spectrum_time_domain(const D2System& sys, const std::vector<double>& grid,
                                    const DynamicsOptions& opts = {});

}  // namespace fgc
