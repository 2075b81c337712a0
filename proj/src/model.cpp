#include "fgc/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fgc {

DriveField::DriveField(double magnitude, double phase) {
  if (!std::isfinite(magnitude) || magnitude < 0.0) {
    throw std::invalid_argument("drive magnitude must be finite and non-negative");
  }
  if (!std::isfinite(phase)) throw std::invalid_argument("drive phase must be finite");
  magnitude_ = magnitude;
  phase_ = wrap_phase(phase);
}

StateVector basis_state(Level level) {
  StateVector v{};
  v[static_cast<std::size_t>(level)] = 1.0;
  return v;
}

std::string to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::kNonPositiveRate: return "NonPositiveRate";
    case ValidationCode::kNonPositiveSplitting: return "NonPositiveSplitting";
    case ValidationCode::kUnnormalizedInitialState: return "UnnormalizedInitialState";
    case ValidationCode::kAlignmentOutOfRange: return "AlignmentOutOfRange";
    case ValidationCode::kNonFinite: return "NonFinite";
  }
  return "Unknown";
}

bool ValidationReport::has(ValidationCode code) const {
  return std::any_of(errors.begin(), errors.end(),
                     [code](const ValidationIssue& e) { return e.code == code; });
}

namespace {

std::string join_issues(const ValidationReport& r) {
  std::ostringstream os;
  os << "invalid system:";
  for (const auto& e : r.errors) os << ' ' << to_string(e.code) << " (" << e.message << ')';
  return os.str();
}

ValidationReport validate_impl(const D2System& sys, bool strict) {
  ValidationReport r;
  auto add = [&r](ValidationCode c, std::string msg) { r.errors.push_back({c, std::move(msg)}); };

  for (std::size_t i = 0; i < 3; ++i) {
    const double g = sys.gamma[i];
    const std::string name = "gamma" + std::to_string(i + 1);
    if (!std::isfinite(g)) {
      add(ValidationCode::kNonFinite, name);
    } else if (strict ? g <= 0.0 : g < 0.0) {
      add(ValidationCode::kNonPositiveRate, name + " = " + std::to_string(g));
    }
  }
  for (auto [w, name] : {std::pair{sys.omega12, "omega12"}, std::pair{sys.omega23, "omega23"}}) {
    if (!std::isfinite(w)) {
      add(ValidationCode::kNonFinite, name);
    } else if (strict ? w <= 0.0 : w < 0.0) {
      add(ValidationCode::kNonPositiveSplitting, std::string(name) + " = " + std::to_string(w));
    }
  }
  for (double d : sys.detunings) {
    if (!std::isfinite(d)) add(ValidationCode::kNonFinite, "detuning");
  }

  const auto& p = sys.alignments;
  bool range_ok = true;
  for (double v : p) {
    if (!std::isfinite(v) || std::abs(v) > 1.0) range_ok = false;
  }
  if (!range_ok) {
    add(ValidationCode::kAlignmentOutOfRange, "|p_i| must not exceed 1");
  } else {
    // The cross-damping matrix sqrt(G_i G_j) p_ij must be positive semidefinite,
    // otherwise the norm can grow. Its sign pattern is fixed by the Gram matrix.
    const double det = 1.0 + 2.0 * p[0] * p[1] * p[2] - p[0] * p[0] - p[1] * p[1] - p[2] * p[2];
    if (det < -1e-12) add(ValidationCode::kAlignmentOutOfRange, "alignment set is not a valid Gram matrix");
  }

  bool finite_state = true;
  for (const auto& z : sys.initial) finite_state = finite_state && std::isfinite(z.real()) && std::isfinite(z.imag());
  if (!finite_state) {
    add(ValidationCode::kNonFinite, "initial state");
  } else if (std::abs(norm_sq(sys.initial) - 1.0) > 1e-9) {
    add(ValidationCode::kUnnormalizedInitialState, "norm^2 = " + std::to_string(norm_sq(sys.initial)));
  }

  const bool resonant = std::all_of(sys.detunings.begin(), sys.detunings.end(), [](double d) { return d == 0.0; });
  const bool aligned_off = std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; });
  const double wscale = std::max({std::abs(sys.omega12), std::abs(sys.omega23), 1e-300});
  const bool equal_split = std::abs(sys.omega12 - sys.omega23) <= 1e-9 * wscale;
  r.analytic_admissible = r.ok() && resonant && aligned_off && equal_split;
  return r;
}

}  // namespace

InvalidSystem::InvalidSystem(ValidationReport report)
    : Error(join_issues(report)), report_(std::move(report)) {}

ValidationReport validate_system(const D2System& sys) { return validate_impl(sys, true); }

ValidationReport validate_chain(const D2System& sys) { return validate_impl(sys, false); }

ValidationReport validate_d1(const D1System& sys) {
  ValidationReport r;
  if (!std::isfinite(sys.gamma)) {
    r.errors.push_back({ValidationCode::kNonFinite, "gamma"});
  } else if (sys.gamma <= 0.0) {
    r.errors.push_back({ValidationCode::kNonPositiveRate, "gamma = " + std::to_string(sys.gamma)});
  }
  r.analytic_admissible = r.ok();
  return r;
}

D2System validated(const D2System& sys) {
  auto r = validate_system(sys);
  if (!r.ok()) throw InvalidSystem(std::move(r));
  return sys;
}

void require_analytic(const D2System& sys) {
  auto r = validate_chain(sys);
  if (!r.ok()) throw InvalidSystem(std::move(r));
  if (!r.analytic_admissible) {
    throw NotAnalyticAdmissible(
        "analytic path needs zero detunings, zero alignments and omega12 == omega23");
  }
}

D2System d1_to_chain(const D1System& sys) {
  auto r = validate_d1(sys);
  if (!r.ok()) throw InvalidSystem(std::move(r));
  // Central placement: e sits in the a2 slot, g2/g1 on the sides, g3 as B.
  D2System c;
  c.gamma = {0.0, sys.gamma, 0.0};
  c.omega12 = 0.0;
  c.omega23 = 0.0;
  c.drives = {sys.microwave2, sys.optical2, sys.optical1, sys.microwave1};
  switch (sys.initial) {
    case D1Level::kG1: c.initial = basis_state(Level::kA3); break;
    case D1Level::kG2: c.initial = basis_state(Level::kA1); break;
    case D1Level::kG3: c.initial = basis_state(Level::kB); break;
    case D1Level::kE: c.initial = basis_state(Level::kA2); break;
  }
  return c;
}

namespace {

D2System d2_with(std::array<double, 4> mags, double phi2, double phi3) {
  D2System s;
  s.drives = {DriveField(mags[0], 0.0), DriveField(mags[1], phi2), DriveField(mags[2], phi3),
              DriveField(mags[3], 0.0)};
  return s;
}

D1System d1_with(double o1, double o2, double m1, double m2, double phi2, double phi3) {
  D1System s;
  s.optical1 = DriveField(o1, phi3);
  s.optical2 = DriveField(o2, phi2);
  s.microwave1 = DriveField(m1, 0.0);
  s.microwave2 = DriveField(m2, 0.0);
  return s;
}

using Registry = std::map<std::string, ScenarioPreset>;

Registry build_registry() {
  Registry reg;
  auto add = [&reg](ScenarioPreset p) { reg.emplace(p.name, std::move(p)); };
  constexpr double pi = kPi;

  {
    D2System s;
    s.initial = basis_state(Level::kA1);
    ExpectedSignature e;
    e.peak_count = 1;
    e.fwhm = 1.0;
    e.description = "single Lorentzian of width Gamma1 centred on branch 1";
    add({"two-level", s, e});
  }
  {
    D2System s = d2_with({5.0, 0.0, 0.0, 0.0}, 0.0, 0.0);
    ExpectedSignature e;
    e.peak_count = 2;
    e.splitting = 10.0;
    e.description = "Autler-Townes doublet of branch 1 split by 2|Omega1|";
    add({"autler-townes-doublet", s, e});
  }
  {
    D2System s = d2_with({1.0, 2.0, 1.0, 3.0}, pi / 2.0, 0.0);
    ExpectedSignature e;
    e.peak_count = 12;
    e.trapping = false;
    e.description = "four dressed lines on every branch";
    add({"at-quartet", s, e});
  }
  {
    D2System s = d2_with({2.0, 1.0, 1.0, 2.0}, pi, 0.0);
    ExpectedSignature e;
    e.peak_count = 4;
    e.trapping = true;
    e.branch2_dark = true;
    e.description = "central branch dark, two lines per side branch";
    add({"fig2-trapping", s, e});
  }
  {
    D2System s = d2_with({2.0, 1.0, 1.0, 2.0}, pi / 2.0, 3.0 * pi / 2.0);
    ExpectedSignature e;
    e.peak_count = 9;
    e.trapping = false;
    e.description = "all branches emit";
    add({"fig2-notrapping", s, e});
  }
  {
    ExpectedSignature e;
    e.peak_count = 0;
    e.trapping = true;
    e.zero_emission = true;
    e.description = "whole atom dark";
    add({"d1-trapping", d1_with(1.0, 1.0, 1.0, 1.0, pi, 0.0), e});
    e.description = "whole atom dark, all fields equal";
    add({"d1-fig3c", d1_with(1.0, 1.0, 1.0, 1.0, pi, 0.0), e});
    e.description = "whole atom dark, optical fields twice the microwave ones";
    add({"d1-fig3f", d1_with(2.0, 2.0, 1.0, 1.0, pi, 0.0), e});
  }
  {
    ExpectedSignature e;
    e.peak_count = 3;
    e.trapping = false;
    e.description = "narrow symmetric pair on a broad central line";
    add({"d1-fig3a", d1_with(0.5, 0.5, 1.0, 1.0, pi / 2.0, 3.0 * pi / 2.0), e});
    add({"d1-fig3b", d1_with(0.5, 0.5, 1.0, 1.0, 3.0 * pi / 2.0, pi / 2.0), e});
  }
  {
    ExpectedSignature e;
    e.peak_count = 4;
    e.trapping = false;
    e.description = "four lines, narrow outer pair";
    add({"d1-fig3d", d1_with(0.1, 1.0, 1.0, 1.0, 3.0 * pi / 2.0, pi / 2.0), e});
    add({"d1-fig3e", d1_with(0.1, 1.0, 1.0, 1.0, pi / 2.0, 3.0 * pi / 2.0), e});
  }
  return reg;
}

const Registry& registry() {
  static const Registry reg = build_registry();
  return reg;
}

}  // namespace

ScenarioPreset preset(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw UnknownPreset("unknown preset: " + name);
  return it->second;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, p] : registry()) names.push_back(name);
  return names;
}

}  // namespace fgc
