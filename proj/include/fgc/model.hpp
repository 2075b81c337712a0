#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fgc/types.hpp"

namespace fgc {

class DriveField {
 public:
  DriveField() = default;
  // Throws std::invalid_argument for a negative or non-finite magnitude.
  DriveField(double magnitude, double phase);

  double magnitude() const { return magnitude_; }
  double phase() const { return phase_; }
  cplx value() const { return std::polar(magnitude_, phase_); }

  bool operator==(const DriveField&) const = default;

 private:
  double magnitude_ = 0.0;
  double phase_ = 0.0;
};

enum class Level { kA1 = 0, kA2 = 1, kA3 = 2, kB = 3 };

StateVector basis_state(Level level);

// Five-level D2 loop. drives[0..3] hold Omega_1..Omega_4:
// Omega_1 couples B-a1, Omega_2 a1-a2, Omega_3 a2-a3, Omega_4 a3-B.
struct D2System {
  std::array<double, 3> gamma{1.0, 1.0, 1.0};
  double omega12 = 13.0;
  double omega23 = 13.0;
  std::array<DriveField, 4> drives{};
  std::array<double, 4> detunings{};
  std::array<double, 3> alignments{};
  StateVector initial = basis_state(Level::kB);

  cplx omega(int n) const { return drives.at(static_cast<std::size_t>(n - 1)).value(); }
};

enum class D1Level { kG1, kG2, kG3, kE };

struct D1System {
  double gamma = 1.0;
  DriveField optical1;  // phase phi_3
  DriveField optical2;  // phase phi_2
  DriveField microwave1;
  DriveField microwave2;
  D1Level initial = D1Level::kG3;
};

enum class ValidationCode {
  kNonPositiveRate,
  kNonPositiveSplitting,
  kUnnormalizedInitialState,
  kAlignmentOutOfRange,
  kNonFinite,
};

std::string to_string(ValidationCode code);

struct ValidationIssue {
  ValidationCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  bool analytic_admissible = false;

  bool ok() const { return errors.empty(); }
  bool has(ValidationCode code) const;
};

class InvalidSystem : public Error {
 public:
  explicit InvalidSystem(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

class NotAnalyticAdmissible : public Error {
 public:
  using Error::Error;
};

class UnknownPreset : public Error {
 public:
  using Error::Error;
};

// Physical D2 scenario: every Gamma > 0 and both splittings > 0.
ValidationReport validate_system(const D2System& sys);
// Same checks but admits Gamma = 0 and zero splittings. Used for the mapped
// D1 chain and for idealised limits (pure Rabi oscillation).
ValidationReport validate_chain(const D2System& sys);
ValidationReport validate_d1(const D1System& sys);

// Returns sys unchanged, or throws InvalidSystem.
D2System validated(const D2System& sys);

// Throws NotAnalyticAdmissible unless detunings and alignments vanish and
// omega12 == omega23 (relative 1e-9). Also runs validate_chain.
void require_analytic(const D2System& sys);

D2System d1_to_chain(const D1System& sys);

struct ExpectedSignature {
  int peak_count = 0;
  std::optional<double> fwhm;
  std::optional<double> splitting;
  std::optional<bool> trapping;
  bool branch2_dark = false;
  bool zero_emission = false;
  std::string description;
};

struct ScenarioPreset {
  std::string name;
  std::variant<D2System, D1System> system;
  ExpectedSignature expected;
};

ScenarioPreset preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace fgc
