#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fgc/cli/scenario_io.hpp"

namespace fgc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitInputError = 2,
  kExitNumericalFailure = 3,
  kExitUnsolvable = 4,
};

inline constexpr const char* kToolVersion = "fgcsim 1.0.0";

// Entry point used by the fgcsim binary and by tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// "min:max:count", count >= 2, inclusive endpoints.
std::vector<double> parse_grid(const std::string& spec);

// Sweepable parameters: phase2, phase3, mag1..mag4, gamma1..gamma3.
// Throws SchemaError for any other name.
D2System with_parameter(D2System sys, const std::string& name, double value);

struct SweepSettings {
  std::string metric;  // trapped_fraction | total_area | peak_count | branch2_area
  std::vector<double> grid;
  double t_final = 60.0;
  double tol = 1e-8;
};

double sweep_metric(const D2System& sys, const SweepSettings& s);
std::vector<double> run_sweep(const D2System& base, const std::string& vary, const std::vector<double>& values,
                              const SweepSettings& s);

struct ValidationRow {
  std::string preset;
  std::string check;
  bool pass = false;
  std::string detail;
};

std::vector<ValidationRow> validate_preset(const std::string& name);

}  // namespace fgc::cli
