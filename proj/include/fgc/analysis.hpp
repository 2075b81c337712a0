#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fgc/model.hpp"
#include "fgc/spectrum.hpp"

namespace fgc {

struct Peak {
  double location = 0.0;
  double height = 0.0;
  std::optional<double> fwhm;  // absent when a half-height crossing is missing
  int branch = 1;
};

struct PeakAnalysis {
  std::vector<Peak> peaks;
  double total_area = 0.0;
  std::array<double, 3> branch_areas{};
  std::vector<std::string> warnings;
};

struct AreaResult {
  double total = 0.0;
  std::array<double, 3> branches{};
};

struct ConservationReport {
  bool cross_terms = false;
  double emitted_spectral = 0.0;  // integral of S over the real line, S per cross_terms
  double emitted_dynamic = 0.0;   // 1 - trapped
  double trapped = 0.0;
  double defect = 0.0;            // |emitted_spectral - emitted_dynamic|
  double incoherent_area = 0.0;   // both spectral areas, whatever the flag
  double coherent_area = 0.0;
  double horizon = 0.0;           // t_final used for the trapped fraction
};

struct ComparisonMetrics {
  double max_rel_err = 0.0;
  double rms_err = 0.0;
  double max_abs_err_rel_peak = 0.0;
  std::size_t points = 0;
};

class GridTooNarrow : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

PeakAnalysis find_peaks(const SpectrumResult& spec, double prominence = 1e-3);

// Trapezoid over the grid. Throws GridTooNarrow when an edge value of the
// total exceeds 1e-4 of its maximum.
AreaResult integrated_area(const SpectrumResult& spec);

// Smallest 2 Im(pole) over emitting, damped poles; 0 if there are none.
double slowest_decay_rate(const SpectrumResult& spec);

// Spectral areas come from the pole expansion integrated exactly over the
// real line. Without cross terms this is Parseval's identity branch by
// branch, so the defect only measures integration error; with cross terms
// it picks up the inter-branch interference, which falls off with omega12.
ConservationReport conservation_check(const D2System& sys, bool cross_terms = false, double tol = 1e-8);

ComparisonMetrics compare_spectra(const SpectrumResult& a, const SpectrumResult& b);

}  // namespace fgc
