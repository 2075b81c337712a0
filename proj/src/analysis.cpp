#include "fgc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fgc/dynamics.hpp"

namespace fgc {

namespace {

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

double crossing(double x0, double y0, double x1, double y1, double level) {
  return x0 + (level - y0) / (y1 - y0) * (x1 - x0);
}

std::optional<double> half_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  const double peak = y[i];
  const double half = peak / 2.0;
  std::optional<double> left;
  std::optional<double> right;
  for (std::size_t j = i; j-- > 0;) {
    if (y[j] > peak) break;
    if (y[j] <= half) {
      left = crossing(x[j], y[j], x[j + 1], y[j + 1], half);
      break;
    }
  }
  for (std::size_t j = i + 1; j < y.size(); ++j) {
    if (y[j] > peak) break;
    if (y[j] <= half) {
      right = crossing(x[j - 1], y[j - 1], x[j], y[j], half);
      break;
    }
  }
  if (!left || !right) return std::nullopt;
  return *right - *left;
}

}  // namespace

PeakAnalysis find_peaks(const SpectrumResult& spec, double prominence) {
  const auto& x = spec.grid;
  const auto& y = spec.total;
  PeakAnalysis out;
  if (x.size() != y.size()) throw std::invalid_argument("spectrum grid and total differ in length");
  out.total_area = trapezoid(x, y);
  for (std::size_t b = 0; b < 3; ++b) out.branch_areas[b] = trapezoid(x, spec.branch_intensity[b]);
  if (x.size() < 3) return out;

  double min_width = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < 3; ++b) {
    if (spec.branch_weight[b] == 0.0) continue;
    for (const auto& t : spec.branch_poles[b]) {
      if (!t.removable && t.width() > 0.0) min_width = std::min(min_width, t.width());
    }
  }
  double spacing = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) spacing = std::max(spacing, x[i] - x[i - 1]);
  if (std::isfinite(min_width) && spacing > min_width / 10.0) {
    out.warnings.push_back("GridTooCoarse: spacing " + std::to_string(spacing) + " exceeds narrowest width " +
                           std::to_string(min_width) + " / 10");
  }

  const double ymax = *std::max_element(y.begin(), y.end());
  if (!(ymax > 0.0)) return out;
  const double threshold = prominence * ymax;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > threshold)) continue;
    Peak p;
    // Parabolic refinement through the three samples around the maximum.
    const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
    double off = 0.0;
    if (denom < 0.0) off = std::clamp(0.5 * (y[i - 1] - y[i + 1]) / denom, -0.5, 0.5);
    const double h = off >= 0.0 ? x[i + 1] - x[i] : x[i] - x[i - 1];
    p.location = x[i] + off * h;
    p.height = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * off;
    p.fwhm = half_width(x, y, i);
    std::size_t best = 0;
    for (std::size_t b = 1; b < 3; ++b) {
      if (spec.branch_intensity[b][i] > spec.branch_intensity[best][i]) best = b;
    }
    p.branch = static_cast<int>(best) + 1;
    out.peaks.push_back(p);
  }
  return out;
}

AreaResult integrated_area(const SpectrumResult& spec) {
  const auto& y = spec.total;
  if (y.size() < 2) throw std::invalid_argument("integrated_area needs at least two grid points");
  const double ymax = *std::max_element(y.begin(), y.end());
  if (ymax > 0.0 && std::max(y.front(), y.back()) > 1e-4 * ymax) {
    throw GridTooNarrow("GridTooNarrow: edge intensity exceeds 1e-4 of the maximum");
  }
  AreaResult r;
  r.total = trapezoid(spec.grid, y);
  for (std::size_t b = 0; b < 3; ++b) r.branches[b] = trapezoid(spec.grid, spec.branch_intensity[b]);
  return r;
}

double slowest_decay_rate(const SpectrumResult& spec) {
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < 3; ++b) {
    if (spec.branch_weight[b] == 0.0) continue;
    for (const auto& t : spec.branch_poles[b]) {
      if (!t.removable && !t.trapped && t.width() > 0.0) rate = std::min(rate, t.width());
    }
  }
  return std::isfinite(rate) ? rate : 0.0;
}

ConservationReport conservation_check(const D2System& sys, bool cross_terms, double tol) {
  require_analytic(sys);
  SpectrumResult poles;
  poles.branch_poles = pole_expansion(sys);
  poles.branch_weight = sys.gamma;

  ConservationReport r;
  r.cross_terms = cross_terms;
  r.incoherent_area = exact_spectral_area(poles, false);
  r.coherent_area = exact_spectral_area(poles, true);
  r.emitted_spectral = cross_terms ? r.coherent_area : r.incoherent_area;

  // Run the dynamics until the slowest emitting mode is down to ~e^-28.
  const double rate = slowest_decay_rate(poles);
  r.horizon = rate > 0.0 ? std::clamp(28.0 / rate, 60.0, 1e5) : 60.0;
  r.trapped = trapped_fraction(sys, r.horizon, tol);
  r.emitted_dynamic = 1.0 - r.trapped;
  r.defect = std::abs(r.emitted_spectral - r.emitted_dynamic);
  return r;
}

ComparisonMetrics compare_spectra(const SpectrumResult& a, const SpectrumResult& b) {
  if (a.grid.size() != b.grid.size()) throw GridMismatch("GridMismatch: grids differ in length");
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    if (std::abs(a.grid[i] - b.grid[i]) > 1e-12 * std::max(1.0, std::abs(a.grid[i]))) {
      throw GridMismatch("GridMismatch: grids differ at index " + std::to_string(i));
    }
  }
  ComparisonMetrics m;
  double peak = 0.0;
  for (std::size_t i = 0; i < a.total.size(); ++i) peak = std::max({peak, a.total[i], b.total[i]});
  if (!(peak > 0.0)) return m;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < a.total.size(); ++i) {
    const double big = std::max(a.total[i], b.total[i]);
    if (!(big > 1e-8 * peak)) continue;
    const double diff = std::abs(a.total[i] - b.total[i]);
    const double rel = diff / big;
    m.max_rel_err = std::max(m.max_rel_err, rel);
    m.max_abs_err_rel_peak = std::max(m.max_abs_err_rel_peak, diff / peak);
    sum_sq += rel * rel;
    ++m.points;
  }
  if (m.points > 0) m.rms_err = std::sqrt(sum_sq / static_cast<double>(m.points));
  return m;
}

}  // namespace fgc
