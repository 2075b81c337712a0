#include "fgc/cli/commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "fgc/analysis.hpp"
#include "fgc/cli/output.hpp"
#include "fgc/dynamics.hpp"
#include "fgc/spectrum.hpp"
#include "fgc/trapping.hpp"

namespace fgc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Unsolvable : public Error {
 public:
  using Error::Error;
};

// Re-labels numerical failures with the operation that raised them.
template <class F>
auto named(const std::string& op, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(op + ": " + e.what());
  } catch (const GridTooNarrow& e) {
    throw NumericalError(op + ": " + e.what());
  }
}

struct Style {
  bool colour = false;
  std::string pass() const { return colour ? "\x1b[32mPASS\x1b[0m" : "PASS"; }
  std::string fail() const { return colour ? "\x1b[31mFAIL\x1b[0m" : "FAIL"; }
};

Scenario resolve(const std::string& config, const std::string& preset_name) {
  if (config.empty() == preset_name.empty()) throw SchemaError("exactly one of --config or --preset is required");
  return config.empty() ? preset_scenario(preset_name) : load_scenario(config);
}

std::string scenario_label(const std::string& config, const std::string& preset_name) {
  return config.empty() ? "preset:" + preset_name : config;
}

std::string manifest_path(const std::string& primary) {
  fs::path p(primary);
  p.replace_extension(".manifest.json");
  return p.string();
}

void write_manifest(const std::string& primary, const std::string& command, const std::string& scenario,
                    const Scenario& sc, const std::vector<std::string>& outputs, double wall,
                    const std::vector<std::string>& args, std::vector<std::string>* listed = nullptr) {
  json m;
  m["command"] = command;
  m["scenario"] = scenario;
  m["parameters"] = scenario_to_json(sc);
  m["tool_version"] = kToolVersion;
  m["arguments"] = args;
  m["wall_time_s"] = wall;
  m["outputs"] = outputs;
  const auto path = manifest_path(primary);
  write_text_file(path, m.dump(2) + "\n");
  if (listed) listed->push_back(path);
}

std::vector<std::string> scenario_comments(const std::string& command, const std::string& label, const Scenario& sc) {
  return {std::string(kToolVersion) + " " + command, "scenario " + label, "parameters " + scenario_to_json(sc).dump()};
}

std::string format_for(const std::string& requested, const std::string& out) {
  if (!requested.empty()) {
    if (requested != "csv" && requested != "json") throw SchemaError("--format must be csv or json");
    return requested;
  }
  return fs::path(out).extension() == ".json" ? "json" : "csv";
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + suffix + ext;
}

bool drives_off(const D2System& s) {
  return std::all_of(s.drives.begin(), s.drives.end(), [](const DriveField& f) { return f.magnitude() == 0.0; });
}

// ---- spectrum -------------------------------------------------------------

struct SpectrumArgs {
  std::string config, preset, out, format, svg, grid = "-30:30:6001", method = "analytic";
  double tol = 1e-8;
  double t_final = 60.0;
  bool cross_terms = false;
};

int cmd_spectrum(const SpectrumArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.method != "analytic" && a.method != "timedomain" && a.method != "both") {
    throw SchemaError("--method must be analytic, timedomain or both");
  }
  const Scenario sc = resolve(a.config, a.preset);
  const auto grid = parse_grid(a.grid);
  const bool want_analytic = a.method != "timedomain";
  const bool want_time = a.method != "analytic";

  DynamicsOptions opts;
  opts.tol = a.tol;
  opts.t_final = a.t_final;
  opts.cross_terms = a.cross_terms;

  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  std::optional<SpectrumResult> analytic;
  std::optional<SpectrumResult> timed;

  if (const auto* d2 = std::get_if<D2System>(&sc)) {
    const D2System sys = validated(*d2);
    if (want_analytic) {
      require_analytic(sys);
      analytic = named("spectrum_analytic", [&] { return spectrum_analytic(sys, grid, a.cross_terms); });
    }
    if (want_time) timed = named("spectrum_time_domain", [&] { return spectrum_time_domain(sys, grid, opts); });
    if (drives_off(sys) && norm_sq(sys.initial) - std::norm(sys.initial[3]) == 0.0) {
      warnings.push_back("no emission: atom never excited");
    }
    if (!drives_off(sys) && fgc_check(sys).satisfied) notes.push_back("trapping condition satisfied: central branch dark");
  } else {
    const auto& d1 = std::get<D1System>(sc);
    if (a.cross_terms) throw SchemaError("--cross-terms applies to d2 scenarios only");
    if (want_analytic) analytic = named("d1_spectrum", [&] { return d1_spectrum(d1, grid); });
    if (want_time) {
      timed = named("spectrum_time_domain", [&] { return spectrum_time_domain(d1_to_chain(d1), grid, opts); });
    }
    const bool no_optical = d1.optical1.magnitude() == 0.0 && d1.optical2.magnitude() == 0.0;
    if (no_optical && d1.initial != D1Level::kE) warnings.push_back("no emission: atom never excited");
    if (d1_trapping_check(d1).satisfied && d1.initial == D1Level::kG3) {
      notes.push_back("trapping condition satisfied: atom dark");
    }
  }

  const SpectrumResult& primary = analytic ? *analytic : *timed;
  std::vector<std::string> annotations;
  for (const auto& w : warnings) annotations.push_back("warning: " + w);
  for (const auto& n : notes) annotations.push_back("note: " + n);
  for (const auto& line : annotations) err << line << '\n';

  const std::string label = scenario_label(a.config, a.preset);
  auto render = [&](const SpectrumResult& s, const std::string& fmt) {
    auto comments = scenario_comments("spectrum", label, sc);
    comments.push_back("method " + to_string(s.method) + (s.cross_terms ? " cross_terms" : ""));
    comments.insert(comments.end(), annotations.begin(), annotations.end());
    if (fmt == "json") {
      json j = spectrum_to_json(s, annotations);
      j["scenario"] = label;
      return dump_fixed(j);
    }
    return spectrum_csv(s, comments);
  };

  std::vector<std::string> outputs;
  if (a.out.empty()) {
    out << render(primary, a.format.empty() ? "csv" : format_for(a.format, ""));
  } else {
    const auto fmt = format_for(a.format, a.out);
    write_text_file(a.out, render(primary, fmt));
    outputs.push_back(a.out);
    if (analytic && timed) {
      const auto td_path = with_suffix(a.out, ".timedomain");
      write_text_file(td_path, render(*timed, fmt));
      outputs.push_back(td_path);
    }
  }
  if (analytic && timed) {
    const auto m = compare_spectra(*analytic, *timed);
    out << "max_rel_err = " << format_double(m.max_rel_err) << '\n';
    out << "rms_err = " << format_double(m.rms_err) << '\n';
    if (!a.out.empty()) {
      json cj{{"max_rel_err", m.max_rel_err},
              {"rms_err", m.rms_err},
              {"max_abs_err_rel_peak", m.max_abs_err_rel_peak},
              {"points", m.points}};
      const auto cmp_path = with_suffix(a.out, ".compare");
      fs::path p(cmp_path);
      p.replace_extension(".json");
      write_text_file(p.string(), dump_fixed(cj));
      outputs.push_back(p.string());
    }
  }
  if (!a.svg.empty()) {
    write_text_file(a.svg, spectrum_svg(primary, "S(delta): " + label));
    outputs.push_back(a.svg);
  }
  if (!outputs.empty()) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(outputs.front(), "spectrum", label, sc, outputs, wall, args);
  }
  return kExitOk;
}

// ---- trapping -------------------------------------------------------------

struct TrappingArgs {
  std::string config, preset, out, solved_out;
  double tol = 1e-9;
  bool solve = false;
  bool allow_gamma_mismatch = false;
};

json report_json(const TrappingReport& r) {
  json j;
  j["satisfied"] = r.satisfied;
  j["delta_coefficient_residual"] = {r.delta_coefficient_residual.real(), r.delta_coefficient_residual.imag()};
  j["constant_residual"] = {r.constant_residual.real(), r.constant_residual.imag()};
  j["magnitude_condition"] = r.magnitude_condition;
  j["phase_condition"] = r.phase_condition;
  j["gamma_condition"] = r.gamma_condition;
  if (r.solved_fields) {
    j["solved_fields"] = json::array();
    for (const auto& f : *r.solved_fields) j["solved_fields"].push_back({{"mag", f.magnitude()}, {"phase", f.phase()}});
  }
  return j;
}

int cmd_trapping(const TrappingArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = resolve(a.config, a.preset);
  const std::string label = scenario_label(a.config, a.preset);
  json j;
  j["scenario"] = label;
  std::vector<std::string> outputs;

  if (const auto* d2 = std::get_if<D2System>(&sc)) {
    D2System sys = validated(*d2);
    j["system"] = "d2";
    auto rep = fgc_check(sys, a.tol);
    const auto sgc = sgc_feasible(sys);
    j["sgc"] = {{"feasible", sgc.feasible},
                {"trivial", sgc.trivial},
                {"c0", {sgc.c0.real(), sgc.c0.imag()}},
                {"witness", sgc.witness}};
    if (a.solve) {
      if (sys.drives[2].magnitude() == 0.0) throw Unsolvable("unsolvable: |Omega3| = 0 leaves |Omega4| undetermined");
      if (std::abs(sys.gamma[0] - sys.gamma[2]) > a.tol && !a.allow_gamma_mismatch) {
        throw Unsolvable("unsolvable: Gamma1 != Gamma3 cannot be fixed by the drives (--allow-gamma-mismatch overrides)");
      }
      const auto fields = fgc_solve(sys.drives[0].magnitude(), sys.drives[1].magnitude(), sys.drives[2].magnitude(),
                                    sys.drives[1].phase());
      rep.solved_fields = fields;
      D2System solved = sys;
      solved.drives = fields;
      j["solved_satisfied"] = fgc_check(solved, a.tol).satisfied;
      std::string path = a.solved_out;
      if (path.empty()) {
        path = a.config.empty() ? a.preset + ".solved.json" : with_suffix(a.config, ".solved");
      }
      write_text_file(path, scenario_to_json(Scenario{solved}).dump(2) + "\n");
      outputs.push_back(path);
      j["solved_scenario"] = path;
    }
    j["report"] = report_json(rep);
  } else {
    const auto& d1 = std::get<D1System>(sc);
    if (a.solve) throw Unsolvable("unsolvable: --solve completes d2 drive sets only");
    j["system"] = "d1";
    j["report"] = report_json(d1_trapping_check(d1, a.tol));
  }

  const std::string text = dump_fixed(j);
  out << text;
  if (!a.out.empty()) {
    write_text_file(a.out, text);
    outputs.insert(outputs.begin(), a.out);
  }
  if (!outputs.empty()) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(outputs.front(), "trapping", label, sc, outputs, wall, args);
  }
  return kExitOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string config, preset, out, vary, range, metric = "total_area", grid = "-30:30:6001";
  double tol = 1e-8;
  double t_final = 60.0;
};

template <class F>
std::vector<double> parallel_map(std::size_t n, F&& f) {
  std::vector<double> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          out[i] = f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

int cmd_sweep(const SweepArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = resolve(a.config, a.preset);
  const auto* d2 = std::get_if<D2System>(&sc);
  if (!d2) throw SchemaError("sweep supports d2 scenarios only");
  if (a.vary.empty() || a.range.empty()) throw SchemaError("sweep needs --vary and --range");
  with_parameter(*d2, a.vary, 0.0);  // rejects unknown names up front
  const auto values = parse_grid(a.range);
  SweepSettings s{a.metric, parse_grid(a.grid), a.t_final, a.tol};
  const auto metric = run_sweep(*d2, a.vary, values, s);

  const std::string label = scenario_label(a.config, a.preset);
  std::string csv;
  for (const auto& c : scenario_comments("sweep", label, sc)) csv += "# " + c + "\n";
  csv += "# vary " + a.vary + " metric " + a.metric + "\n";
  csv += "value," + a.metric + "\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv += format_double(values[i]) + ",";
    csv += a.metric == "peak_count" ? std::to_string(static_cast<long long>(metric[i])) : format_double(metric[i]);
    csv += "\n";
  }
  if (a.out.empty()) {
    out << csv;
  } else {
    write_text_file(a.out, csv);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(a.out, "sweep", label, sc, {a.out}, wall, args);
  }
  return kExitOk;
}

// ---- validate -------------------------------------------------------------

struct ValidateArgs {
  std::string target = "all", out;
};

int cmd_validate(const ValidateArgs& a, const std::vector<std::string>& args, std::ostream& out, const Style& style) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> names = a.target == "all" ? preset_names() : std::vector<std::string>{a.target};
  std::vector<ValidationRow> rows;
  for (const auto& n : names) {
    auto r = validate_preset(n);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  std::size_t w_preset = 6, w_check = 5;
  for (const auto& r : rows) {
    w_preset = std::max(w_preset, r.preset.size());
    w_check = std::max(w_check, r.check.size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  out << pad("preset", w_preset) << "  " << pad("check", w_check) << "  result  detail\n";
  bool ok = true;
  json table = json::array();
  for (const auto& r : rows) {
    ok = ok && r.pass;
    out << pad(r.preset, w_preset) << "  " << pad(r.check, w_check) << "  " << (r.pass ? style.pass() : style.fail())
        << "    " << r.detail << '\n';
    table.push_back({{"preset", r.preset}, {"check", r.check}, {"pass", r.pass}, {"detail", r.detail}});
  }
  out << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  if (!a.out.empty()) {
    write_text_file(a.out, dump_fixed(json{{"target", a.target}, {"passed", ok}, {"checks", table}}));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Scenario sc = names.size() == 1 ? preset_scenario(names.front()) : Scenario{D2System{}};
    write_manifest(a.out, "validate", a.target, sc, {a.out}, wall, args);
  }
  return ok ? kExitOk : kExitValidationFailed;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw SchemaError("grid spec must be min:max:count, got '" + spec + "'");
  double lo = 0.0, hi = 0.0;
  long long count = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("min");
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("max");
    count = std::stoll(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw SchemaError("grid spec must be min:max:count with numbers, got '" + spec + "'");
  }
  if (count < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw SchemaError("grid spec needs count >= 2 and max > min, got '" + spec + "'");
  }
  return linear_grid(lo, hi, static_cast<std::size_t>(count));
}

D2System with_parameter(D2System sys, const std::string& name, double value) {
  auto set_mag = [&](std::size_t i) { sys.drives[i] = DriveField(value, sys.drives[i].phase()); };
  auto set_phase = [&](std::size_t i) { sys.drives[i] = DriveField(sys.drives[i].magnitude(), value); };
  if (name == "phase2") set_phase(1);
  else if (name == "phase3") set_phase(2);
  else if (name == "mag1") set_mag(0);
  else if (name == "mag2") set_mag(1);
  else if (name == "mag3") set_mag(2);
  else if (name == "mag4") set_mag(3);
  else if (name == "gamma1") sys.gamma[0] = value;
  else if (name == "gamma2") sys.gamma[1] = value;
  else if (name == "gamma3") sys.gamma[2] = value;
  else throw SchemaError("unknown sweep parameter '" + name + "'");
  return sys;
}

double sweep_metric(const D2System& sys, const SweepSettings& s) {
  const D2System v = validated(sys);
  if (s.metric == "trapped_fraction") {
    return named("trapped_fraction", [&] { return trapped_fraction(v, s.t_final, s.tol); });
  }
  if (s.metric == "total_area" || s.metric == "branch2_area" || s.metric == "peak_count") {
    const auto spec = named("spectrum_analytic", [&] { return spectrum_analytic(v, s.grid); });
    if (s.metric == "peak_count") return static_cast<double>(find_peaks(spec).peaks.size());
    const auto area = named("integrated_area", [&] { return integrated_area(spec); });
    return s.metric == "total_area" ? area.total : area.branches[1];
  }
  throw SchemaError("unknown sweep metric '" + s.metric + "'");
}

std::vector<double> run_sweep(const D2System& base, const std::string& vary, const std::vector<double>& values,
                              const SweepSettings& s) {
  if (s.metric != "trapped_fraction" && s.metric != "total_area" && s.metric != "peak_count" &&
      s.metric != "branch2_area") {
    throw SchemaError("unknown sweep metric '" + s.metric + "'");
  }
  return parallel_map(values.size(), [&](std::size_t i) {
    try {
      return sweep_metric(with_parameter(base, vary, values[i]), s);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("sweep value rejected: ") + e.what());
    }
  });
}

std::vector<ValidationRow> validate_preset(const std::string& name) {
  const ScenarioPreset p = preset(name);
  const ExpectedSignature& ex = p.expected;
  std::vector<ValidationRow> rows;
  auto add = [&](std::string check, bool pass, std::string detail) {
    rows.push_back({name, std::move(check), pass, std::move(detail)});
  };

  const bool is_d2 = std::holds_alternative<D2System>(p.system);
  const D2System chain = is_d2 ? std::get<D2System>(p.system) : d1_to_chain(std::get<D1System>(p.system));
  const auto grid = is_d2 ? linear_grid(-30.0, 30.0, 6001) : linear_grid(-6.0, 6.0, 6001);

  try {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
      const auto q = characteristic_quartic(chain, branch_shift(chain, n));
      for (const auto& r : quartic_roots(q).roots) worst = std::max(worst, std::abs(q(r)) / q.scale());
    }
    add("quartic-roots", worst < 1e-9, "max |D(root)|/scale = " + fmt_g(worst));

    const SpectrumResult spec = is_d2 ? spectrum_analytic(chain, grid) : d1_spectrum(std::get<D1System>(p.system), grid);
    const auto peaks = find_peaks(spec);
    add("peak-count", static_cast<int>(peaks.peaks.size()) == ex.peak_count,
        std::to_string(peaks.peaks.size()) + " peaks, expected " + std::to_string(ex.peak_count));

    if (ex.fwhm) {
      const bool have = peaks.peaks.size() == 1 && peaks.peaks[0].fwhm;
      const double w = have ? *peaks.peaks[0].fwhm : 0.0;
      add("fwhm", have && std::abs(w - *ex.fwhm) <= 0.02 * *ex.fwhm, "FWHM " + fmt_g(w) + ", expected " + fmt_g(*ex.fwhm));
    }
    if (ex.splitting) {
      const bool have = peaks.peaks.size() == 2;
      const double split = have ? peaks.peaks[1].location - peaks.peaks[0].location : 0.0;
      add("splitting", have && std::abs(split - *ex.splitting) <= 0.02 * *ex.splitting,
          "splitting " + fmt_g(split) + ", expected " + fmt_g(*ex.splitting));
    }
    if (ex.trapping) {
      const bool sat = is_d2 ? fgc_check(chain).satisfied : d1_trapping_check(std::get<D1System>(p.system)).satisfied;
      add("trapping-verdict", sat == *ex.trapping,
          std::string("satisfied = ") + (sat ? "true" : "false"));
    }
    if (ex.branch2_dark) {
      const double m = *std::max_element(spec.branch_intensity[1].begin(), spec.branch_intensity[1].end());
      add("branch2-dark", m < 1e-20, "max branch-2 intensity " + fmt_g(m));
    }
    if (ex.zero_emission) {
      const double m = *std::max_element(spec.total.begin(), spec.total.end());
      add("zero-emission", m < 1e-20, "max intensity " + fmt_g(m));
    }
    {
      // Symmetric presets: every shipped configuration has S(delta) = S(-delta).
      double asym = 0.0;
      double peak = 0.0;
      for (std::size_t i = 0; i < spec.total.size(); ++i) {
        asym = std::max(asym, std::abs(spec.total[i] - spec.total[spec.total.size() - 1 - i]));
        peak = std::max(peak, spec.total[i]);
      }
      if (name != "two-level" && name != "autler-townes-doublet" && name != "at-quartet") {
        add("symmetry", asym <= 1e-9 * std::max(peak, 1e-300) || peak == 0.0,
            "max |S(d) - S(-d)| / peak = " + fmt_g(peak > 0.0 ? asym / peak : 0.0));
      }
    }

    const auto small = is_d2 ? linear_grid(-30.0, 30.0, 101) : linear_grid(-6.0, 6.0, 101);
    if (is_d2) {
      double worst_rel = 0.0;
      int skipped = 0;
      for (double d : small) {
        try {
          const auto a = steady_state_amplitudes(chain, d);
          const auto b = laplace_solve_oracle(chain, d);
          double scale = 0.0;
          for (std::size_t k = 0; k < 3; ++k) scale = std::max(scale, std::abs(b[k]));
          if (scale == 0.0) continue;
          for (std::size_t k = 0; k < 3; ++k) worst_rel = std::max(worst_rel, std::abs(a[k] - b[k]) / scale);
        } catch (const SingularSystem&) {
          ++skipped;  // an undamped, non-emitting level sits exactly on this grid point
        }
      }
      add("oracle-linear-solve", worst_rel <= 1e-10,
          "max relative difference " + fmt_g(worst_rel) + (skipped ? ", " + std::to_string(skipped) + " singular points skipped" : ""));
    }
    const SpectrumResult an = is_d2 ? spectrum_analytic(chain, small) : d1_spectrum(std::get<D1System>(p.system), small);
    const SpectrumResult td = spectrum_time_domain(chain, small);
    if (ex.zero_emission) {
      const double m = *std::max_element(td.total.begin(), td.total.end());
      add("oracle-time-domain", m < 1e-12, "time-domain max intensity " + fmt_g(m));
    } else {
      const auto m = compare_spectra(an, td);
      add("oracle-time-domain", m.max_rel_err <= 1e-3, "max_rel_err " + fmt_g(m.max_rel_err));
    }
  } catch (const std::exception& e) {
    add("evaluation", false, e.what());
  }
  return rows;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fgcsim: spontaneous-emission spectra and trapping conditions of driven four-amplitude loops"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SpectrumArgs sa;
  auto* sp = app.add_subcommand("spectrum", "compute the emission spectrum");
  sp->add_option("--config", sa.config, "scenario JSON file");
  sp->add_option("--preset", sa.preset, "built-in preset instead of --config");
  sp->add_option("--grid", sa.grid, "detuning grid min:max:count")->capture_default_str();
  sp->add_option("--method", sa.method, "analytic | timedomain | both")->capture_default_str();
  sp->add_option("--out", sa.out, "result file (stdout when omitted)");
  sp->add_option("--format", sa.format, "csv | json (default from --out extension)");
  sp->add_option("--svg", sa.svg, "SVG plot path");
  sp->add_option("--tol", sa.tol, "integrator tolerance for the time-domain path")->capture_default_str();
  sp->add_option("--t-final", sa.t_final, "initial time horizon for the time-domain path")->capture_default_str();
  sp->add_flag("--cross-terms", sa.cross_terms, "include inter-branch interference terms");

  TrappingArgs ta;
  auto* tp = app.add_subcommand("trapping", "evaluate the trapping conditions");
  tp->add_option("--config", ta.config, "scenario JSON file");
  tp->add_option("--preset", ta.preset, "built-in preset instead of --config");
  tp->add_option("--out", ta.out, "also write the report here");
  tp->add_option("--tol", ta.tol, "relative tolerance of the conditions")->capture_default_str();
  tp->add_flag("--solve", ta.solve, "complete |Omega4| and phi3 so the condition holds");
  tp->add_option("--solved-out", ta.solved_out, "where --solve writes the amended scenario");
  tp->add_flag("--allow-gamma-mismatch", ta.allow_gamma_mismatch, "solve even when Gamma1 != Gamma3");

  SweepArgs wa;
  auto* wp = app.add_subcommand("sweep", "sweep one parameter and record a metric");
  wp->add_option("--config", wa.config, "scenario JSON file");
  wp->add_option("--preset", wa.preset, "built-in preset instead of --config");
  wp->add_option("--vary", wa.vary, "phase2 | phase3 | mag1..mag4 | gamma1..gamma3");
  wp->add_option("--range", wa.range, "sweep values min:max:count");
  wp->add_option("--metric", wa.metric, "trapped_fraction | total_area | peak_count | branch2_area")->capture_default_str();
  wp->add_option("--grid", wa.grid, "detuning grid for spectral metrics")->capture_default_str();
  wp->add_option("--out", wa.out, "CSV path (stdout when omitted)");
  wp->add_option("--tol", wa.tol, "integrator tolerance")->capture_default_str();
  wp->add_option("--t-final", wa.t_final, "horizon for trapped_fraction")->capture_default_str();

  ValidateArgs va;
  auto* vp = app.add_subcommand("validate", "check presets against their expected signatures");
  vp->add_option("target", va.target, "preset name or 'all'")->capture_default_str();
  vp->add_option("--out", va.out, "write the table as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitInputError;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  const char* no_colour = std::getenv("NO_COLOR");
  const Style style{&out == &std::cout && isatty(STDOUT_FILENO) && (no_colour == nullptr || *no_colour == '\0')};

  try {
    if (sp->parsed()) return cmd_spectrum(sa, args, out, err);
    if (tp->parsed()) return cmd_trapping(ta, args, out);
    if (wp->parsed()) return cmd_sweep(wa, args, out);
    if (vp->parsed()) return cmd_validate(va, args, out, style);
  } catch (const Unsolvable& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnsolvable;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InvalidSystem& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const UnknownPreset& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const NotAnalyticAdmissible& e) {
    err << "error: " << e.what() << " (use --method timedomain)\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  return kExitInputError;
}

}  // namespace fgc::cli
