#include "fgc/cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fgc::cli {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

void dump_value(const json& j, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(key).dump() + ": ";
        dump_value(value, indent, depth + 1, out);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; long numeric columns are the bulk.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_value(j[i], indent, depth + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_value(j[i], indent, depth + 1, out);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_fixed(const json& j, int indent) {
  std::string out;
  dump_value(j, indent, 0, out);
  out += "\n";
  return out;
}

json spectrum_to_json(const SpectrumResult& spec, const std::vector<std::string>& notes) {
  json j;
  j["method"] = to_string(spec.method);
  j["cross_terms"] = spec.cross_terms;
  j["notes"] = notes;
  j["branch_weight"] = {spec.branch_weight[0], spec.branch_weight[1], spec.branch_weight[2]};
  j["delta"] = spec.grid;
  j["branch1"] = spec.branch_intensity[0];
  j["branch2"] = spec.branch_intensity[1];
  j["branch3"] = spec.branch_intensity[2];
  j["total"] = spec.total;
  json poles = json::array();
  for (std::size_t b = 0; b < 3; ++b) {
    for (const auto& t : spec.branch_poles[b]) {
      poles.push_back({{"branch", static_cast<int>(b) + 1},
                       {"pole_re", t.pole.real()},
                       {"pole_im", t.pole.imag()},
                       {"residue_re", t.residue.real()},
                       {"residue_im", t.residue.imag()},
                       {"order", t.order},
                       {"width", t.width()},
                       {"removable", t.removable},
                       {"trapped", t.trapped}});
    }
  }
  j["poles"] = poles;
  return j;
}

std::string spectrum_csv(const SpectrumResult& spec, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "delta,branch1,branch2,branch3,total\n";
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    out += format_double(spec.grid[i]);
    for (std::size_t b = 0; b < 3; ++b) out += "," + format_double(spec.branch_intensity[b][i]);
    out += "," + format_double(spec.total[i]) + "\n";
  }
  return out;
}

namespace {

// Tick step from the 1-2-5 sequence giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

std::string fmt(double v, int prec = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string spectrum_svg(const SpectrumResult& spec, const std::string& title) {
  constexpr double W = 800, H = 480, L = 70, R = 150, T = 40, B = 50;
  const double pw = W - L - R;
  const double ph = H - T - B;
  const double x0 = spec.grid.empty() ? 0.0 : spec.grid.front();
  const double x1 = spec.grid.empty() ? 1.0 : spec.grid.back();
  double ymax = 0.0;
  for (double v : spec.total) ymax = std::max(ymax, v);
  for (const auto& b : spec.branch_intensity) {
    for (double v : b) ymax = std::max(ymax, v);
  }
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.05;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return T + ph - y / ymax * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << L + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  os << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph << "\"/></g>\n";

  const double xs = nice_step(x1 - x0, 8);
  for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9 * xs; v += xs) {
    const double px = sx(v);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << T + ph << "\" x2=\"" << fmt(px) << "\" y2=\"" << T + ph + 5 << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fmt(px) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
  }
  const double ys = nice_step(ymax, 5);
  for (double v = 0.0; v <= ymax; v += ys) {
    const double py = sy(v);
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << fmt(py) << "\" x2=\"" << L << "\" y2=\"" << fmt(py) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << L - 8 << "\" y=\"" << fmt(py + 4) << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
  }
  os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">detuning (units of Gamma)</text>\n";
  os << "<text x=\"16\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << T + ph / 2 << ")\">S (units of 1/Gamma)</text>\n";

  struct Series {
    const std::vector<double>* y;
    const char* name;
    const char* colour;
    double width;
  };
  const Series series[] = {{&spec.branch_intensity[0], "branch 1", "#1f77b4", 1.0},
                           {&spec.branch_intensity[1], "branch 2", "#2ca02c", 1.0},
                           {&spec.branch_intensity[2], "branch 3", "#d62728", 1.0},
                           {&spec.total, "total", "black", 1.6}};
  int row = 0;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"" << s.width << "\" points=\"";
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
      os << fmt(sx(spec.grid[i])) << ',' << fmt(sy((*s.y)[i])) << (i + 1 < spec.grid.size() ? " " : "");
    }
    os << "\"/>\n";
    const double ly = T + 15 + 18 * row++;
    os << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 40 << "\" y2=\"" << ly << "\" stroke=\"" << s.colour
       << "\" stroke-width=\"2\"/><text x=\"" << W - R + 46 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace fgc::cli
