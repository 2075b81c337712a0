#include "fgc/cli/scenario_io.hpp"

#include <fstream>
#include <set>

namespace fgc::cli {

namespace {

using nlohmann::json;

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw SchemaError("schema: '" + what + "' must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& what, std::size_t count) {
  if (!j.is_array() || j.size() != count) {
    throw SchemaError("schema: '" + what + "' must be an array of " + std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(number(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

DriveField field(const json& j, std::size_t index) {
  const std::string where = "fields[" + std::to_string(index) + "]";
  if (!j.is_object()) throw SchemaError("schema: '" + where + "' must be an object {mag, phase}");
  for (const auto& [key, value] : j.items()) {
    if (key != "mag" && key != "phase") throw SchemaError("schema: unknown key '" + key + "' in " + where);
  }
  if (!j.contains("mag")) throw SchemaError("schema: '" + where + ".mag' is required");
  const double mag = number(j.at("mag"), where + ".mag");
  const double phase = j.contains("phase") ? number(j.at("phase"), where + ".phase") : 0.0;
  try {
    return DriveField(mag, phase);
  } catch (const std::invalid_argument& e) {
    throw SchemaError("schema: " + where + ": " + e.what());
  }
}

std::vector<DriveField> fields(const json& j) {
  if (!j.is_array() || j.size() != 4) throw SchemaError("schema: 'fields' must be an array of 4 {mag, phase} objects");
  std::vector<DriveField> out;
  for (std::size_t i = 0; i < 4; ++i) out.push_back(field(j[i], i));
  return out;
}

void check_keys(const json& j, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw SchemaError("schema: unknown key '" + key + "'");
  }
}

D2System parse_d2(const json& j) {
  check_keys(j, {"system", "gamma", "omega12", "omega23", "fields", "detunings", "p", "initial"});
  for (const char* key : {"gamma", "omega12", "fields"}) {
    if (!j.contains(key)) throw SchemaError(std::string("schema: '") + key + "' is required");
  }
  D2System s;
  const auto g = numbers(j.at("gamma"), "gamma", 3);
  s.gamma = {g[0], g[1], g[2]};
  s.omega12 = number(j.at("omega12"), "omega12");
  s.omega23 = j.contains("omega23") ? number(j.at("omega23"), "omega23") : s.omega12;
  const auto f = fields(j.at("fields"));
  for (std::size_t i = 0; i < 4; ++i) s.drives[i] = f[i];
  if (j.contains("detunings")) {
    const auto d = numbers(j.at("detunings"), "detunings", 4);
    for (std::size_t i = 0; i < 4; ++i) s.detunings[i] = d[i];
  }
  if (j.contains("p")) {
    const auto p = numbers(j.at("p"), "p", 3);
    for (std::size_t i = 0; i < 3; ++i) s.alignments[i] = p[i];
  }
  if (j.contains("initial")) {
    const auto& init = j.at("initial");
    if (init.is_string()) {
      const auto name = init.get<std::string>();
      if (name == "A1") s.initial = basis_state(Level::kA1);
      else if (name == "A2") s.initial = basis_state(Level::kA2);
      else if (name == "A3") s.initial = basis_state(Level::kA3);
      else if (name == "B") s.initial = basis_state(Level::kB);
      else throw SchemaError("schema: 'initial' must be one of A1, A2, A3, B");
    } else if (init.is_array() && init.size() == 4) {
      for (std::size_t i = 0; i < 4; ++i) {
        const auto pair = numbers(init[i], "initial[" + std::to_string(i) + "]", 2);
        s.initial[i] = cplx{pair[0], pair[1]};
      }
    } else {
      throw SchemaError("schema: 'initial' must be a level name or 4 [re, im] pairs");
    }
  }
  return s;
}

D1System parse_d1(const json& j) {
  check_keys(j, {"system", "gamma", "fields", "initial"});
  for (const char* key : {"gamma", "fields"}) {
    if (!j.contains(key)) throw SchemaError(std::string("schema: '") + key + "' is required");
  }
  D1System s;
  const auto& g = j.at("gamma");
  s.gamma = g.is_array() ? numbers(g, "gamma", 1)[0] : number(g, "gamma");
  const auto f = fields(j.at("fields"));
  s.optical1 = f[0];
  s.optical2 = f[1];
  s.microwave1 = f[2];
  s.microwave2 = f[3];
  if (j.contains("initial")) {
    const auto& init = j.at("initial");
    const std::string name = init.is_string() ? init.get<std::string>() : "";
    if (name == "g1") s.initial = D1Level::kG1;
    else if (name == "g2") s.initial = D1Level::kG2;
    else if (name == "g3") s.initial = D1Level::kG3;
    else if (name == "e") s.initial = D1Level::kE;
    else throw SchemaError("schema: d1 'initial' must be one of g1, g2, g3, e");
  }
  return s;
}

json field_json(const DriveField& f) { return json{{"mag", f.magnitude()}, {"phase", f.phase()}}; }

std::string d1_level_name(D1Level l) {
  switch (l) {
    case D1Level::kG1: return "g1";
    case D1Level::kG2: return "g2";
    case D1Level::kG3: return "g3";
    case D1Level::kE: return "e";
  }
  return "g3";
}

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw SchemaError("schema: scenario must be a JSON object");
  if (!j.contains("system") || !j.at("system").is_string()) throw SchemaError("schema: 'system' must be \"d2\" or \"d1\"");
  const auto kind = j.at("system").get<std::string>();
  if (kind == "d2") return parse_d2(j);
  if (kind == "d1") return parse_d1(j);
  throw SchemaError("schema: 'system' must be \"d2\" or \"d1\"");
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("scenario is not valid JSON: " + std::string(e.what()));
  }
  return parse_scenario(j);
}

Scenario preset_scenario(const std::string& name) {
  auto p = preset(name);
  if (auto* d2 = std::get_if<D2System>(&p.system)) return *d2;
  return std::get<D1System>(p.system);
}

json scenario_to_json(const Scenario& s) {
  if (const auto* d2 = std::get_if<D2System>(&s)) {
    json j;
    j["system"] = "d2";
    j["gamma"] = {d2->gamma[0], d2->gamma[1], d2->gamma[2]};
    j["omega12"] = d2->omega12;
    j["omega23"] = d2->omega23;
    j["fields"] = json::array();
    for (const auto& f : d2->drives) j["fields"].push_back(field_json(f));
    j["detunings"] = {d2->detunings[0], d2->detunings[1], d2->detunings[2], d2->detunings[3]};
    j["p"] = {d2->alignments[0], d2->alignments[1], d2->alignments[2]};
    j["initial"] = json::array();
    for (const auto& z : d2->initial) j["initial"].push_back({z.real(), z.imag()});
    return j;
  }
  const auto& d1 = std::get<D1System>(s);
  json j;
  j["system"] = "d1";
  j["gamma"] = {d1.gamma};
  j["fields"] = {field_json(d1.optical1), field_json(d1.optical2), field_json(d1.microwave1), field_json(d1.microwave2)};
  j["initial"] = d1_level_name(d1.initial);
  return j;
}

}  // namespace fgc::cli
