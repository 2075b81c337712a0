#pragma once

#include <string>
#include <variant>

#include "fgc/model.hpp"
#include "json.hpp"

namespace fgc::cli {

using Scenario = std::variant<D2System, D1System>;

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Scenario JSON:
//   system    "d2" | "d1"
//   gamma     [G1, G2, G3] for d2, [G] or G for d1
//   omega12   d2 only; omega23 defaults to omega12
//   fields    [{mag, phase}] x4; d2 order Omega1..Omega4, d1 order o1, o2, m1, m2
//   detunings optional [D1..D4] (d2)
//   p         optional [p1, p2, p3] (d2)
//   initial   "A1"|"A2"|"A3"|"B" or [[re, im] x4] for d2; "g1"|"g2"|"g3"|"e" for d1
// Parameter validation is separate (validate_system / validate_d1).
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
Scenario preset_scenario(const std::string& name);
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace fgc::cli
