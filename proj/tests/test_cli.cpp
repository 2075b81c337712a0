#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fgc/cli/commands.hpp"
#include "fgc/cli/output.hpp"
#include "fgc/cli/scenario_io.hpp"
#include "fgc/trapping.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace fgc;
using namespace fgc::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fgcsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("fgcsim-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

const char* kLoopScenario = R"({
  "system": "d2",
  "gamma": [1, 1, 1],
  "omega12": 13,
  "fields": [{"mag": 2}, {"mag": 1, "phase": 3.141592653589793}, {"mag": 1, "phase": 0}, {"mag": 2}],
  "initial": "B"
})";

}  // namespace

TEST_CASE("grid specs") {
  const auto g = parse_grid("-30:30:6001");
  CHECK(g.size() == 6001);
  CHECK(g.front() == -30.0);
  CHECK(g.back() == 30.0);
  CHECK(g[3000] == doctest::Approx(0.0));
  CHECK_THROWS_AS(parse_grid("0:1"), SchemaError);
  CHECK_THROWS_AS(parse_grid("0:1:1"), SchemaError);
  CHECK_THROWS_AS(parse_grid("1:0:5"), SchemaError);
  CHECK_THROWS_AS(parse_grid("a:1:5"), SchemaError);
  CHECK_THROWS_AS(parse_grid("0:1:5x"), SchemaError);
}

TEST_CASE("scenario files round-trip") {
  const auto sc = parse_scenario(nlohmann::json::parse(kLoopScenario));
  const auto& s = std::get<D2System>(sc);
  CHECK(s.omega23 == 13.0);
  CHECK(s.drives[1].phase() == doctest::Approx(kPi));
  CHECK(s.initial == basis_state(Level::kB));
  const auto back = parse_scenario(scenario_to_json(sc));
  CHECK(std::get<D2System>(back).drives == s.drives);

  for (const auto& name : preset_names()) {
    const auto p = preset_scenario(name);
    const auto q = parse_scenario(scenario_to_json(p));
    CHECK(scenario_to_json(p) == scenario_to_json(q));
  }
}

TEST_CASE("scenario schema violations") {
  using nlohmann::json;
  auto bad = [](const std::string& text) { return parse_scenario(json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"system": "d3"})"), SchemaError);
  CHECK_THROWS_AS(bad(R"({"system": "d2", "gamma": [1, 1], "omega12": 13, "fields": []})"), SchemaError);
  auto extra = json::parse(kLoopScenario);
  extra["colour"] = "blue";
  CHECK_THROWS_AS(parse_scenario(extra), SchemaError);
  auto neg = json::parse(kLoopScenario);
  neg["fields"][0]["mag"] = -1.0;
  CHECK_THROWS(parse_scenario(neg));
  auto init = json::parse(kLoopScenario);
  init["initial"] = "C";
  CHECK_THROWS_AS(parse_scenario(init), SchemaError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), SchemaError);
}

TEST_CASE("fixed float formatting") {
  CHECK(format_double(0.1) == "1.0000000000000001e-01");
  CHECK(format_double(-2.0) == "-2.0000000000000000e+00");
  CHECK(dump_fixed(nlohmann::json{{"a", {1.5, 2}}}, 2) == "{\n  \"a\": [1.5000000000000000e+00, 2]\n}\n");
}

TEST_CASE("spectrum command writes csv, svg and a manifest") {
  TempDir dir;
  const auto cfg = dir.file("fig2b.json");
  spit(cfg, kLoopScenario);
  const auto r = run({"spectrum", "--config", cfg, "--grid", "-30:30:601", "--out", dir.file("spec.csv"), "--svg",
                      dir.file("spec.svg")});
  CHECK(r.code == 0);
  CHECK(r.err.find("trapping condition satisfied") != std::string::npos);
  const auto csv = slurp(dir.file("spec.csv"));
  CHECK(csv.rfind("# ", 0) == 0);
  CHECK(csv.find("\ndelta,branch1,branch2,branch3,total\n") != std::string::npos);
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n' ? 1 : 0;
  CHECK(rows > 601);
  CHECK(slurp(dir.file("spec.svg")).find("<svg") != std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(dir.file("spec.manifest.json")));
  CHECK(manifest["command"] == "spectrum");
  CHECK(manifest["scenario"] == cfg);
  CHECK(manifest["outputs"].size() == 2);
  CHECK(manifest["tool_version"] == kToolVersion);
  CHECK(manifest["parameters"]["omega12"] == 13.0);
}

TEST_CASE("spectrum --method both writes the comparison") {
  TempDir dir;
  const auto r = run({"spectrum", "--preset", "fig2-notrapping", "--grid", "-30:30:101", "--method", "both", "--out",
                      dir.file("s.json")});
  CHECK(r.code == 0);
  CHECK(r.out.find("max_rel_err") != std::string::npos);
  const auto cmp = nlohmann::json::parse(slurp(dir.file("s.compare.json")));
  CHECK(cmp["max_rel_err"].get<double>() < 1e-3);
  const auto js = nlohmann::json::parse(slurp(dir.file("s.json")));
  CHECK(js["delta"].size() == 101);
  CHECK(js["poles"].size() > 0);
  CHECK(nlohmann::json::parse(slurp(dir.file("s.timedomain.json")))["method"] == "timedomain");
}

TEST_CASE("empty drives warn that nothing is emitted") {
  TempDir dir;
  const auto cfg = dir.file("empty.json");
  spit(cfg, R"({"system": "d2", "gamma": [1, 1, 1], "omega12": 13,
               "fields": [{"mag": 0}, {"mag": 0}, {"mag": 0}, {"mag": 0}], "initial": "B"})");
  const auto r = run({"spectrum", "--config", cfg, "--grid", "-5:5:11"});
  CHECK(r.code == 0);
  CHECK(r.err.find("no emission: atom never excited") != std::string::npos);
  std::istringstream lines(r.out);
  std::string line;
  int data = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("delta", 0) == 0) continue;
    ++data;
    CHECK(line.find("0.0000000000000000e+00,0.0000000000000000e+00,0.0000000000000000e+00,0.0000000000000000e+00") !=
          std::string::npos);
  }
  CHECK(data == 11);
}

TEST_CASE("a dark D1 scenario is reported as trapped") {
  const auto r = run({"spectrum", "--preset", "d1-trapping", "--grid", "-3:3:7", "--format", "json"});
  CHECK(r.code == 0);
  CHECK(r.err.find("trapping condition satisfied") != std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  for (const auto& v : j["total"]) CHECK(v.get<double>() == 0.0);
}

TEST_CASE("exit codes for bad input") {
  CHECK(run({"spectrum", "--preset", "nope"}).code == 2);
  CHECK(run({"spectrum"}).code == 2);
  CHECK(run({"spectrum", "--preset", "two-level", "--grid", "1:0:3"}).code == 2);
  CHECK(run({"spectrum", "--preset", "two-level", "--method", "fourier"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  TempDir dir;
  const auto cfg = dir.file("bad.json");
  spit(cfg, R"({"system": "d2", "gamma": [0, 1, 1], "omega12": 13,
               "fields": [{"mag": 1}, {"mag": 1}, {"mag": 1}, {"mag": 1}]})");
  const auto r = run({"spectrum", "--config", cfg});
  CHECK(r.code == 2);
  CHECK(r.err.find("NonPositiveRate") != std::string::npos);
  spit(cfg, "{ not json");
  CHECK(run({"spectrum", "--config", cfg}).code == 2);
  const auto det = dir.file("det.json");
  spit(det, R"({"system": "d2", "gamma": [1, 1, 1], "omega12": 13, "detunings": [0.5, 0, 0, 0],
               "fields": [{"mag": 1}, {"mag": 1}, {"mag": 1}, {"mag": 1}]})");
  CHECK(run({"spectrum", "--config", det}).code == 2);
  CHECK(run({"spectrum", "--config", det, "--method", "timedomain", "--grid", "-2:2:5"}).code == 0);
}

TEST_CASE("numerical failures exit with 3 and name the operation") {
  // A weakly damped decay cannot settle before the horizon cap.
  TempDir dir;
  const auto cfg = dir.file("slow.json");
  spit(cfg, R"({"system": "d2", "gamma": [1e-6, 1, 1], "omega12": 13,
               "fields": [{"mag": 0}, {"mag": 0}, {"mag": 0}, {"mag": 0}], "initial": "A1"})");
  const auto r = run({"spectrum", "--config", cfg, "--method", "timedomain", "--grid", "-14:-12:3"});
  CHECK(r.code == 3);
  CHECK(r.err.find("spectrum_time_domain") != std::string::npos);
}

TEST_CASE("trapping command") {
  const auto yes = run({"trapping", "--preset", "fig2-trapping"});
  CHECK(yes.code == 0);
  auto j = nlohmann::json::parse(yes.out);
  CHECK(j["report"]["satisfied"] == true);

  const auto no = run({"trapping", "--preset", "fig2-notrapping"});
  j = nlohmann::json::parse(no.out);
  CHECK(j["report"]["satisfied"] == false);
  CHECK(std::abs(j["report"]["phase_condition"].get<double>()) == doctest::Approx(kPi));

  TempDir dir;
  const auto cfg = dir.file("partial.json");
  spit(cfg, R"({"system": "d2", "gamma": [1, 1, 1], "omega12": 13,
               "fields": [{"mag": 2}, {"mag": 1, "phase": 3.141592653589793}, {"mag": 1}, {"mag": 0}]})");
  const auto solved = run({"trapping", "--config", cfg, "--solve", "--solved-out", dir.file("solved.json")});
  CHECK(solved.code == 0);
  const auto s = std::get<D2System>(load_scenario(dir.file("solved.json")));
  CHECK(s.drives[3].magnitude() == doctest::Approx(2.0));
  CHECK(s.drives[2].phase() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(fgc_check(s).satisfied);

  const auto zero3 = dir.file("zero3.json");
  spit(zero3, R"({"system": "d2", "gamma": [1, 1, 1], "omega12": 13,
                 "fields": [{"mag": 2}, {"mag": 1}, {"mag": 0}, {"mag": 0}]})");
  CHECK(run({"trapping", "--config", zero3, "--solve", "--solved-out", dir.file("x.json")}).code == 4);

  const auto gam = dir.file("gamma.json");
  spit(gam, R"({"system": "d2", "gamma": [1, 1, 2], "omega12": 13,
               "fields": [{"mag": 2}, {"mag": 1}, {"mag": 1}, {"mag": 0}]})");
  CHECK(run({"trapping", "--config", gam, "--solve", "--solved-out", dir.file("y.json")}).code == 4);
  CHECK(run({"trapping", "--config", gam, "--solve", "--allow-gamma-mismatch", "--solved-out", dir.file("y.json")}).code ==
        0);
}

TEST_CASE("sweep metrics locate the trapping condition") {
  const auto base = test::loop_with_phases(kPi, 0.0);
  SweepSettings s;
  s.metric = "branch2_area";
  s.grid = fgc::linear_grid(-60.0, 60.0, 12001);
  const std::vector<double> phases{0.0, kPi / 2.0, 3.0 * kPi / 4.0, kPi, 5.0 * kPi / 4.0, 3.0 * kPi / 2.0};
  const auto by_phase = run_sweep(base, "phase2", phases, s);
  CHECK(by_phase[3] == 0.0);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (i != 3) CHECK(by_phase[i] > 1e-3);
  }
  const std::vector<double> mags{1.0, 1.5, 2.0, 2.5, 3.0};
  const auto by_mag = run_sweep(base, "mag4", mags, s);
  CHECK(*std::min_element(by_mag.begin(), by_mag.end()) == by_mag[2]);
  CHECK(by_mag[2] < 1e-20);

  s.metric = "peak_count";
  s.grid = fgc::linear_grid(-30.0, 30.0, 6001);
  const auto by_gamma = run_sweep(base, "gamma1", {0.5, 1.0, 1.5}, s);
  CHECK(by_gamma[1] == 4.0);
  CHECK(by_gamma[0] > by_gamma[1]);
  CHECK(by_gamma[2] > by_gamma[1]);

  CHECK_THROWS_AS(with_parameter(base, "phase7", 0.0), SchemaError);
  s.metric = "entropy";
  CHECK_THROWS_AS(run_sweep(base, "phase2", {0.0}, s), SchemaError);
}

TEST_CASE("sweep command output") {
  const auto r = run({"sweep", "--preset", "fig2-trapping", "--vary", "phase2", "--range", "0:6.283185307179586:5",
                      "--metric", "branch2_area"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\nvalue,branch2_area\n") != std::string::npos);
  CHECK(run({"sweep", "--preset", "fig2-trapping", "--vary", "phase9", "--range", "0:1:3"}).code == 2);
  CHECK(run({"sweep", "--preset", "d1-fig3a", "--vary", "phase2", "--range", "0:1:3"}).code == 2);
}

TEST_CASE("validate command") {
  const auto one = run({"validate", "two-level"});
  CHECK(one.code == 0);
  CHECK(one.out.find("fwhm") != std::string::npos);
  const auto doublet = validate_preset("autler-townes-doublet");
  for (const auto& row : doublet) CHECK_MESSAGE(row.pass, (row.check + ": " + row.detail));
  CHECK(run({"validate", "nope"}).code == 2);
}

TEST_CASE("the installed binary is deterministic") {
  TempDir dir;
  const std::string bin = FGCSIM_PATH;
  auto once = [&](const std::string& out) {
    const std::string cmd = bin + " spectrum --preset fig2-notrapping --grid -30:30:301 --out " + out +
                            " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  CHECK(once(dir.file("a.csv")) == 0);
  CHECK(once(dir.file("b.csv")) == 0);
  const auto a = slurp(dir.file("a.csv"));
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(dir.file("b.csv")));
  CHECK(std::system((bin + " spectrum --preset nope > /dev/null 2>&1").c_str()) != 0);
}
