#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracplasma/experiment.hpp"

using namespace fracplasma;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracplasma_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

json minimal_1d(const fs::path& out) {
  return json{{"domain", {{"shape", "interval"}}},
              {"n", 65},
              {"s", 0.5},
              {"gamma", 0.1},
              {"lambda", 4.0},
              {"lambda_units", "lambda1_s"},
              {"extension", {{"layers", 100}}},
              {"output", out.string()}};
}

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("configuration errors name the field") {
  json doc = minimal_1d("out");
  doc["s"] = 1.5;
  CHECK(field_of(doc) == "s");
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'s'") != std::string::npos);
  }
  doc = minimal_1d("out");
  doc["c"] = 0.01;
  CHECK(field_of(doc) == "lambda");
  doc = minimal_1d("out");
  doc["bogus"] = 1;
  CHECK_FALSE(field_of(doc).empty());
  doc = minimal_1d("out");
  doc["domain"]["shape"] = "triangle";
  CHECK(field_of(doc) == "domain.shape");
  doc = minimal_1d("out");
  doc["gamma"] = 0.0;
  CHECK(field_of(doc) == "gamma");
  doc = minimal_1d("out");
  doc["frequency"] = {{"radii", {0.2, 0.1}}};
  CHECK(field_of(doc) == "frequency.radii");
  doc = minimal_1d("out");
  doc["method"] = "minimize";
  CHECK(field_of(doc) == "method");
}

TEST_CASE("config round trip and refinement") {
  const ExperimentConfig cfg = parse_config(minimal_1d("out"));
  CHECK(cfg.n == 65);
  CHECK(cfg.lambda_relative);
  const ExperimentConfig again = parse_config(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));
  const ExperimentConfig fine = refine_config(cfg, 2);
  CHECK(fine.n == 129);
  CHECK(fine.extension.layers == 200);
  CHECK_THROWS_AS(refine_config(cfg, 0), ConfigError);
}

TEST_CASE("solve writes every artifact and is reproducible") {
  const fs::path a = scratch("solve_a"), b = scratch("solve_b");
  const RunReport ra = run_solve(parse_config(minimal_1d(a)));
  CHECK(ra.exit_code == 0);
  for (const char* f : {"u.csv", "coefficients.csv", "extension.csv", "solution.json", "report.json"}) {
    CHECK(fs::exists(a / f));
  }
  CHECK(count_lines(a / "u.csv") == 64);
  CHECK(count_lines(a / "coefficients.csv") == 64);
  CHECK(ra.outcome.at("status") == "converged");
  const RunReport rb = run_solve(parse_config(minimal_1d(b)));
  CHECK(rb.exit_code == 0);
  for (const char* f : {"u.csv", "coefficients.csv", "extension.csv"}) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("frequency command") {
  const fs::path out = scratch("frequency");
  json doc = minimal_1d(out);
  CHECK_THROWS_AS(run_frequency(parse_config(doc)), ConfigError);
  run_solve(parse_config(doc));

  doc["frequency"] = {{"centers", json::array()}};
  RunReport empty = run_frequency(parse_config(doc));
  CHECK(empty.exit_code == 0);
  CHECK(count_lines(out / "frequency_summary.csv") == 1);

  doc["frequency"] = {{"centers", {{5.0}, {M_PI / 2.0}}}};
  const RunReport rep = run_frequency(parse_config(doc));
  CHECK(rep.exit_code == 0);
  CHECK(count_lines(out / "frequency_summary.csv") == 2);
  CHECK(fs::exists(out / "profile_1.csv"));
  CHECK_FALSE(fs::exists(out / "profile_0.csv"));
}

TEST_CASE("blowup and symmetrize commands") {
  const fs::path out = scratch("blowup");
  json doc = minimal_1d(out);
  run_solve(parse_config(doc));
  CHECK_THROWS_AS(run_blowup(parse_config(doc)), ConfigError);
  doc["blowup"] = {{"center", {M_PI / 2.0}}, {"radius", 0.2}};
  const RunReport rep = run_blowup(parse_config(doc));
  CHECK(rep.exit_code == 0);
  const json bj = json::parse(slurp(out / "blowup.json"));
  CHECK(bj.dump().find("unit_sphere_norm") != std::string::npos);
  CHECK(count_lines(out / "blowup.csv") > 10);

  const RunReport sym = run_symmetrize(parse_config(doc));
  CHECK(sym.exit_code == 0);
  CHECK(fs::exists(out / "symmetrized.csv"));
}

TEST_CASE("verify skips the strip check for s <= 1/2 and fails coarse extensions") {
  const fs::path out = scratch("verify");
  json doc = minimal_1d(out);
  doc["s"] = 0.4;
  RunReport rep = run_verify(parse_config(doc));
  bool skipped = false;
  for (const CheckResult& c : rep.checks) {
    if (c.name == "subharmonic_strip") skipped = c.status == CheckStatus::Skipped;
  }
  CHECK(skipped);
  CHECK(rep.exit_code == 0);

  doc["extension"] = {{"layers", 8}};
  rep = run_verify(parse_config(doc));
  bool d2n_failed = false;
  for (const CheckResult& c : rep.checks) {
    if (c.name == "d2n_equivalence") d2n_failed = c.status == CheckStatus::Fail;
  }
  CHECK(d2n_failed);
  CHECK(rep.exit_code == 1);
  CHECK(fs::exists(out / "report.json"));
}

TEST_CASE("command-line exit codes") {
  const fs::path out = scratch("cli");
  const fs::path good = out / "good.json";
  const fs::path bad = out / "bad.json";
  std::ofstream(good) << minimal_1d(out / "run").dump();
  json b = minimal_1d(out / "run");
  b["s"] = 1.5;
  std::ofstream(bad) << b.dump();
  const std::string cli = FRACPLASMA_CLI;
  auto run = [&](const std::string& args) {
    const int st = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  CHECK(run("solve --config " + good.string()) == 0);
  CHECK(fs::exists(out / "run" / "u.csv"));
  CHECK(run("solve --config " + bad.string()) == 2);
  CHECK(run("solve --config " + (out / "missing.json").string()) == 2);
  CHECK(run("nonsense") == 2);
  CHECK(run("solve --config " + good.string() + " --out " + (out / "other").string()) == 0);
  CHECK(fs::exists(out / "other" / "report.json"));
}
