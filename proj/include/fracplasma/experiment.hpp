#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fracplasma/domain.hpp"
#include "fracplasma/plasma.hpp"

namespace fracplasma {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExtensionConfig {
  double height = 0.0;   // 0: 20 / sqrt(lambda_1)
  int layers = 200;
  double grading = 0.0;  // 0: YMesh::default_grading
};

struct FrequencyConfig {
  std::vector<Point> centers;
  std::vector<double> radii;  // empty: default_radii
  int count = 12;
};

struct BlowupConfig {
  std::optional<Point> center;
  double radius = 0.0;
  int nodes = 0;
  int layers = 96;
};

struct VerifyConfig {
  int d2n_modes = 20;
  double d2n_tolerance = 1e-5;
  double sign_tolerance = 1e-8;
  double symmetry_tolerance = 1e-6;
  int steiner_fields = 10;
  bool census = true;
};

enum class SolveMethod { Branch, Minimize };

struct ExperimentConfig {
  ShapeSpec shape;
  int n = 129;
  double s = 0.5;
  double gamma = 0.1;
  std::optional<double> c;
  std::optional<double> lambda;
  /// lambda is given in units of lambda_1^s.
  bool lambda_relative = false;
  SolveMethod method = SolveMethod::Branch;
  SolverOptions solver;
  ExtensionConfig extension;
  FrequencyConfig frequency;
  BlowupConfig blowup;
  VerifyConfig verify;
  std::string output = "out";
  std::uint64_t seed = 0;
  nlohmann::json source;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// n -> (n - 1) factor + 1 and layers -> layers * factor.
ExperimentConfig refine_config(ExperimentConfig cfg, int factor);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

enum class CheckStatus { Pass, Fail, Skipped };
std::string to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct RunReport {
  nlohmann::json config;
  nlohmann::json outcome;
  nlohmann::json free_boundary;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> timings;
  int exit_code = 0;

  nlohmann::json to_json() const;
};

// Every command writes into cfg.output and returns its report; exit codes
// are 0 (pass), 1 (solver or check failure), 2 (invalid input).

/// u.csv, coefficients.csv, extension.csv, solution.json, report.json.
RunReport run_solve(const ExperimentConfig& cfg);
/// profile_<i>.csv per center, frequency_summary.csv, frequency.json.
RunReport run_frequency(const ExperimentConfig& cfg);
/// blowup.csv, blowup.json.
RunReport run_blowup(const ExperimentConfig& cfg);
/// symmetrized.csv, symmetrize.json.
RunReport run_symmetrize(const ExperimentConfig& cfg);
/// report.json with every verification check.
RunReport run_verify(const ExperimentConfig& cfg);

/// %.17g
std::string format_double(double v);

}  // namespace fracplasma
