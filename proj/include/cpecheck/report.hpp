#pragma once

// Scenario files, the identity-check registry and the batch runner behind
// the command-line tool.

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpecheck/catalog.hpp"
#include "cpecheck/cpe.hpp"

namespace cpecheck {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
const char* tool_version();

enum class Tier : std::uint8_t { tier0 = 0, tier2 = 2, tier3 = 3, tier4 = 4 };

/// Centralized tolerance table; fd mode relaxes the third-derivative tier.
struct Tolerances {
  double tier0 = 1e-10;
  double tier2 = 1e-7;
  double tier3 = 1e-5;
  double tier4 = 1e-3;

  static Tolerances defaults(JetMode mode);
  double threshold(Tier t) const;
};

std::string to_string(Tier t);

/// Scenario validation failure. `where` is a line:column for syntax errors
/// and a JSON pointer for schema errors.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string where, const std::string& msg)
      : std::runtime_error(where + ": " + msg), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// An exception raised while evaluating one check at one point.
class CheckEvaluationError : public std::runtime_error {
 public:
  CheckEvaluationError(std::string check, int point, const Point& x, const std::string& msg);
  const std::string& check() const noexcept { return check_; }
  int point() const noexcept { return point_; }

 private:
  std::string check_;
  int point_;
};

struct PointSpec {
  std::vector<Point> explicit_points;
  int count = 0;
  std::uint64_t seed = 0;
  std::optional<Box> box;
  bool sampled() const { return explicit_points.empty(); }
};

struct Scenario {
  nlohmann::json fixture_json;  // as written, echoed into the report
  FixtureSpec fixture;
  std::string potential_name;   // name or the expression text
  ScalarField potential;
  PointSpec points;
  std::optional<double> level;  // level set used by gradient_norm_constancy
  std::vector<std::string> checks;
  JetMode jet_mode = JetMode::taylor;
  Tolerances tolerances;
  int threads = 1;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

struct CheckInfo {
  std::string id;
  Tier tier;
  std::string description;
  int order = 2;            // jet order needed at each point
  bool needs_regular = false;
};

const std::vector<CheckInfo>& check_catalog();
const CheckInfo& check_info(const std::string& id);

struct PointResult {
  int index = 0;
  Point x{};
  double residual = 0.0;
  std::string status = "ok";  // ok | critical
  std::vector<std::string> flags;
  std::map<std::string, double> extra;
};

struct CheckSummary {
  double max = 0.0;
  double rms = 0.0;
  int worst_point = -1;
};

struct CheckResult {
  CheckInfo info;
  double threshold = 0.0;
  std::vector<PointResult> points;
  CheckSummary summary;
  bool pass = false;
};

struct RunInfo {
  std::string timestamp;
  int threads = 1;
  double wall_seconds = 0.0;
};

struct IdentityReport {
  nlohmann::json scenario;  // normalized scenario echo
  std::vector<CheckResult> checks;
  bool pass = false;
  RunInfo run_info;
};

/// Evaluates every check at every point. Throws CheckEvaluationError.
IdentityReport run_scenario(const Scenario& s);

/// JSON form. With `include_run_info` false, the output depends only on the
/// scenario and is byte-identical across runs and thread counts.
nlohmann::json report_to_json(const IdentityReport& r, bool include_run_info = true);
std::string report_to_csv(const IdentityReport& r);

}  // namespace cpecheck
