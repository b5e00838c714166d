#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewflow/integral.hpp"

namespace skewflow {

enum class ScenarioName { Example1, Example2, Example3 };
std::string to_string(ScenarioName name);
/// Case-insensitive; throws ConfigError on unknown names.
ScenarioName parse_scenario_name(const std::string& text);

struct ScenarioParams {
  double l = 1.0;
  double a = 1.0;
  double mu = 3.0;
  std::vector<int> n_list{1, 2, 5, 10};
  NormKind norm = NormKind::L2;
  AnchorReading anchor = AnchorReading::OrbitOrigin;
};

/// One skew-evolution semiflow with its reference orbit point. Example 3
/// has one member per n, the others a single member.
struct ScenarioMember {
  std::string id;
  SkewSemiflow xi;
  BasePoint x0;
};

struct Scenario {
  ScenarioName name = ScenarioName::Example2;
  ScenarioParams params;
  std::vector<ScenarioMember> members;
  /// Point-indexed (P0, P1, P2) for the global constructs.
  TrichotomyFamilies global_families;
  /// The same masks indexed by time for the pointwise constructs.
  TrichotomyFamilies pointwise_families;
  std::vector<ProjectionFamily> two;   // Q1, Q2
  std::vector<ProjectionFamily> four;  // R1, R2, R3, R4
  /// Constants the example is known to satisfy globally, when there are any.
  std::optional<RateCertificate> claimed;

  std::size_t dimension() const { return members.front().xi.dimension(); }
};

/// Throws ParamError naming the violated requirement (mu > f(0) > 0 for
/// Example 2, n >= 1 and distinct for Example 3).
Scenario build_scenario(ScenarioName name, const ScenarioParams& params = {});

enum class GridPreset { Small, Default, Dense };
std::string to_string(GridPreset preset);
GridPreset parse_grid_preset(const std::string& text);

struct GridOverrides {
  std::optional<std::vector<double>> t0_values;
  std::optional<std::vector<double>> first_steps;
  std::optional<std::vector<double>> second_steps;
  std::optional<std::vector<double>> shifts;
  std::optional<bool> include_limit;
};

struct NuGrid {
  double first = 0.05;
  double last = 5.0;
  double step = 0.05;
};

struct Tolerances {
  double axiom = 1e-9;
  double compat = 1e-12;
  double margin = 1e-9;
  double quadrature = 1e-8;
  double n_cap = 1.0 + 1e-6;
  double uniform_n_cap = 1e6;
};

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
  int schema_version = kSchemaVersion;
  ScenarioName scenario = ScenarioName::Example2;
  ScenarioParams params;
  OrbitReading reading = OrbitReading::Initial;
  GridPreset preset = GridPreset::Default;
  GridOverrides grid;
  /// Unset means the scenario's default rate grid.
  std::optional<NuGrid> nu_grid;
  std::uint64_t seed = 7;
  int random_probes = 8;
  Tolerances tol;
  /// Unset means the scenario's default pipeline.
  std::optional<std::vector<std::string>> analyses;
};

/// Analyses understood by run_report, in pipeline order.
const std::vector<std::string>& known_analyses();
std::vector<std::string> default_analyses(ScenarioName name);

/// Parses a JSON config. Unknown fields, wrong types and bad values raise
/// ConfigError with the offending field path (or the parse position).
RunConfig parse_config(const std::string& text);
nlohmann::json config_to_json(const RunConfig& config);

/// Grid for one scenario member: preset times, shifted base points of the
/// member's generator (plus its limit) and seeded probes.
GridSpec make_grid(const RunConfig& config, const ScenarioMember& member);
std::vector<double> scenario_nu_grid(const RunConfig& config);

struct ReportDocument {
  nlohmann::json body;
  bool success = true;
  bool numeric_error = false;
  std::vector<MarginRow> rows;
};

/// Runs the requested pipeline. Errors raised inside an analysis are
/// recorded in that analysis' section and mark it failed.
ReportDocument run_report(const RunConfig& config);

/// Field name of the run timestamp; the only nondeterministic field.
inline constexpr const char* kTimestampField = "generated_at";

std::string serialize_report(const ReportDocument& report);
ReportDocument parse_report(const std::string& text);

/// One CSV line per margin row: t,s,t0,point,probe,label,log_margin.
std::string margins_csv(const std::vector<MarginRow>& rows);

/// Writes through a temporary sibling file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// JSON number for finite values, "inf"/"-inf" strings and null for NaN.
nlohmann::json json_number(double value);
double number_from_json(const nlohmann::json& value);

}  // namespace skewflow
