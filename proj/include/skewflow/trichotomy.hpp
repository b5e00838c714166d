#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skewflow/projectors.hpp"

namespace skewflow {

enum class Mode { Global, Pointwise };
std::string to_string(Mode mode);

/// Constants (N_k, nu_k) for the neutral (k = 0), stable (k = 1) and
/// unstable (k = 2) directions. Global certificates carry no point.
struct RateCertificate {
  std::array<double, 3> N{};
  std::array<double, 3> nu{};
  Mode scope = Mode::Global;
  std::optional<BasePoint> x0;

  /// Throws ParamError unless every N_k > 1 and nu_k > 0.
  void validate() const;
};

/// Three families ordered (P0, P1, P2): neutral, stable, unstable.
struct TrichotomyFamilies {
  ProjectionFamily p0;
  ProjectionFamily p1;
  ProjectionFamily p2;

  std::array<ProjectionFamily, 3> as_array() const { return {p0, p1, p2}; }
};

struct Witness {
  TimeTriple times;
  std::string point;
  int probe = -1;
};

/// One constraint sample: lhs_log + coef * nu <= rhs_log + log N, stored
/// as r = lhs_log - rhs_log. r = -inf marks a vacuous sample (zero on the
/// smaller side), r = +inf a sample no finite constant can satisfy.
struct ConstraintSample {
  double r = 0.0;
  double coef = 0.0;
  Witness witness;
};

struct MarginRow {
  TimeTriple times;
  std::string point;
  int probe = -1;
  std::string label;
  double log_margin = 0.0;
};

struct VerificationVerdict {
  /// Worst log-margin per inequality label (+inf when every sample was
  /// vacuous). Positive means satisfied with slack.
  std::map<std::string, double> margins;
  std::map<std::string, Witness> witnesses;
  double tol = 1e-9;
  bool pass = true;
};

struct TrichotomyOptions {
  OrbitReading reading = OrbitReading::Initial;
  double tol = 1e-9;
  /// Compatibility tolerance for the precondition check.
  double compat_tol = 1e-12;
  bool check_compatibility = true;
  /// Optional sink for per-sample log-margins (CSV export).
  std::vector<MarginRow>* rows = nullptr;
};

/// Labels of the inequalities that constrain direction k in `mode`.
std::vector<std::string> direction_labels(Mode mode, int k);

/// Constraint samples for direction k over the grid. Global mode sweeps
/// grid.points with point-indexed families; pointwise mode follows the orbit
/// of x0 with time-indexed families.
std::vector<std::pair<std::string, ConstraintSample>> collect_samples(Mode mode, int k, const SkewSemiflow& xi,
                                                                      const TrichotomyFamilies& families,
                                                                      const GridSpec& grid,
                                                                      const std::optional<BasePoint>& x0,
                                                                      OrbitReading reading);

VerificationVerdict verify_trichotomy(Mode mode, const SkewSemiflow& xi, const TrichotomyFamilies& families,
                                      const RateCertificate& cert, const GridSpec& grid,
                                      const TrichotomyOptions& options = {});

struct EstimateOptions {
  OrbitReading reading = OrbitReading::Initial;
  std::optional<BasePoint> x0;  // required in pointwise mode
  bool check_compatibility = true;
  double compat_tol = 1e-12;
};

struct EstimateResult {
  std::optional<RateCertificate> certificate;
  /// Per direction: the chosen rate and its minimal N, when one exists.
  std::array<std::optional<double>, 3> nu;
  std::array<std::optional<double>, 3> minimal_N;
  std::string failure;
};

/// Inflates a minimal constant so that it is strictly above 1: N * (1 + 1e-9)
/// when N > 1, otherwise the next double above 1.
double inflate_constant(double minimal_N);

/// Minimal N for rate nu over the samples (exp of the worst violation).
double minimal_constant(const std::vector<ConstraintSample>& samples, double nu);

/// Grid search for the tightest rates. Directions 1 and 2 take the largest
/// nu whose minimal N <= n_cap; direction 0 (a two-sided bound, weaker as nu
/// grows) takes the smallest such nu.
EstimateResult estimate_rate_constants(const SkewSemiflow& xi, const TrichotomyFamilies& families, Mode mode,
                                       const GridSpec& grid, const std::vector<double>& nu_grid, double n_cap,
                                       const EstimateOptions& options = {});

/// Joint estimate over several (xi, families, x0) members in pointwise
/// mode: one certificate that must hold at every member.
struct FamilyMember {
  std::string id;
  SkewSemiflow xi;
  TrichotomyFamilies families;
  BasePoint x0;
  GridSpec grid;
};

EstimateResult estimate_uniform_certificate(const std::vector<FamilyMember>& members,
                                            const std::vector<double>& nu_grid, double n_cap,
                                            OrbitReading reading = OrbitReading::Initial);

enum class SpecialCase { Dichotomy, Stability };

/// Dichotomy sets P0 = 0; stability sets P0 = P2 = 0.
TrichotomyFamilies derive_special_case(SpecialCase kind, const TrichotomyFamilies& families);

struct PointRate {
  std::string id;
  std::optional<double> nu1;
  std::optional<RateCertificate> certificate;
};

struct FalsificationReport {
  std::vector<PointRate> per_point;
  std::vector<double> thresholds;
  bool rates_nonincreasing = true;
  bool every_point_certified = true;
  /// Result of searching one certificate valid at every member.
  bool uniform_certificate_found = false;
  std::optional<RateCertificate> uniform_certificate;
  bool conclusion = false;
};

struct FalsifyOptions {
  std::vector<double> nu_grid;
  double point_n_cap = 1.0 + 1e-6;
  double uniform_n_cap = 1e6;
  double monotone_tol = 1e-9;
  OrbitReading reading = OrbitReading::Initial;
};

/// Escalation test: pointwise stable rates nu1(x_n) per member; conclusion
/// holds iff there are >= 3 members, each is certified, and every threshold
/// is undercut by some member's rate.
FalsificationReport falsify_global(const std::vector<FamilyMember>& members, const std::vector<double>& thresholds,
                                   const FalsifyOptions& options);

std::vector<double> linear_grid(double first, double last, double step);
std::vector<double> log_grid(double first, double last, int count);

}  // namespace skewflow
