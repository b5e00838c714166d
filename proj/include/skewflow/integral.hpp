#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewflow/trichotomy.hpp"

namespace skewflow {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) with global error control. Throws
/// NonConvergenceError past 2^20 subintervals.
QuadratureResult quadrature(const std::function<double(double)>& f, double a, double b, double tol = 1e-8);

/// Positive, strictly decreasing function on [0, inf) with limit 0.
class PhiFunction {
 public:
  enum class Form { Exponential, Tabulated };

  /// N e^{-nu t}; needs N > 0 and nu > 0.
  static PhiFunction exponential(double N, double nu);
  /// Log-linear interpolation through (times[i], values[i]) starting at
  /// t = 0, then values.back() * e^{-tail_rate (t - times.back())}.
  static PhiFunction tabulated(std::vector<double> times, std::vector<double> values, double tail_rate);

  double operator()(double t) const;
  double log_value(double t) const;

  Form form() const { return form_; }
  double N() const { return N_; }
  double nu() const { return nu_; }
  std::string describe() const;

 private:
  PhiFunction() = default;

  Form form_ = Form::Exponential;
  double N_ = 1.0;
  double nu_ = 1.0;
  std::vector<double> times_;
  std::vector<double> log_values_;
};

/// phi1 = N0 e^{-nu0 t}, phi2 = max(N1, N2) e^{-min(nu1, nu2) t}.
std::pair<PhiFunction, PhiFunction> phi_from_constants(const RateCertificate& cert);

/// Smallest delta = 1 + k * delta_step (k >= 1, delta <= delta_max) with
/// phi(delta) < 1. Throws NoDeltaError when there is none.
double find_delta(const PhiFunction& phi, double delta_max, double delta_step = 1e-12);

/// nu = -ln phi(delta), N = max(phi(1), 1 + 1e-9); phi1 gives direction 0,
/// phi2 gives directions 1 and 2. The result is pointwise at x0.
RateCertificate constants_from_phi(const PhiFunction& phi1, const PhiFunction& phi2, double delta_max,
                                   double delta_step = 1e-12, std::optional<BasePoint> x0 = std::nullopt);

struct PhiCheckOptions {
  OrbitReading reading = OrbitReading::Initial;
  double tol = 1e-9;
  double compat_tol = 1e-12;
  bool check_compatibility = true;
};

/// Margins of the four phi inequalities (labels puet0, puet0', puet1,
/// puet2) over the grid pairs (t, s) and probes.
VerificationVerdict check_phi_characterization(const SkewSemiflow& xi, const BasePoint& x0,
                                               const ProjectionFamily& q1, const ProjectionFamily& q2,
                                               const PhiFunction& phi1, const PhiFunction& phi2,
                                               const GridSpec& grid, const PhiCheckOptions& options = {});

enum class IntegralKind { U0, U0P, U1, U2 };
std::string to_string(IntegralKind kind);

/// ||Psi(tau, t0, b) R v|| <= K e^{-beta (tau - t0)} ||R v||.
struct DecayCertificate {
  double K = 1.0;
  double beta = 0.0;
};

struct IntegralParams {
  double alpha = 0.0;  // U0 and U0P
  double bound = 1.0;  // M, M1 or M2
  /// U1 only: quadrature runs over [t0, t0 + horizon], the rest is bounded
  /// by K e^{-beta horizon} / beta.
  double horizon = 40.0;
  std::optional<DecayCertificate> tail;
  double quad_tol = 1e-8;
  OrbitReading reading = OrbitReading::Initial;
};

/// `integral` is the worst sample's integral per unit reference norm, so
/// pass <=> integral <= bound + error.
struct IntegralCheckResult {
  IntegralKind kind = IntegralKind::U0;
  double integral = 0.0;
  double bound = 0.0;
  double alpha = 0.0;
  double error = 0.0;
  double tail = 0.0;
  Witness worst;
  bool pass = true;
};

/// Largest beta on beta_grid with a minimal K <= k_cap for the forward
/// decay of Psi(., t0, b) R along x0's orbit.
std::optional<DecayCertificate> fit_decay_certificate(const SkewSemiflow& xi, const BasePoint& x0,
                                                      const ProjectionFamily& r, const GridSpec& grid,
                                                      const std::vector<double>& beta_grid, double k_cap,
                                                      OrbitReading reading = OrbitReading::Initial);

IntegralCheckResult integral_bound(IntegralKind kind, const SkewSemiflow& xi, const BasePoint& x0,
                                   const ProjectionFamily& r, const IntegralParams& params, const GridSpec& grid);

struct HypothesisSearch {
  std::vector<double> s0_gaps{2.0};
  std::vector<double> omega_grid;
  double n_cap = 1.0 + 1e-6;
  OrbitReading reading = OrbitReading::Initial;
  double compat_tol = 1e-12;
  bool check_compatibility = true;
};

struct ContractionFound {
  double s0_gap = 0.0;
  double c = 0.0;
};

struct GrowthFit {
  double N = 1.0;
  double omega = 0.0;
};

/// st_found and in_found share the s0 gap and the common c = max(c_st,
/// c_in); the separate worst ratios are kept in c_st and c_in.
struct HypothesisReport {
  std::optional<ContractionFound> st_found;
  std::optional<ContractionFound> in_found;
  double c_st = 0.0;
  double c_in = 0.0;
  std::optional<GrowthFit> eg;
  std::optional<GrowthFit> ed;
  bool pass = false;
};

/// Families ordered (R1, R2, R3, R4). Throws HypothesisFailError naming the
/// first hypothesis that cannot be met on the grid.
HypothesisReport check_integral_hypotheses(const SkewSemiflow& xi, std::span<const ProjectionFamily> families,
                                            const HypothesisSearch& search, const GridSpec& grid);

struct SufficiencyOptions {
  double alpha = 1.0;
  std::vector<double> beta_grid;
  double k_cap = 1.0 + 1e-6;
  OrbitReading reading = OrbitReading::Initial;
};

struct SufficiencyResult {
  RateCertificate certificate;
  /// ln c / gap as first derived (negative) next to the -ln c / gap used.
  double nu1_raw = 0.0;
  double nu2_raw = 0.0;
  DecayCertificate neutral_forward;
  DecayCertificate neutral_backward;
};

/// Builds a pointwise certificate at x0 from the hypotheses: nu1 = nu2 =
/// -ln c / gap, N1 = N e^{(omega + nu1) gap}, N2 = N~ e^{omega~ gap}, and
/// nu0 = alpha - beta (or 1) from a decay fit of the rescaled cocycle on
/// R3 and, backwards, on R4.
SufficiencyResult sufficiency_certificate(const SkewSemiflow& xi, std::span<const ProjectionFamily> families,
                                          const HypothesisReport& hypotheses, const BasePoint& x0,
                                          const GridSpec& grid, const SufficiencyOptions& options);

}  // namespace skewflow
