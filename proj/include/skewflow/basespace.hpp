#pragma once

#include <string>

namespace skewflow {

enum class TrajectoryForm {
  ExpDecayToL,    // f(u) = l + a e^{-u}
  IntervalDecay,  // x_n(u) = 1/(2n+1) + e^{-u} / (4n(2n+1))
  Constant,       // f(u) = c
};

/// Closed-form generator trajectory on [0, inf).
struct TrajectorySpec {
  TrajectoryForm form = TrajectoryForm::Constant;
  double l = 1.0;
  double a = 0.0;
  double c = 1.0;
  int n = 1;

  static TrajectorySpec exp_decay(double l, double a);
  static TrajectorySpec interval_decay(int n);
  static TrajectorySpec constant(double c);

  /// Throws ParamError when the form's invariants do not hold.
  void validate() const;

  double value(double u) const;
  double limit() const;
  /// Exact integral of the generator over [u0, u1], u0 <= u1.
  double integral(double u0, double u1) const;
  bool decreasing() const { return form != TrajectoryForm::Constant; }

  std::string describe() const;

  bool operator==(const TrajectorySpec&) const = default;
};

/// Closure of the orbit {f_t : t >= 0} under the compact-convergence metric,
/// with the constant limit trajectory as the only added closure point.
struct BaseSpace {
  TrajectorySpec generator;
  bool includes_limits = true;

  bool operator==(const BaseSpace&) const = default;
};

/// A shifted copy f_shift of the generator, or the constant limit point.
struct BasePoint {
  TrajectorySpec generator;
  double shift = 0.0;
  bool at_limit = false;

  static BasePoint at(const TrajectorySpec& g, double shift);
  static BasePoint limit_of(const TrajectorySpec& g);

  /// Trajectory value at tau; DomainError when shift + tau < 0.
  double operator()(double tau) const;

  /// Value of the orbit origin f(0) (or the constant for the limit point).
  double orbit_origin_value() const;

  bool in(const BaseSpace& space) const;
  std::string label() const;

  bool operator==(const BasePoint&) const = default;
};

double trajectory_eval(const BasePoint& x, double tau);

/// \int_s^t x(tau - s) dtau for the point (g, shift), i.e. the integral of
/// the shifted generator over [0, t - s]. Closed form; never quadrature.
double closed_form_log_growth(const TrajectorySpec& g, double shift, double s, double t);

/// Same as above for a base point, honouring the limit marker.
double closed_form_log_growth(const BasePoint& x, double s, double t);

struct MetricValue {
  double value = 0.0;
  double bound = 0.0;  // series tail 2^{-depth}
};

/// Truncated compact-convergence metric. Each d_n is a grid sup over
/// [max(-n, -shift_x, -shift_y), n] with step tau_step, window endpoints
/// always included.
MetricValue metric_d(const BasePoint& x, const BasePoint& y, int depth = 20, double tau_step = 0.01);

}  // namespace skewflow
