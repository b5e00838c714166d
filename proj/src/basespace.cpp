#include "skewflow/basespace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewflow/errors.hpp"

namespace skewflow {

namespace {

double interval_floor(int n) { return 1.0 / (2.0 * n + 1.0); }
double interval_amplitude(int n) { return 1.0 / (4.0 * n * (2.0 * n + 1.0)); }

}  // namespace

TrajectorySpec TrajectorySpec::exp_decay(double l, double a) {
  TrajectorySpec g;
  g.form = TrajectoryForm::ExpDecayToL;
  g.l = l;
  g.a = a;
  g.validate();
  return g;
}

TrajectorySpec TrajectorySpec::interval_decay(int n) {
  TrajectorySpec g;
  g.form = TrajectoryForm::IntervalDecay;
  g.n = n;
  g.validate();
  return g;
}

TrajectorySpec TrajectorySpec::constant(double c) {
  TrajectorySpec g;
  g.form = TrajectoryForm::Constant;
  g.c = c;
  g.validate();
  return g;
}

void TrajectorySpec::validate() const {
  switch (form) {
    case TrajectoryForm::ExpDecayToL:
      if (!(l > 0.0) || !std::isfinite(l)) throw ParamError("exp_decay generator needs l > 0");
      if (!(a >= 0.0) || !std::isfinite(a)) throw ParamError("exp_decay generator needs a >= 0");
      break;
    case TrajectoryForm::IntervalDecay:
      if (n < 1) throw ParamError("interval_decay generator needs n >= 1");
      break;
    case TrajectoryForm::Constant:
      if (!(c > 0.0) || !std::isfinite(c)) throw ParamError("constant generator needs c > 0");
      break;
  }
}

double TrajectorySpec::value(double u) const {
  switch (form) {
    case TrajectoryForm::ExpDecayToL:
      return l + a * std::exp(-u);
    case TrajectoryForm::IntervalDecay:
      return interval_floor(n) + interval_amplitude(n) * std::exp(-u);
    case TrajectoryForm::Constant:
      return c;
  }
  return c;
}

double TrajectorySpec::limit() const {
  switch (form) {
    case TrajectoryForm::ExpDecayToL:
      return l;
    case TrajectoryForm::IntervalDecay:
      return interval_floor(n);
    case TrajectoryForm::Constant:
      return c;
  }
  return c;
}

double TrajectorySpec::integral(double u0, double u1) const {
  const double len = u1 - u0;
  // e^{-u0} - e^{-u1} = e^{-u0} (1 - e^{-len}); expm1 keeps small windows exact.
  const double decay = std::exp(-u0) * -std::expm1(-len);
  switch (form) {
    case TrajectoryForm::ExpDecayToL:
      return l * len + a * decay;
    case TrajectoryForm::IntervalDecay:
      return interval_floor(n) * len + interval_amplitude(n) * decay;
    case TrajectoryForm::Constant:
      return c * len;
  }
  return c * len;
}

std::string TrajectorySpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (form) {
    case TrajectoryForm::ExpDecayToL:
      os << "f(u) = " << l << " + " << a << " exp(-u)";
      break;
    case TrajectoryForm::IntervalDecay:
      os << "x_" << n << "(u) = 1/" << (2 * n + 1) << " + exp(-u)/" << (4 * n * (2 * n + 1));
      break;
    case TrajectoryForm::Constant:
      os << "f(u) = " << c;
      break;
  }
  return os.str();
}

BasePoint BasePoint::at(const TrajectorySpec& g, double shift) {
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw DomainError("base point shift must be finite and >= 0");
  return BasePoint{g, shift, false};
}

BasePoint BasePoint::limit_of(const TrajectorySpec& g) { return BasePoint{g, 0.0, true}; }

double BasePoint::operator()(double tau) const {
  if (at_limit) return generator.limit();
  const double u = shift + tau;
  if (u < 0.0) throw DomainError("trajectory evaluated below its domain (shift + tau < 0)");
  return generator.value(u);
}

double BasePoint::orbit_origin_value() const { return at_limit ? generator.limit() : generator.value(0.0); }

bool BasePoint::in(const BaseSpace& space) const {
  if (!(generator == space.generator)) return false;
  return !at_limit || space.includes_limits;
}

std::string BasePoint::label() const {
  if (at_limit) return "limit";
  std::ostringstream os;
  os.precision(17);
  os << "shift=" << shift;
  return os.str();
}

double trajectory_eval(const BasePoint& x, double tau) { return x(tau); }

double closed_form_log_growth(const TrajectorySpec& g, double shift, double s, double t) {
  if (t < s) throw TimeOrderError("closed_form_log_growth needs t >= s");
  if (shift < 0.0) throw DomainError("closed_form_log_growth needs shift >= 0");
  return g.integral(shift, shift + (t - s));
}

double closed_form_log_growth(const BasePoint& x, double s, double t) {
  if (t < s) throw TimeOrderError("closed_form_log_growth needs t >= s");
  if (x.at_limit) return x.generator.limit() * (t - s);
  return closed_form_log_growth(x.generator, x.shift, s, t);
}

MetricValue metric_d(const BasePoint& x, const BasePoint& y, int depth, double tau_step) {
  if (!(x.generator == y.generator)) throw SpaceMismatchError("metric_d between points of different base spaces");
  if (depth < 1) throw ParamError("metric_d depth must be >= 1");
  if (!(tau_step > 0.0)) throw ParamError("metric_d tau_step must be > 0");

  double floor_shift = -static_cast<double>(depth);
  if (!x.at_limit) floor_shift = std::max(floor_shift, -x.shift);
  if (!y.at_limit) floor_shift = std::max(floor_shift, -y.shift);

  auto gap = [&](double tau) { return std::abs(x(tau) - y(tau)); };

  // Windows [lo_n, n] are nested, so a running max over the growing window
  // yields every d_n in one outward sweep.
  const auto steps_right = static_cast<long>(std::floor(depth / tau_step));
  double running = gap(0.0);
  long right = 0;
  long left = 0;
  double total = 0.0;
  for (int n = 1; n <= depth; ++n) {
    const double lo = std::max(-static_cast<double>(n), floor_shift);
    const double hi = static_cast<double>(n);
    while (right + 1 <= steps_right && (right + 1) * tau_step <= hi) {
      ++right;
      running = std::max(running, gap(right * tau_step));
    }
    while ((left - 1) * tau_step >= lo) {
      --left;
      running = std::max(running, gap(left * tau_step));
    }
    running = std::max({running, gap(hi), gap(lo)});
    total += std::ldexp(running / (1.0 + running), -n);
  }
  return MetricValue{total, std::ldexp(1.0, -depth)};
}

}  // namespace skewflow
