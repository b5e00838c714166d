#include "skewflow/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>

#include "skewflow/errors.hpp"

namespace skewflow {

namespace {

constexpr double kResidualFloor = 1e-300;

void require_time_order(double t, double s, const char* what) {
  if (!std::isfinite(t) || !std::isfinite(s)) throw TimeOrderError(std::string(what) + ": times must be finite");
  if (s < 0.0) throw TimeOrderError(std::string(what) + ": times must be >= 0");
  if (t < s) throw TimeOrderError(std::string(what) + ": needs t >= s");
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace

double norm(std::span<const double> v, NormKind kind) {
  double acc = 0.0;
  if (kind == NormKind::L1) {
    for (double x : v) acc += std::abs(x);
    return acc;
  }
  // Scaled two-pass L2 so that huge cocycle outputs do not overflow.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  for (double x : v) acc += (x / scale) * (x / scale);
  return scale * std::sqrt(acc);
}

double log_norm_scaled(std::span<const double> log_mult, std::span<const double> w, NormKind kind) {
  if (log_mult.size() != w.size()) throw DimensionError("log_norm_scaled: dimension mismatch");
  const double p = kind == NormKind::L1 ? 1.0 : 2.0;
  // log (sum_i (e^{g_i} |w_i|)^p) / p via log-sum-exp.
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double term = p * (log_mult[i] + std::log(std::abs(w[i])));
    terms.push_back(term);
    top = std::max(top, term);
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double term : terms) acc += std::exp(term - top);
  return (top + std::log(acc)) / p;
}

TimePair TimePair::make(double t, double t0) {
  require_time_order(t, t0, "TimePair");
  return TimePair{t, t0};
}

SemiflowSpec SemiflowSpec::shift(const BaseSpace& domain) {
  return SemiflowSpec{domain, [](double t, double s) { return t - s; }, "shift"};
}

BasePoint eval_semiflow(const SemiflowSpec& spec, double t, double s, const BasePoint& x) {
  require_time_order(t, s, "eval_semiflow");
  if (!x.in(spec.domain)) throw DomainError("eval_semiflow: point is not in the semiflow's base space");
  if (x.at_limit) return x;
  return BasePoint::at(x.generator, x.shift + spec.offset(t, s));
}

void CocycleSpec::validate() const {
  if (components.empty()) throw ParamError("cocycle needs at least one component");
  for (const auto& c : components) {
    if (c.law == ExponentLaw::MinusMuPlusX && !(c.mu > 0.0)) throw ParamError("law -mu+x needs mu > 0");
  }
}

double log_multiplier(const CocycleSpec& spec, std::size_t i, double t, double t0, const BasePoint& x) {
  require_time_order(t, t0, "eval_cocycle");
  if (i >= spec.dimension()) throw DimensionError("cocycle component index out of range");
  const double delta = t - t0;
  const double growth = closed_form_log_growth(x, t0, t);
  const ComponentLaw& law = spec.components[i];
  switch (law.law) {
    case ExponentLaw::PlusX:
      return growth;
    case ExponentLaw::MinusX:
      return -growth;
    case ExponentLaw::MinusMuPlusX:
      return -law.mu * delta + growth;
    case ExponentLaw::MinusX0PlusX: {
      const double anchor = spec.anchor == AnchorReading::OrbitOrigin ? x.orbit_origin_value() : x(0.0);
      return -delta * anchor + growth;
    }
  }
  return growth;
}

std::vector<double> log_multipliers(const CocycleSpec& spec, double t, double t0, const BasePoint& x) {
  require_time_order(t, t0, "eval_cocycle");
  const double delta = t - t0;
  const double growth = closed_form_log_growth(x, t0, t);
  std::vector<double> out(spec.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ComponentLaw& law = spec.components[i];
    switch (law.law) {
      case ExponentLaw::PlusX:
        out[i] = growth;
        break;
      case ExponentLaw::MinusX:
        out[i] = -growth;
        break;
      case ExponentLaw::MinusMuPlusX:
        out[i] = -law.mu * delta + growth;
        break;
      case ExponentLaw::MinusX0PlusX: {
        const double anchor = spec.anchor == AnchorReading::OrbitOrigin ? x.orbit_origin_value() : x(0.0);
        out[i] = -delta * anchor + growth;
        break;
      }
    }
  }
  return out;
}

StateVector eval_cocycle(const CocycleSpec& spec, double t, double t0, const BasePoint& x, std::span<const double> v) {
  if (v.size() != spec.dimension()) throw DimensionError("eval_cocycle: vector dimension does not match cocycle");
  const auto logs = log_multipliers(spec, t, t0, x);
  StateVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] == 0.0 ? 0.0 : std::exp(logs[i]) * v[i];
  return out;
}

BasePoint orbit_base(const SkewSemiflow& xi, OrbitReading reading, double t, double t0, const BasePoint& x0) {
  if (reading == OrbitReading::Initial) return x0;
  return eval_semiflow(xi.semiflow, t, t0, x0);
}

std::vector<TimeTriple> GridSpec::triples() const {
  std::vector<TimeTriple> out;
  out.reserve(t0_values.size() * first_steps.size() * second_steps.size());
  for (double t0 : t0_values) {
    for (double d1 : first_steps) {
      for (double d2 : second_steps) {
        const double s = t0 + d1;
        out.push_back(TimeTriple{s + d2, s, t0});
      }
    }
  }
  return out;
}

std::vector<TimePair> GridSpec::pairs() const {
  std::set<std::pair<double, double>> seen;
  std::vector<TimePair> out;
  for (const auto& tr : triples()) {
    for (const auto& p : {std::pair{tr.t0, tr.t}, std::pair{tr.t0, tr.s}}) {
      if (seen.insert(p).second) out.push_back(TimePair{p.second, p.first});
    }
  }
  return out;
}

std::vector<double> GridSpec::instants() const {
  std::set<double> seen;
  for (const auto& tr : triples()) {
    seen.insert(tr.t);
    seen.insert(tr.s);
    seen.insert(tr.t0);
  }
  return {seen.begin(), seen.end()};
}

bool GridSpec::empty() const {
  return t0_values.empty() || first_steps.empty() || second_steps.empty() || points.empty();
}

std::vector<StateVector> default_probes(std::size_t dim, std::uint64_t seed, int random_count) {
  std::vector<StateVector> out;
  for (std::size_t i = 0; i < dim; ++i) {
    StateVector e(dim, 0.0);
    e[i] = 1.0;
    out.push_back(std::move(e));
  }
  if (dim < 20) {
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << dim); ++mask) {
      if ((mask & (mask - 1)) == 0) continue;  // basis vectors already present
      StateVector v(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i) v[i] = (mask >> i) & 1U ? 1.0 : 0.0;
      out.push_back(std::move(v));
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < random_count; ++k) {
    StateVector v(dim);
    for (auto& x : v) x = gauss(rng);
    const double n = norm(v, NormKind::L2);
    for (auto& x : v) x /= n;
    out.push_back(std::move(v));
  }
  return out;
}

std::string to_string(AxiomLaw law) {
  switch (law) {
    case AxiomLaw::ES1:
      return "es1";
    case AxiomLaw::ES2:
      return "es2";
    case AxiomLaw::EC1:
      return "ec1";
    case AxiomLaw::EC2:
      return "ec2";
  }
  return "?";
}

namespace {

void record(AxiomReport& rep, double residual, const TimeTriple& tt, const BasePoint& x, int probe) {
  if (std::isnan(residual)) residual = std::numeric_limits<double>::infinity();
  if (residual > rep.max_residual) {
    rep.max_residual = residual;
    rep.worst_times = tt;
    rep.worst_point = x.label();
    rep.worst_probe = probe;
  }
}

void finish(AxiomReport& rep) { rep.pass = rep.max_residual <= rep.tol; }

}  // namespace

std::array<AxiomReport, 2> check_semiflow_axioms(const SemiflowSpec& spec, const GridSpec& grid,
                                                 const MetricOptions& metric) {
  if (grid.empty()) throw EmptyGridError("check_semiflow_axioms: grid has no times or no base points");
  AxiomReport es1{AxiomLaw::ES1};
  AxiomReport es2{AxiomLaw::ES2};
  es1.tol = es2.tol = grid.tol;

  for (double t : grid.instants()) {
    for (const auto& x : grid.points) {
      const BasePoint y = eval_semiflow(spec, t, t, x);
      record(es1, metric_d(y, x, metric.depth, metric.tau_step).value, TimeTriple{t, t, t}, x, -1);
    }
  }
  for (const auto& tr : grid.triples()) {
    for (const auto& x : grid.points) {
      const BasePoint lhs = eval_semiflow(spec, tr.t, tr.s, eval_semiflow(spec, tr.s, tr.t0, x));
      const BasePoint rhs = eval_semiflow(spec, tr.t, tr.t0, x);
      record(es2, metric_d(lhs, rhs, metric.depth, metric.tau_step).value, tr, x, -1);
    }
  }
  finish(es1);
  finish(es2);
  return {es1, es2};
}

std::array<AxiomReport, 2> check_cocycle_axioms(const CocycleSpec& cocycle, const SemiflowSpec& semiflow,
                                                const GridSpec& grid, NormKind norm_kind) {
  if (grid.empty() || grid.probes.empty()) throw EmptyGridError("check_cocycle_axioms: grid needs times, points and probes");
  for (const auto& v : grid.probes) {
    if (v.size() != cocycle.dimension()) throw DimensionError("check_cocycle_axioms: probe dimension mismatch");
  }
  AxiomReport ec1{AxiomLaw::EC1};
  AxiomReport ec2{AxiomLaw::EC2};
  ec1.tol = ec2.tol = grid.tol;

  for (double t : grid.instants()) {
    for (const auto& x : grid.points) {
      for (std::size_t p = 0; p < grid.probes.size(); ++p) {
        const auto& v = grid.probes[p];
        const auto out = eval_cocycle(cocycle, t, t, x, v);
        record(ec1, norm(difference(out, v), norm_kind), TimeTriple{t, t, t}, x, static_cast<int>(p));
      }
    }
  }
  for (const auto& tr : grid.triples()) {
    for (const auto& x : grid.points) {
      const BasePoint mid = eval_semiflow(semiflow, tr.s, tr.t0, x);
      for (std::size_t p = 0; p < grid.probes.size(); ++p) {
        const auto& v = grid.probes[p];
        const auto lhs = eval_cocycle(cocycle, tr.t, tr.t0, x, v);
        const auto rhs = eval_cocycle(cocycle, tr.t, tr.s, mid, eval_cocycle(cocycle, tr.s, tr.t0, x, v));
        const double scale = std::max(norm(lhs, norm_kind), kResidualFloor);
        record(ec2, norm(difference(lhs, rhs), norm_kind) / scale, tr, x, static_cast<int>(p));
      }
    }
  }
  finish(ec1);
  finish(ec2);
  return {ec1, ec2};
}

}  // namespace skewflow
