#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "skewflow/basespace.hpp"

namespace skewflow {

using StateVector = std::vector<double>;

enum class NormKind { L1, L2 };

double norm(std::span<const double> v, NormKind kind);

/// log ||diag(e^{log_mult}) w|| without forming the (possibly overflowing)
/// multipliers. Returns -inf for the zero vector.
double log_norm_scaled(std::span<const double> log_mult, std::span<const double> w, NormKind kind);

inline double log_norm(std::span<const double> w, NormKind kind) {
  const std::vector<double> zeros(w.size(), 0.0);
  return log_norm_scaled(zeros, w, kind);
}

/// A pair (t, t0) in T = {t >= t0 >= 0}.
struct TimePair {
  double t = 0.0;
  double t0 = 0.0;

  static TimePair make(double t, double t0);
  double delta() const { return t - t0; }
};

/// (t, s, t0) with t >= s >= t0 >= 0.
struct TimeTriple {
  double t = 0.0;
  double s = 0.0;
  double t0 = 0.0;
};

/// Evolution semiflow psi(t, s, x) = x shifted by offset(t, s). The shift
/// semiflow uses offset = t - s; other offsets exist only to exercise the
/// axiom checks on maps that are not semiflows.
struct SemiflowSpec {
  BaseSpace domain;
  std::function<double(double t, double s)> offset;
  std::string kind = "shift";

  static SemiflowSpec shift(const BaseSpace& domain);
};

BasePoint eval_semiflow(const SemiflowSpec& spec, double t, double s, const BasePoint& x);

enum class ExponentLaw {
  PlusX,         // +\int x
  MinusX,        // -\int x
  MinusMuPlusX,  // -mu (t - t0) + \int x
  MinusX0PlusX,  // -(t - t0) x(0) + \int x
};

/// How x(0) is read in the MinusX0PlusX law. OrbitOrigin takes the value
/// at the origin of the orbit through x (f(0) for every f_t, the constant
/// for the limit point) and yields an exact cocycle; EvaluationPoint reads
/// x(0) at the point the cocycle is evaluated at.
enum class AnchorReading { OrbitOrigin, EvaluationPoint };

struct ComponentLaw {
  ExponentLaw law = ExponentLaw::PlusX;
  double mu = 0.0;
};

/// Diagonal cocycle Psi(t, t0, x) = diag(exp(law_i)) over a shift semiflow.
struct CocycleSpec {
  std::vector<ComponentLaw> components;
  AnchorReading anchor = AnchorReading::OrbitOrigin;

  std::size_t dimension() const { return components.size(); }
  void validate() const;
};

/// log of the i-th diagonal multiplier of Psi(t, t0, x).
double log_multiplier(const CocycleSpec& spec, std::size_t i, double t, double t0, const BasePoint& x);
std::vector<double> log_multipliers(const CocycleSpec& spec, double t, double t0, const BasePoint& x);

StateVector eval_cocycle(const CocycleSpec& spec, double t, double t0, const BasePoint& x, std::span<const double> v);

/// Skew-evolution semiflow xi = (psi, Psi) together with the state norm.
struct SkewSemiflow {
  SemiflowSpec semiflow;
  CocycleSpec cocycle;
  NormKind norm = NormKind::L2;

  std::size_t dimension() const { return cocycle.dimension(); }
};

/// Base argument used by the orbit-wise constructs (pointwise trichotomy,
/// the characterizations): Evolved evaluates Psi(t, t0, psi(t, t0, x0)),
/// Initial evaluates Psi(t, t0, x0).
enum class OrbitReading { Initial, Evolved };

BasePoint orbit_base(const SkewSemiflow& xi, OrbitReading reading, double t, double t0, const BasePoint& x0);

/// Sampling plan. Triples are t0 + first_steps + second_steps; pairs are the
/// distinct (t, t0) and (s, t0) drawn from the triples.
struct GridSpec {
  std::vector<double> t0_values;
  std::vector<double> first_steps;
  std::vector<double> second_steps;
  std::vector<BasePoint> points;
  std::vector<StateVector> probes;
  double tol = 1e-9;

  std::vector<TimeTriple> triples() const;
  std::vector<TimePair> pairs() const;
  /// Distinct time instants appearing anywhere in the triples.
  std::vector<double> instants() const;
  bool empty() const;
};

/// Basis vectors, every nonzero 0/1 indicator, and `random_count` seeded
/// L2-unit vectors.
std::vector<StateVector> default_probes(std::size_t dim, std::uint64_t seed, int random_count = 8);

enum class AxiomLaw { ES1, ES2, EC1, EC2 };
std::string to_string(AxiomLaw law);

struct AxiomReport {
  AxiomLaw law = AxiomLaw::ES1;
  double max_residual = 0.0;
  TimeTriple worst_times;
  std::string worst_point;
  int worst_probe = -1;
  double tol = 1e-9;
  bool pass = true;
};

struct MetricOptions {
  int depth = 20;
  double tau_step = 0.01;
};

std::array<AxiomReport, 2> check_semiflow_axioms(const SemiflowSpec& spec, const GridSpec& grid,
                                                 const MetricOptions& metric = {});

/// EC2 residuals are normalized by max(||Psi(t,t0,x)v||, 1e-300).
std::array<AxiomReport, 2> check_cocycle_axioms(const CocycleSpec& cocycle, const SemiflowSpec& semiflow,
                                                const GridSpec& grid, NormKind norm = NormKind::L2);

}  // namespace skewflow
