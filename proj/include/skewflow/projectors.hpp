#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "skewflow/core.hpp"

namespace skewflow {

enum class Indexing { Point, Time };

/// Index of a projection: a base point for P(x), a time for P~(t).
using ProjectionIndex = std::variant<BasePoint, double>;

/// Idempotent diagonal projection family. Every representable kind is a 0/1
/// coordinate mask at each index, so idempotence and commutation are exact.
class ProjectionFamily {
 public:
  enum class Kind { Coordinate, Zero, Identity, ComplementOf, Product, Alternating };

  /// Keeps the listed coordinates (1-based, as in P1(x)v = (v1, 0, 0)).
  static ProjectionFamily coordinates(std::size_t dim, std::vector<int> kept, Indexing indexing = Indexing::Point);
  static ProjectionFamily zero(std::size_t dim, Indexing indexing = Indexing::Point);
  static ProjectionFamily identity(std::size_t dim, Indexing indexing = Indexing::Point);
  static ProjectionFamily complement_of(const ProjectionFamily& ref);
  static ProjectionFamily product(const ProjectionFamily& left, const ProjectionFamily& right);
  /// Keeps `even` when floor(index) is even and `odd` otherwise. The index
  /// is the time (time-indexed) or the point's shift (point-indexed).
  static ProjectionFamily alternating(std::size_t dim, std::vector<int> even, std::vector<int> odd,
                                      Indexing indexing = Indexing::Time);

  Kind kind() const { return kind_; }
  Indexing indexing() const { return indexing_; }
  std::size_t dimension() const { return dim_; }
  /// Same family re-indexed by time (or by point); masks are unchanged.
  ProjectionFamily reindexed(Indexing indexing) const;

  /// Diagonal mask at `index`; IndexKindError when the index kind does not
  /// match the family's indexing.
  std::vector<bool> mask_at(const ProjectionIndex& index) const;

  StateVector apply(const ProjectionIndex& index, std::span<const double> v) const;

  std::string describe() const;

 private:
  ProjectionFamily() = default;
  std::vector<bool> mask_unchecked(const ProjectionIndex& index) const;

  Kind kind_ = Kind::Zero;
  Indexing indexing_ = Indexing::Point;
  std::size_t dim_ = 0;
  std::vector<bool> mask_;
  std::vector<bool> odd_mask_;
  std::shared_ptr<const ProjectionFamily> left_;
  std::shared_ptr<const ProjectionFamily> right_;
};

StateVector apply_projection(const ProjectionFamily& p, const ProjectionIndex& index, std::span<const double> v);

/// v -> v - P v, simplified to a mask kind whenever possible.
ProjectionFamily complementary_projector(const ProjectionFamily& p);

/// Invariance of P relative to xi. Point-indexed families are checked
/// against P(psi(t,s,x)) Psi(t,s,x) v = Psi(t,s,x) P(x) v; time-indexed ones
/// against P~(t+s) Psi(t,s,b) v = Psi(t,s,b) P~(s) v with b the orbit base
/// for `reading`. Residual is the relative norm gap.
AxiomReport check_invariance(const ProjectionFamily& p, const SkewSemiflow& xi, const GridSpec& grid,
                             OrbitReading reading = OrbitReading::Initial);

enum class Regime { ThreeGlobal, ThreePointwise, Two, Four };
std::string to_string(Regime regime);

struct CompatibilityReport {
  Regime regime = Regime::ThreeGlobal;
  NormKind norm = NormKind::L2;
  std::map<std::string, double> residuals;
  double tol = 1e-12;
  bool pass = true;
};

/// Families are ordered (P0, P1, P2) for the three-family regimes,
/// (Q1, Q2) for Two and (R1, R2, R3, R4) for Four.
CompatibilityReport check_compatibility(Regime regime, std::span<const ProjectionFamily> families,
                                        const SkewSemiflow& xi, const GridSpec& grid, double tol = 1e-12,
                                        OrbitReading reading = OrbitReading::Initial);

}  // namespace skewflow
