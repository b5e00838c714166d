#include "skewflow/projectors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewflow/errors.hpp"

namespace skewflow {

namespace {

constexpr double kFloor = 1e-300;

std::vector<bool> mask_from(std::size_t dim, const std::vector<int>& kept) {
  std::vector<bool> mask(dim, false);
  for (int k : kept) {
    if (k < 1 || static_cast<std::size_t>(k) > dim) throw DimensionError("coordinate projection index out of range");
    mask[static_cast<std::size_t>(k - 1)] = true;
  }
  return mask;
}

std::string mask_text(const std::vector<bool>& mask) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    os << (first ? "" : ",") << i + 1;
    first = false;
  }
  os << "}";
  return os.str();
}

double index_scalar(const ProjectionIndex& index) {
  if (const auto* t = std::get_if<double>(&index)) return *t;
  const auto& x = std::get<BasePoint>(index);
  return x.at_limit ? 0.0 : x.shift;
}

StateVector sub(std::span<const double> a, std::span<const double> b) {
  StateVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

StateVector add(std::span<const double> a, std::span<const double> b) {
  StateVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

}  // namespace

ProjectionFamily ProjectionFamily::coordinates(std::size_t dim, std::vector<int> kept, Indexing indexing) {
  ProjectionFamily p;
  p.kind_ = Kind::Coordinate;
  p.indexing_ = indexing;
  p.dim_ = dim;
  p.mask_ = mask_from(dim, kept);
  return p;
}

ProjectionFamily ProjectionFamily::zero(std::size_t dim, Indexing indexing) {
  ProjectionFamily p;
  p.kind_ = Kind::Zero;
  p.indexing_ = indexing;
  p.dim_ = dim;
  p.mask_.assign(dim, false);
  return p;
}

ProjectionFamily ProjectionFamily::identity(std::size_t dim, Indexing indexing) {
  ProjectionFamily p;
  p.kind_ = Kind::Identity;
  p.indexing_ = indexing;
  p.dim_ = dim;
  p.mask_.assign(dim, true);
  return p;
}

ProjectionFamily ProjectionFamily::complement_of(const ProjectionFamily& ref) {
  ProjectionFamily p;
  p.kind_ = Kind::ComplementOf;
  p.indexing_ = ref.indexing_;
  p.dim_ = ref.dim_;
  p.left_ = std::make_shared<const ProjectionFamily>(ref);
  return p;
}

ProjectionFamily ProjectionFamily::product(const ProjectionFamily& left, const ProjectionFamily& right) {
  if (left.dim_ != right.dim_) throw DimensionError("product of projections with different dimensions");
  if (left.indexing_ != right.indexing_) throw IndexKindError("product of projections with different indexing");
  ProjectionFamily p;
  p.kind_ = Kind::Product;
  p.indexing_ = left.indexing_;
  p.dim_ = left.dim_;
  p.left_ = std::make_shared<const ProjectionFamily>(left);
  p.right_ = std::make_shared<const ProjectionFamily>(right);
  return p;
}

ProjectionFamily ProjectionFamily::alternating(std::size_t dim, std::vector<int> even, std::vector<int> odd,
                                               Indexing indexing) {
  ProjectionFamily p;
  p.kind_ = Kind::Alternating;
  p.indexing_ = indexing;
  p.dim_ = dim;
  p.mask_ = mask_from(dim, even);
  p.odd_mask_ = mask_from(dim, odd);
  return p;
}

ProjectionFamily ProjectionFamily::reindexed(Indexing indexing) const {
  ProjectionFamily p = *this;
  p.indexing_ = indexing;
  if (left_) p.left_ = std::make_shared<const ProjectionFamily>(left_->reindexed(indexing));
  if (right_) p.right_ = std::make_shared<const ProjectionFamily>(right_->reindexed(indexing));
  return p;
}

std::vector<bool> ProjectionFamily::mask_at(const ProjectionIndex& index) const {
  const bool is_time = std::holds_alternative<double>(index);
  if (is_time != (indexing_ == Indexing::Time)) {
    throw IndexKindError(indexing_ == Indexing::Time ? "time-indexed projection needs a time index"
                                                     : "point-indexed projection needs a base point index");
  }
  return mask_unchecked(index);
}

std::vector<bool> ProjectionFamily::mask_unchecked(const ProjectionIndex& index) const {
  switch (kind_) {
    case Kind::Coordinate:
    case Kind::Zero:
    case Kind::Identity:
      return mask_;
    case Kind::Alternating: {
      const auto parity = static_cast<long long>(std::floor(index_scalar(index)));
      return parity % 2 == 0 ? mask_ : odd_mask_;
    }
    case Kind::ComplementOf: {
      auto m = left_->mask_unchecked(index);
      m.flip();
      return m;
    }
    case Kind::Product: {
      auto m = left_->mask_unchecked(index);
      const auto r = right_->mask_unchecked(index);
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] && r[i];
      return m;
    }
  }
  return mask_;
}

StateVector ProjectionFamily::apply(const ProjectionIndex& index, std::span<const double> v) const {
  if (v.size() != dim_) throw DimensionError("projection applied to a vector of the wrong dimension");
  const auto m = mask_at(index);
  StateVector out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!m[i]) out[i] = 0.0;
  }
  return out;
}

std::string ProjectionFamily::describe() const {
  switch (kind_) {
    case Kind::Coordinate:
      return "COORD" + mask_text(mask_);
    case Kind::Zero:
      return "ZERO";
    case Kind::Identity:
      return "IDENTITY";
    case Kind::ComplementOf:
      return "COMPLEMENT(" + left_->describe() + ")";
    case Kind::Product:
      return left_->describe() + "*" + right_->describe();
    case Kind::Alternating:
      return "ALTERNATING(" + mask_text(mask_) + "," + mask_text(odd_mask_) + ")";
  }
  return "?";
}

StateVector apply_projection(const ProjectionFamily& p, const ProjectionIndex& index, std::span<const double> v) {
  return p.apply(index, v);
}

ProjectionFamily complementary_projector(const ProjectionFamily& p) {
  using Kind = ProjectionFamily::Kind;
  const std::size_t dim = p.dimension();
  switch (p.kind()) {
    case Kind::Zero:
      return ProjectionFamily::identity(dim, p.indexing());
    case Kind::Identity:
      return ProjectionFamily::zero(dim, p.indexing());
    case Kind::Coordinate: {
      // Constant masks: read it at any index of the right kind.
      const ProjectionIndex idx = p.indexing() == Indexing::Time ? ProjectionIndex{0.0}
                                                                 : ProjectionIndex{BasePoint{}};
      const auto m = p.mask_at(idx);
      std::vector<int> kept;
      for (std::size_t i = 0; i < dim; ++i) {
        if (!m[i]) kept.push_back(static_cast<int>(i + 1));
      }
      if (kept.empty()) return ProjectionFamily::zero(dim, p.indexing());
      if (kept.size() == dim) return ProjectionFamily::identity(dim, p.indexing());
      return ProjectionFamily::coordinates(dim, kept, p.indexing());
    }
    default:
      return ProjectionFamily::complement_of(p);
  }
}

AxiomReport check_invariance(const ProjectionFamily& p, const SkewSemiflow& xi, const GridSpec& grid,
                             OrbitReading reading) {
  if (grid.empty() || grid.probes.empty()) throw EmptyGridError("check_invariance: grid needs times, points and probes");
  AxiomReport rep{AxiomLaw::EC2};
  rep.tol = grid.tol;
  const NormKind nk = xi.norm;
  for (const auto& pair : grid.pairs()) {
    const double t = pair.t;
    const double s = pair.t0;
    for (const auto& x : grid.points) {
      const bool by_point = p.indexing() == Indexing::Point;
      const BasePoint base = by_point ? x : orbit_base(xi, reading, t, s, x);
      const ProjectionIndex before = by_point ? ProjectionIndex{x} : ProjectionIndex{s};
      const ProjectionIndex after =
          by_point ? ProjectionIndex{eval_semiflow(xi.semiflow, t, s, x)} : ProjectionIndex{t + s};
      for (std::size_t k = 0; k < grid.probes.size(); ++k) {
        const auto& v = grid.probes[k];
        const auto moved = eval_cocycle(xi.cocycle, t, s, base, v);
        const auto lhs = p.apply(after, moved);
        const auto rhs = eval_cocycle(xi.cocycle, t, s, base, p.apply(before, v));
        const double scale = std::max({norm(lhs, nk), norm(rhs, nk), norm(moved, nk), kFloor});
        const double r = norm(sub(lhs, rhs), nk) / scale;
        if (r > rep.max_residual) {
          rep.max_residual = r;
          rep.worst_times = TimeTriple{t, s, s};
          rep.worst_point = x.label();
          rep.worst_probe = static_cast<int>(k);
        }
      }
    }
  }
  rep.pass = rep.max_residual <= rep.tol;
  return rep;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::ThreeGlobal:
      return "three_global";
    case Regime::ThreePointwise:
      return "three_pointwise";
    case Regime::Two:
      return "two";
    case Regime::Four:
      return "four";
  }
  return "?";
}

namespace {

struct Residuals {
  std::map<std::string, double>& map;
  void bump(const std::string& label, double r) {
    auto& slot = map[label];
    slot = std::max(slot, std::isnan(r) ? INFINITY : r);
  }
};

double pythagoras(std::span<const double> a, std::span<const double> b, NormKind nk) {
  const double na = norm(a, nk);
  const double nb = norm(b, nk);
  const double nab = norm(add(a, b), nk);
  return std::abs(nab * nab - na * na - nb * nb);
}

}  // namespace

CompatibilityReport check_compatibility(Regime regime, std::span<const ProjectionFamily> families,
                                        const SkewSemiflow& xi, const GridSpec& grid, double tol,
                                        OrbitReading reading) {
  const std::size_t expected = regime == Regime::Two ? 2 : regime == Regime::Four ? 4 : 3;
  if (families.size() != expected) {
    throw FamilyCountError(to_string(regime) + " regime needs " + std::to_string(expected) + " families, got " +
                           std::to_string(families.size()));
  }
  if (grid.probes.empty()) throw EmptyGridError("check_compatibility: no probe vectors");

  CompatibilityReport rep;
  rep.regime = regime;
  rep.norm = xi.norm;
  rep.tol = tol;
  Residuals res{rep.residuals};
  const NormKind nk = xi.norm;

  std::vector<ProjectionIndex> indices;
  if (regime == Regime::ThreeGlobal) {
    for (const auto& x : grid.points) indices.emplace_back(x);
  } else {
    for (double t : grid.instants()) indices.emplace_back(t);
  }

  const std::string invariance_label = regime == Regime::ThreeGlobal    ? "c1"
                                       : regime == Regime::ThreePointwise ? "cp1"
                                       : regime == Regime::Two            ? "cq5"
                                                                          : "cr6";
  res.bump(invariance_label, 0.0);
  for (const auto& f : families) res.bump(invariance_label, check_invariance(f, xi, grid, reading).max_residual);

  for (const auto& idx : indices) {
    for (const auto& v : grid.probes) {
      const double vn = std::max(norm(v, nk), kFloor);
      std::vector<StateVector> pv;
      for (const auto& f : families) pv.push_back(f.apply(idx, v));
      auto pp = [&](std::size_t i, std::size_t j) { return families[i].apply(idx, pv[j]); };

      switch (regime) {
        case Regime::ThreeGlobal:
        case Regime::ThreePointwise: {
          const std::string sum_label = regime == Regime::ThreeGlobal ? "c2" : "cp2";
          res.bump(sum_label, norm(sub(add(add(pv[0], pv[1]), pv[2]), v), nk) / vn);
          for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
              if (i == j) continue;
              res.bump(sum_label, norm(pp(i, j), nk) / vn);
              if (regime == Regime::ThreePointwise) res.bump("cp3", pythagoras(pv[i], pv[j], nk));
            }
          }
          break;
        }
        case Regime::Two: {
          res.bump("cq1", std::max(norm(pp(0, 1), nk), norm(pp(1, 0), nk)) / vn);
          res.bump("cq2", pythagoras(pv[0], pv[1], nk));
          const auto rest = sub(sub(v, pv[0]), pv[1]);  // (I - Q1 - Q2) v
          const auto not1 = sub(v, pv[0]);
          const auto not2 = sub(v, pv[1]);
          const double n_rest = norm(rest, nk);
          res.bump("cq3", std::abs(std::pow(norm(not1, nk), 2) - n_rest * n_rest - std::pow(norm(pv[1], nk), 2)));
          res.bump("cq4", std::abs(std::pow(norm(not2, nk), 2) - n_rest * n_rest - std::pow(norm(pv[0], nk), 2)));
          break;
        }
        case Regime::Four: {
          res.bump("cr1", std::max(norm(sub(add(pv[0], pv[2]), v), nk), norm(sub(add(pv[1], pv[3]), v), nk)) / vn);
          const auto r34 = pp(2, 3);
          const auto r43 = pp(3, 2);
          res.bump("cr2", std::max({norm(pp(0, 1), nk), norm(pp(1, 0), nk), norm(sub(r34, r43), nk)}) / vn);
          res.bump("cr3", pythagoras(pv[0], pv[1], nk));
          res.bump("cr4", pythagoras(pv[0], r34, nk));
          res.bump("cr5", pythagoras(pv[1], r34, nk));
          break;
        }
      }
    }
  }

  rep.pass = true;
  for (const auto& [label, r] : rep.residuals) rep.pass = rep.pass && r <= tol;
  return rep;
}

}  // namespace skewflow
