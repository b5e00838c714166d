#include "skewflow/trichotomy.hpp"

#include <algorithm>
#include <cmath>

#include "skewflow/errors.hpp"

namespace skewflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// lhs - rhs for log-norms, where -inf encodes a zero vector.
double log_gap(double lhs, double rhs) {
  if (lhs == -kInf) return -kInf;  // 0 <= anything
  if (rhs == -kInf) return kInf;   // positive <= 0 never holds
  return lhs - rhs;
}

void require_compatible(Mode mode, const SkewSemiflow& xi, const TrichotomyFamilies& families, const GridSpec& grid,
                        double tol, OrbitReading reading) {
  const auto fams = families.as_array();
  const auto regime = mode == Mode::Global ? Regime::ThreeGlobal : Regime::ThreePointwise;
  const auto rep = check_compatibility(regime, fams, xi, grid, tol, reading);
  if (!rep.pass) {
    std::string failed;
    for (const auto& [label, r] : rep.residuals) {
      if (r > tol) failed += (failed.empty() ? "" : ",") + label;
    }
    throw IncompatibleFamiliesError("projection families are not " + to_string(regime) +
                                    "-compatible (failed: " + failed + ")");
  }
}

const ProjectionFamily& family(const TrichotomyFamilies& f, int k) {
  return k == 0 ? f.p0 : k == 1 ? f.p1 : f.p2;
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::Global ? "global" : "pointwise"; }

void RateCertificate::validate() const {
  for (int k = 0; k < 3; ++k) {
    if (!(N[k] > 1.0) || !std::isfinite(N[k])) throw ParamError("certificate constant N" + std::to_string(k) + " must be > 1");
    if (!(nu[k] > 0.0) || !std::isfinite(nu[k])) throw ParamError("certificate rate nu" + std::to_string(k) + " must be > 0");
  }
  if (scope == Mode::Pointwise && !x0) throw ParamError("pointwise certificate needs its base point");
}

std::vector<std::string> direction_labels(Mode mode, int k) {
  if (mode == Mode::Global) {
    if (k == 0) return {"t0-lower", "t0-upper"};
    return {k == 1 ? "t1" : "t2"};
  }
  if (k == 0) return {"pt01", "pt02"};
  return {k == 1 ? "pt1" : "pt2"};
}

std::vector<std::pair<std::string, ConstraintSample>> collect_samples(Mode mode, int k, const SkewSemiflow& xi,
                                                                      const TrichotomyFamilies& families,
                                                                      const GridSpec& grid,
                                                                      const std::optional<BasePoint>& x0,
                                                                      OrbitReading reading) {
  if (grid.empty() || grid.probes.empty()) throw EmptyGridError("trichotomy sweep needs times, points and probes");
  const auto& fam = family(families, k);
  const auto labels = direction_labels(mode, k);
  const NormKind nk = xi.norm;
  std::vector<std::pair<std::string, ConstraintSample>> out;

  auto push = [&](double lhs_minus_rhs_a, double coef, const Witness& w, std::size_t which) {
    out.emplace_back(labels[which], ConstraintSample{lhs_minus_rhs_a, coef, w});
  };

  if (mode == Mode::Global) {
    for (const auto& pair : grid.pairs()) {
      const double delta = pair.t - pair.t0;
      for (const auto& x : grid.points) {
        const auto g = log_multipliers(xi.cocycle, pair.t, pair.t0, x);
        for (std::size_t p = 0; p < grid.probes.size(); ++p) {
          const auto w = fam.apply(x, grid.probes[p]);
          const double log_p = log_norm(w, nk);
          const double log_psi = log_norm_scaled(g, w, nk);
          const Witness wit{TimeTriple{pair.t, pair.t0, pair.t0}, x.label(), static_cast<int>(p)};
          if (k == 0) {
            push(log_gap(log_p, log_psi), -delta, wit, 0);
            push(log_gap(log_psi, log_p), -delta, wit, 1);
          } else if (k == 1) {
            push(log_gap(log_psi, log_p), delta, wit, 0);
          } else {
            push(log_gap(log_p, log_psi), delta, wit, 0);
          }
        }
      }
    }
    return out;
  }

  if (!x0) throw ScopeMismatchError("pointwise sweep needs a base point x0");
  for (const auto& tr : grid.triples()) {
    const double delta = tr.t - tr.s;
    const auto gt = log_multipliers(xi.cocycle, tr.t, tr.t0, orbit_base(xi, reading, tr.t, tr.t0, *x0));
    const auto gs = log_multipliers(xi.cocycle, tr.s, tr.t0, orbit_base(xi, reading, tr.s, tr.t0, *x0));
    for (std::size_t p = 0; p < grid.probes.size(); ++p) {
      const auto w = fam.apply(tr.t0, grid.probes[p]);
      const double at = log_norm_scaled(gt, w, nk);
      const double as = log_norm_scaled(gs, w, nk);
      const Witness wit{tr, x0->label(), static_cast<int>(p)};
      if (k == 0) {
        push(log_gap(as, at), -delta, wit, 0);
        push(log_gap(at, as), -delta, wit, 1);
      } else if (k == 1) {
        push(log_gap(at, as), delta, wit, 0);
      } else {
        push(log_gap(as, at), delta, wit, 0);
      }
    }
  }
  return out;
}

VerificationVerdict verify_trichotomy(Mode mode, const SkewSemiflow& xi, const TrichotomyFamilies& families,
                                      const RateCertificate& cert, const GridSpec& grid,
                                      const TrichotomyOptions& options) {
  if (cert.scope != mode) throw ScopeMismatchError("certificate scope does not match verification mode");
  if (mode == Mode::Pointwise && !cert.x0) throw ScopeMismatchError("pointwise certificate carries no base point");
  if (options.check_compatibility) require_compatible(mode, xi, families, grid, options.compat_tol, options.reading);

  VerificationVerdict verdict;
  verdict.tol = options.tol;
  for (int k = 0; k < 3; ++k) {
    for (const auto& label : direction_labels(mode, k)) verdict.margins[label] = kInf;
    const double log_n = std::log(cert.N[k]);
    for (const auto& [label, sample] : collect_samples(mode, k, xi, families, grid, cert.x0, options.reading)) {
      double margin = kInf;
      if (sample.r == kInf) {
        margin = -kInf;
      } else if (sample.r != -kInf) {
        margin = log_n - (sample.r + sample.coef * cert.nu[k]);
      }
      if (options.rows) options.rows->push_back(MarginRow{sample.witness.times, sample.witness.point,
                                                          sample.witness.probe, label, margin});
      if (margin < verdict.margins[label]) {
        verdict.margins[label] = margin;
        verdict.witnesses[label] = sample.witness;
      }
    }
  }
  verdict.pass = true;
  for (const auto& [label, m] : verdict.margins) verdict.pass = verdict.pass && m >= -options.tol;
  return verdict;
}

double inflate_constant(double minimal_N) {
  if (minimal_N > 1.0) return minimal_N * (1.0 + 1e-9);
  return std::nextafter(1.0, 2.0);
}

double minimal_constant(const std::vector<ConstraintSample>& samples, double nu) {
  double worst = -kInf;
  for (const auto& s : samples) {
    if (s.r == -kInf) continue;
    if (s.r == kInf) return kInf;
    worst = std::max(worst, s.r + s.coef * nu);
  }
  return std::exp(worst);
}

namespace {

EstimateResult estimate_from_samples(const std::array<std::vector<ConstraintSample>, 3>& samples,
                                     const std::vector<double>& nu_grid, double n_cap, Mode scope,
                                     const std::optional<BasePoint>& x0) {
  if (nu_grid.empty()) throw ParamError("nu grid must be nonempty");
  if (!std::is_sorted(nu_grid.begin(), nu_grid.end())) throw ParamError("nu grid must be ascending");
  EstimateResult result;
  RateCertificate cert;
  cert.scope = scope;
  cert.x0 = x0;
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    std::optional<std::pair<double, double>> pick;
    auto try_nu = [&](double nu) {
      const double n_min = minimal_constant(samples[k], nu);
      if (n_min <= n_cap) pick = std::pair{nu, n_min};
      return pick.has_value();
    };
    if (k == 0) {
      for (double nu : nu_grid) {
        if (try_nu(nu)) break;
      }
    } else {
      for (auto it = nu_grid.rbegin(); it != nu_grid.rend(); ++it) {
        if (try_nu(*it)) break;
      }
    }
    if (!pick) {
      ok = false;
      result.failure += (result.failure.empty() ? "" : "; ") + std::string("no rate in the grid keeps N") +
                        std::to_string(k) + " under the cap";
      continue;
    }
    result.nu[k] = pick->first;
    result.minimal_N[k] = pick->second;
    cert.nu[k] = pick->first;
    cert.N[k] = inflate_constant(pick->second);
  }
  if (ok) result.certificate = cert;
  return result;
}

}  // namespace

EstimateResult estimate_rate_constants(const SkewSemiflow& xi, const TrichotomyFamilies& families, Mode mode,
                                       const GridSpec& grid, const std::vector<double>& nu_grid, double n_cap,
                                       const EstimateOptions& options) {
  if (grid.empty() || grid.probes.empty()) throw EmptyGridError("estimate_rate_constants: empty grid");
  if (options.check_compatibility) require_compatible(mode, xi, families, grid, options.compat_tol, options.reading);
  std::array<std::vector<ConstraintSample>, 3> samples;
  for (int k = 0; k < 3; ++k) {
    for (auto& [label, s] : collect_samples(mode, k, xi, families, grid, options.x0, options.reading)) {
      samples[k].push_back(s);
    }
  }
  return estimate_from_samples(samples, nu_grid, n_cap, mode, mode == Mode::Pointwise ? options.x0 : std::nullopt);
}

EstimateResult estimate_uniform_certificate(const std::vector<FamilyMember>& members,
                                            const std::vector<double>& nu_grid, double n_cap,
                                            OrbitReading reading) {
  if (members.empty()) throw EmptyGridError("uniform certificate search needs at least one member");
  std::array<std::vector<ConstraintSample>, 3> samples;
  for (const auto& m : members) {
    for (int k = 0; k < 3; ++k) {
      for (auto& [label, s] : collect_samples(Mode::Pointwise, k, m.xi, m.families, m.grid, m.x0, reading)) {
        s.witness.point = m.id + ":" + s.witness.point;
        samples[k].push_back(s);
      }
    }
  }
  // The certificate is scoped to the first member's point for bookkeeping;
  // callers verify it member by member.
  return estimate_from_samples(samples, nu_grid, n_cap, Mode::Pointwise, members.front().x0);
}

TrichotomyFamilies derive_special_case(SpecialCase kind, const TrichotomyFamilies& families) {
  TrichotomyFamilies out = families;
  out.p0 = ProjectionFamily::zero(families.p0.dimension(), families.p0.indexing());
  if (kind == SpecialCase::Stability) out.p2 = ProjectionFamily::zero(families.p2.dimension(), families.p2.indexing());
  return out;
}

FalsificationReport falsify_global(const std::vector<FamilyMember>& members, const std::vector<double>& thresholds,
                                   const FalsifyOptions& options) {
  FalsificationReport rep;
  rep.thresholds = thresholds;
  EstimateOptions est;
  est.reading = options.reading;
  for (const auto& m : members) {
    est.x0 = m.x0;
    PointRate pr{m.id, std::nullopt, std::nullopt};
    try {
      auto r = estimate_rate_constants(m.xi, m.families, Mode::Pointwise, m.grid, options.nu_grid,
                                       options.point_n_cap, est);
      pr.nu1 = r.nu[1];
      pr.certificate = r.certificate;
    } catch (const IncompatibleFamiliesError&) {
    }
    rep.every_point_certified = rep.every_point_certified && pr.certificate.has_value();
    rep.per_point.push_back(std::move(pr));
  }
  for (std::size_t i = 1; i < rep.per_point.size(); ++i) {
    const auto& a = rep.per_point[i - 1].nu1;
    const auto& b = rep.per_point[i].nu1;
    if (a && b && *b > *a + options.monotone_tol) rep.rates_nonincreasing = false;
  }

  if (!members.empty()) {
    auto uniform = estimate_uniform_certificate(members, options.nu_grid, options.uniform_n_cap, options.reading);
    rep.uniform_certificate_found = uniform.certificate.has_value();
    rep.uniform_certificate = uniform.certificate;
  }

  bool undercut = !thresholds.empty();
  for (double theta : thresholds) {
    bool some = false;
    for (const auto& pr : rep.per_point) some = some || (pr.nu1 && *pr.nu1 < theta);
    undercut = undercut && some;
  }
  rep.conclusion = members.size() >= 3 && rep.every_point_certified && undercut;
  return rep;
}

std::vector<double> linear_grid(double first, double last, double step) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((last - first) / step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(first + static_cast<double>(i) * step);
  return out;
}

std::vector<double> log_grid(double first, double last, int count) {
  std::vector<double> out;
  if (count == 1) return {first};
  const double lf = std::log(first);
  const double ll = std::log(last);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(lf + (ll - lf) * i / (count - 1)));
  return out;
}

}  // namespace skewflow
