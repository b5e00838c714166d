#include "skewflow/integral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>
#include <set>
#include <sstream>

#include "skewflow/errors.hpp"

namespace skewflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Kronrod 15-point abscissae and weights; odd indices carry the Gauss 7-point rule.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    const double pair = f(c - dx) + f(c + dx);
    kronrod += kWgk[i] * pair;
    if (i % 2 == 1) gauss += kWg[i / 2] * pair;
  }
  kronrod *= h;
  gauss *= h;
  if (!std::isfinite(kronrod)) throw NonConvergenceError("integrand is not finite on the interval");
  return Segment{a, b, kronrod, std::abs(kronrod - gauss)};
}

double log_gap(double lhs, double rhs) {
  if (lhs == -kInf) return -kInf;
  if (rhs == -kInf) return kInf;
  return lhs - rhs;
}

/// Margin rhs - lhs of a log-space inequality lhs <= rhs.
double log_margin(double lhs, double rhs) { return -log_gap(lhs, rhs); }

void note(VerificationVerdict& v, const std::string& label, double margin, const Witness& w) {
  auto it = v.margins.find(label);
  if (it == v.margins.end() || margin < it->second) {
    v.margins[label] = margin;
    v.witnesses[label] = w;
  }
}

std::vector<double> sorted_times_after(const GridSpec& grid, double t0) {
  std::set<double> out;
  for (const auto& tr : grid.triples()) {
    if (tr.t0 == t0) {
      out.insert(tr.t);
      out.insert(tr.s);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<double> distinct_t0(const GridSpec& grid) {
  std::set<double> out(grid.t0_values.begin(), grid.t0_values.end());
  return {out.begin(), out.end()};
}

/// log ||Psi(tau, t0, b) w|| along the orbit of x0.
double orbit_log_norm(const SkewSemiflow& xi, OrbitReading reading, const BasePoint& x0, double tau, double t0,
                      std::span<const double> w) {
  const auto b = orbit_base(xi, reading, tau, t0, x0);
  return log_norm_scaled(log_multipliers(xi.cocycle, tau, t0, b), w, xi.norm);
}

}  // namespace

QuadratureResult quadrature(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(a <= b)) throw TimeOrderError("quadrature needs a <= b");
  if (!(tol > 0.0)) throw ParamError("quadrature tolerance must be > 0");
  if (a == b) return {0.0, 0.0};

  constexpr std::size_t kMaxSegments = std::size_t{1} << 20;
  std::vector<Segment> heap{gk15(f, a, b)};
  auto exact_error = [&heap] {
    double e = 0.0;
    for (const auto& s : heap) e += s.error;
    return e;
  };
  double total_err = heap.front().error;
  for (;;) {
    // The running total drifts under cancellation; confirm before stopping.
    if (total_err <= tol && (total_err = exact_error()) <= tol) break;
    if (heap.size() >= kMaxSegments) throw NonConvergenceError("quadrature hit the subdivision limit");
    std::pop_heap(heap.begin(), heap.end());
    const Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) throw NonConvergenceError("quadrature interval cannot be split further");
    for (const Segment& half : {gk15(f, worst.a, mid), gk15(f, mid, worst.b)}) {
      total_err += half.error;
      heap.push_back(half);
      std::push_heap(heap.begin(), heap.end());
    }
    total_err -= worst.error;
  }

  QuadratureResult out;
  // Sum smallest first for a stable total.
  std::vector<Segment> segs = std::move(heap);
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) {
    return std::abs(x.value) < std::abs(y.value);
  });
  for (const auto& s : segs) {
    out.value += s.value;
    out.error += s.error;
  }
  return out;
}

PhiFunction PhiFunction::exponential(double N, double nu) {
  if (!(N > 0.0) || !std::isfinite(N)) throw ParamError("phi: N must be > 0");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ParamError("phi: nu must be > 0 (phi has to decrease to 0)");
  PhiFunction p;
  p.form_ = Form::Exponential;
  p.N_ = N;
  p.nu_ = nu;
  return p;
}

PhiFunction PhiFunction::tabulated(std::vector<double> times, std::vector<double> values, double tail_rate) {
  if (times.empty() || times.size() != values.size()) throw ParamError("phi: times and values must match");
  if (times.front() != 0.0) throw ParamError("phi: the table must start at t = 0");
  if (!(tail_rate > 0.0) || !std::isfinite(tail_rate)) throw ParamError("phi: tail rate must be > 0");
  PhiFunction p;
  p.form_ = Form::Tabulated;
  p.nu_ = tail_rate;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw ParamError("phi: values must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) throw ParamError("phi: times must increase");
    if (i > 0 && !(values[i] < values[i - 1])) throw ParamError("phi: values must strictly decrease");
    p.log_values_.push_back(std::log(values[i]));
  }
  p.times_ = std::move(times);
  p.N_ = values.front();
  return p;
}

double PhiFunction::log_value(double t) const {
  if (t < 0.0) throw DomainError("phi is defined on [0, inf)");
  if (form_ == Form::Exponential) return std::log(N_) - nu_ * t;
  if (t >= times_.back()) return log_values_.back() - nu_ * (t - times_.back());
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
  return (1.0 - w) * log_values_[i - 1] + w * log_values_[i];
}

double PhiFunction::operator()(double t) const { return std::exp(log_value(t)); }

std::string PhiFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (form_ == Form::Exponential) {
    os << N_ << " exp(-" << nu_ << " t)";
  } else {
    os << "tabulated(" << times_.size() << " samples, tail rate " << nu_ << ")";
  }
  return os.str();
}

std::pair<PhiFunction, PhiFunction> phi_from_constants(const RateCertificate& cert) {
  cert.validate();
  return {PhiFunction::exponential(cert.N[0], cert.nu[0]),
          PhiFunction::exponential(std::max(cert.N[1], cert.N[2]), std::min(cert.nu[1], cert.nu[2]))};
}

double find_delta(const PhiFunction& phi, double delta_max, double delta_step) {
  if (!(delta_step > 0.0)) throw ParamError("delta step must be > 0");
  const auto k_max = static_cast<long long>(std::floor((delta_max - 1.0) / delta_step + 1e-9));
  auto at = [&](long long k) { return 1.0 + static_cast<double>(k) * delta_step; };
  if (k_max < 1 || phi.log_value(at(k_max)) >= 0.0) {
    throw NoDeltaError("phi stays >= 1 on (1, " + std::to_string(delta_max) + "]");
  }
  long long lo = 0;
  long long hi = k_max;
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    if (phi.log_value(at(mid)) < 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return at(hi);
}

RateCertificate constants_from_phi(const PhiFunction& phi1, const PhiFunction& phi2, double delta_max,
                                   double delta_step, std::optional<BasePoint> x0) {
  const double d1 = find_delta(phi1, delta_max, delta_step);
  const double d2 = find_delta(phi2, delta_max, delta_step);
  RateCertificate cert;
  cert.scope = Mode::Pointwise;
  cert.x0 = std::move(x0);
  cert.nu[0] = -phi1.log_value(d1);
  cert.N[0] = std::max(phi1(1.0), 1.0 + 1e-9);
  cert.nu[1] = cert.nu[2] = -phi2.log_value(d2);
  cert.N[1] = cert.N[2] = std::max(phi2(1.0), 1.0 + 1e-9);
  return cert;
}

VerificationVerdict check_phi_characterization(const SkewSemiflow& xi, const BasePoint& x0,
                                               const ProjectionFamily& q1, const ProjectionFamily& q2,
                                               const PhiFunction& phi1, const PhiFunction& phi2,
                                               const GridSpec& grid, const PhiCheckOptions& options) {
  if (grid.empty() || grid.probes.empty()) throw EmptyGridError("phi check needs times and probes");
  if (options.check_compatibility) {
    const std::array<ProjectionFamily, 2> fams{q1, q2};
    const auto rep = check_compatibility(Regime::Two, fams, xi, grid, options.compat_tol, options.reading);
    if (!rep.pass) throw IncompatibleFamiliesError("Q1, Q2 are not compatible in the two-family regime");
  }
  const auto c1 = complementary_projector(q1);
  const auto c2 = complementary_projector(q2);
  const NormKind nk = xi.norm;

  VerificationVerdict verdict;
  verdict.tol = options.tol;
  for (const auto& pair : grid.pairs()) {
    const double t = pair.t;
    const double s = pair.t0;
    const double lp1 = phi1.log_value(t - s);
    const double lp2 = phi2.log_value(t - s);
    const auto g = log_multipliers(xi.cocycle, t, s, orbit_base(xi, options.reading, t, s, x0));
    for (std::size_t p = 0; p < grid.probes.size(); ++p) {
      const auto& v = grid.probes[p];
      const Witness wit{TimeTriple{t, s, s}, x0.label(), static_cast<int>(p)};

      const double a0 = log_norm(c1.apply(s, v), nk);
      const double b0 = log_norm_scaled(g, c1.apply(t + s, v), nk);
      note(verdict, "puet0", log_margin(lp1 + a0, b0), wit);

      const double a0p = log_norm_scaled(g, c2.apply(t + s, v), nk);
      const double b0p = log_norm(c2.apply(s, v), nk);
      note(verdict, "puet0'", log_margin(lp1 + a0p, b0p), wit);

      const auto w1 = q1.apply(s, v);
      note(verdict, "puet1", log_margin(log_norm_scaled(g, w1, nk), lp2 + log_norm(w1, nk)), wit);

      const auto w2 = q2.apply(s, v);
      note(verdict, "puet2", log_margin(log_norm(w2, nk), lp2 + log_norm_scaled(g, w2, nk)), wit);
    }
  }
  verdict.pass = true;
  for (const auto& [label, m] : verdict.margins) verdict.pass = verdict.pass && m >= -options.tol;
  return verdict;
}

std::string to_string(IntegralKind kind) {
  switch (kind) {
    case IntegralKind::U0:
      return "U0";
    case IntegralKind::U0P:
      return "U0P";
    case IntegralKind::U1:
      return "U1";
    case IntegralKind::U2:
      return "U2";
  }
  return "U0";
}

std::optional<DecayCertificate> fit_decay_certificate(const SkewSemiflow& xi, const BasePoint& x0,
                                                      const ProjectionFamily& r, const GridSpec& grid,
                                                      const std::vector<double>& beta_grid, double k_cap,
                                                      OrbitReading reading) {
  std::vector<ConstraintSample> samples;
  for (const auto& pair : grid.pairs()) {
    for (std::size_t p = 0; p < grid.probes.size(); ++p) {
      const auto w = r.apply(pair.t0, grid.probes[p]);
      const double at = orbit_log_norm(xi, reading, x0, pair.t, pair.t0, w);
      samples.push_back({log_gap(at, log_norm(w, xi.norm)), pair.t - pair.t0, {}});
    }
  }
  std::vector<double> betas = beta_grid;
  std::sort(betas.rbegin(), betas.rend());
  for (double beta : betas) {
    if (!(beta > 0.0)) continue;
    const double k = minimal_constant(samples, beta);
    if (k <= k_cap) return DecayCertificate{inflate_constant(k), beta};
  }
  return std::nullopt;
}

IntegralCheckResult integral_bound(IntegralKind kind, const SkewSemiflow& xi, const BasePoint& x0,
                                   const ProjectionFamily& r, const IntegralParams& params, const GridSpec& grid) {
  if (grid.empty() || grid.probes.empty()) throw EmptyGridError("integral_bound needs times and probes");
  if ((kind == IntegralKind::U0 || kind == IntegralKind::U0P) && !(params.alpha > 0.0)) {
    throw ParamError("integral_bound: alpha must be > 0");
  }
  if (!(params.bound > 0.0)) throw ParamError("integral_bound: bound constant must be > 0");
  double tail = 0.0;
  if (kind == IntegralKind::U1) {
    if (!params.tail || !(params.tail->beta > 0.0) || !(params.tail->K > 0.0) || !std::isfinite(params.tail->K)) {
      throw TailUnboundedError("U1 needs a decay certificate with beta > 0 to bound the tail");
    }
    if (!(params.horizon > 0.0)) throw ParamError("integral_bound: horizon must be > 0");
    tail = params.tail->K * std::exp(-params.tail->beta * params.horizon) / params.tail->beta;
  }

  IntegralCheckResult res;
  res.kind = kind;
  res.bound = params.bound;
  res.alpha = params.alpha;
  res.tail = tail;
  double worst_excess = -kInf;
  auto consider = [&](double value, double err, const Witness& w) {
    const double excess = value - params.bound - err;
    if (excess > worst_excess) {
      worst_excess = excess;
      res.integral = value;
      res.error = err;
      res.worst = w;
    }
  };
  const auto reading = params.reading;
  const NormKind nk = xi.norm;

  for (double t0 : distinct_t0(grid)) {
    const auto times = sorted_times_after(grid, t0);
    for (std::size_t p = 0; p < grid.probes.size(); ++p) {
      const auto w = r.apply(t0, grid.probes[p]);
      const double log_w = log_norm(w, nk);
      if (log_w == -kInf) continue;
      auto a = [&](double tau) { return orbit_log_norm(xi, reading, x0, tau, t0, w); };
      const std::string label = x0.label();

      switch (kind) {
        case IntegralKind::U0: {
          double acc = 0.0;
          double acc_err = 0.0;
          double prev = t0;
          for (double t : times) {
            const auto q = quadrature(
                [&](double tau) { return std::exp(-params.alpha * (tau - t0) + a(tau) - log_w); }, prev, t,
                params.quad_tol);
            acc += q.value;
            acc_err += q.error;
            prev = t;
            consider(acc, acc_err, Witness{TimeTriple{t, t0, t0}, label, static_cast<int>(p)});
          }
          break;
        }
        case IntegralKind::U1: {
          const auto q = quadrature([&](double tau) { return std::exp(a(tau) - log_w); }, t0, t0 + params.horizon,
                                    params.quad_tol);
          consider(q.value + tail, q.error,
                   Witness{TimeTriple{t0 + params.horizon, t0, t0}, label, static_cast<int>(p)});
          break;
        }
        case IntegralKind::U2: {
          for (double t : times) {
            const double at = a(t);
            const auto q = quadrature([&](double tau) { return std::exp(a(tau) - at); }, t0, t, params.quad_tol);
            consider(q.value, q.error, Witness{TimeTriple{t, t0, t0}, label, static_cast<int>(p)});
          }
          break;
        }
        case IntegralKind::U0P: {
          for (std::size_t j = 0; j < times.size(); ++j) {
            const double t = times[j];
            const double at = a(t);
            for (std::size_t i = 0; i <= j; ++i) {
              const double s = times[i];
              const auto q = quadrature(
                  [&](double tau) { return std::exp(-params.alpha * (t - tau) + a(tau) - at); }, s, t,
                  params.quad_tol);
              consider(q.value, q.error, Witness{TimeTriple{t, s, t0}, label, static_cast<int>(p)});
            }
          }
          break;
        }
      }
    }
  }
  res.pass = worst_excess <= 0.0;
  return res;
}

namespace {

struct ContractionScan {
  double c_st = 0.0;
  double c_in = 0.0;
};

ContractionScan scan_contraction(const SkewSemiflow& xi, const ProjectionFamily& r1, const ProjectionFamily& r2,
                                 double gap, const GridSpec& grid, OrbitReading reading) {
  ContractionScan out;
  for (double t0 : distinct_t0(grid)) {
    const double s0 = t0 + gap;
    for (const auto& x : grid.points) {
      const auto g = log_multipliers(xi.cocycle, s0, t0, orbit_base(xi, reading, s0, t0, x));
      for (const auto& v : grid.probes) {
        const auto w1 = r1.apply(t0, v);
        const double st = log_gap(log_norm_scaled(g, w1, xi.norm), log_norm(w1, xi.norm));
        if (st != -kInf) out.c_st = std::max(out.c_st, std::exp(st));
        const auto w2 = r2.apply(t0, v);
        const double in = log_gap(log_norm(w2, xi.norm), log_norm_scaled(g, w2, xi.norm));
        if (in != -kInf) out.c_in = std::max(out.c_in, std::exp(in));
      }
    }
  }
  return out;
}

/// Smallest omega with minimal N <= n_cap for growth (forward = true) or
/// decay samples of Psi(., t0, x) over the grid points.
std::optional<GrowthFit> fit_growth(const SkewSemiflow& xi, std::initializer_list<const ProjectionFamily*> fams,
                                    bool forward, const GridSpec& grid, const std::vector<double>& omega_grid,
                                    double n_cap) {
  std::vector<ConstraintSample> samples;
  for (const auto& tr : grid.triples()) {
    const double delta = tr.t - tr.s;
    for (const auto& x : grid.points) {
      const auto gt = log_multipliers(xi.cocycle, tr.t, tr.t0, x);
      const auto gs = log_multipliers(xi.cocycle, tr.s, tr.t0, x);
      for (const auto* fam : fams) {
        for (const auto& v : grid.probes) {
          const auto w = fam->apply(tr.t0, v);
          const double at = log_norm_scaled(gt, w, xi.norm);
          const double as = log_norm_scaled(gs, w, xi.norm);
          samples.push_back({forward ? log_gap(at, as) : log_gap(as, at), -delta, {}});
        }
      }
    }
  }
  std::vector<double> omegas = omega_grid;
  std::sort(omegas.begin(), omegas.end());
  for (double omega : omegas) {
    if (!(omega > 0.0)) continue;
    const double n = minimal_constant(samples, omega);
    if (n <= n_cap) return GrowthFit{inflate_constant(n), omega};
  }
  return std::nullopt;
}

}  // namespace

HypothesisReport check_integral_hypotheses(const SkewSemiflow& xi, std::span<const ProjectionFamily> families,
                                            const HypothesisSearch& search, const GridSpec& grid) {
  if (families.size() != 4) throw FamilyCountError("four families (R1..R4) are required");
  if (grid.empty() || grid.probes.empty()) throw EmptyGridError("hypothesis check needs a grid");
  if (search.check_compatibility) {
    const auto rep = check_compatibility(Regime::Four, families, xi, grid, search.compat_tol, search.reading);
    if (!rep.pass) throw IncompatibleFamiliesError("R1..R4 are not compatible in the four-family regime");
  }
  const auto& r1 = families[0];
  const auto& r2 = families[1];
  const auto& r3 = families[2];
  const auto& r4 = families[3];

  HypothesisReport rep;
  bool any_st = false;
  bool any_in = false;
  std::optional<std::pair<double, ContractionScan>> best;
  for (double gap : search.s0_gaps) {
    if (!(gap > 0.0)) throw ParamError("s0 gaps must be > 0");
    const auto scan = scan_contraction(xi, r1, r2, gap, grid, search.reading);
    any_st = any_st || scan.c_st < 1.0;
    any_in = any_in || scan.c_in < 1.0;
    const double c = std::max(scan.c_st, scan.c_in);
    if (c < 1.0 && (!best || c < std::max(best->second.c_st, best->second.c_in))) best = std::pair{gap, scan};
  }
  if (!any_st) throw HypothesisFailError("(st): no s0 on the search grid gives c < 1");
  if (!any_in) throw HypothesisFailError("(in): no s0 on the search grid gives c < 1");
  if (!best) throw HypothesisFailError("(st)/(in): no common s0 gives c < 1 for both");
  const double c = std::max({best->second.c_st, best->second.c_in, std::numeric_limits<double>::min()});
  rep.st_found = ContractionFound{best->first, c};
  rep.in_found = ContractionFound{best->first, c};
  rep.c_st = best->second.c_st;
  rep.c_in = best->second.c_in;

  rep.eg = fit_growth(xi, {&r1, &r3}, true, grid, search.omega_grid, search.n_cap);
  if (!rep.eg) throw HypothesisFailError("(eg): no growth rate on the omega grid keeps N under the cap");
  rep.ed = fit_growth(xi, {&r2, &r4}, false, grid, search.omega_grid, search.n_cap);
  if (!rep.ed) throw HypothesisFailError("(ed): no growth rate on the omega grid keeps N under the cap");
  rep.pass = true;
  return rep;
}

namespace {

/// Largest beta with minimal K <= k_cap for the rescaled cocycle along the
/// orbit: forward compares t to s, backward s to t.
std::optional<DecayCertificate> fit_rescaled(const SkewSemiflow& xi, const ProjectionFamily& r, bool forward,
                                             const BasePoint& x0, const GridSpec& grid,
                                             const SufficiencyOptions& options) {
  std::vector<ConstraintSample> samples;
  for (const auto& tr : grid.triples()) {
    const double delta = tr.t - tr.s;
    for (const auto& v : grid.probes) {
      const auto w = r.apply(tr.t0, v);
      const double at = orbit_log_norm(xi, options.reading, x0, tr.t, tr.t0, w);
      const double as = orbit_log_norm(xi, options.reading, x0, tr.s, tr.t0, w);
      double gap = forward ? log_gap(at, as) : log_gap(as, at);
      if (std::isfinite(gap)) gap -= options.alpha * delta;
      samples.push_back({gap, delta, {}});
    }
  }
  std::vector<double> betas = options.beta_grid;
  std::sort(betas.rbegin(), betas.rend());
  for (double beta : betas) {
    if (!(beta > 0.0)) continue;
    const double k = minimal_constant(samples, beta);
    if (k <= options.k_cap) return DecayCertificate{k, beta};
  }
  return std::nullopt;
}

}  // namespace

SufficiencyResult sufficiency_certificate(const SkewSemiflow& xi, std::span<const ProjectionFamily> families,
                                          const HypothesisReport& hypotheses, const BasePoint& x0,
                                          const GridSpec& grid, const SufficiencyOptions& options) {
  if (families.size() != 4) throw FamilyCountError("four families (R1..R4) are required");
  if (!hypotheses.pass || !hypotheses.st_found || !hypotheses.eg || !hypotheses.ed) {
    throw HypothesisFailError("sufficiency needs a passing hypothesis report");
  }
  if (!(options.alpha > 0.0)) throw ParamError("sufficiency: alpha must be > 0");

  const double gap = hypotheses.st_found->s0_gap;
  const double log_c = std::log(hypotheses.st_found->c);

  SufficiencyResult out;
  out.nu1_raw = log_c / gap;
  out.nu2_raw = -log_c / gap;
  const double nu = -log_c / gap;

  const auto fwd = fit_rescaled(xi, families[2], true, x0, grid, options);
  if (!fwd) throw HypothesisFailError("(upet0): rescaled cocycle on R3 shows no exponential decay on the grid");
  const auto bwd = fit_rescaled(xi, families[3], false, x0, grid, options);
  if (!bwd) throw HypothesisFailError("(upet0'): rescaled cocycle on R4 shows no exponential decay on the grid");
  out.neutral_forward = *fwd;
  out.neutral_backward = *bwd;

  auto rate = [&](double beta) { return options.alpha > beta ? options.alpha - beta : 1.0; };

  RateCertificate& cert = out.certificate;
  cert.scope = Mode::Pointwise;
  cert.x0 = x0;
  cert.nu[0] = std::max(rate(fwd->beta), rate(bwd->beta));
  cert.N[0] = inflate_constant(std::max(fwd->K, bwd->K));
  cert.nu[1] = nu;
  cert.N[1] = hypotheses.eg->N * std::exp((hypotheses.eg->omega + nu) * gap);
  cert.nu[2] = nu;
  cert.N[2] = hypotheses.ed->N * std::exp(hypotheses.ed->omega * gap);
  return out;
}

}  // namespace skewflow
