#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <sstream>

#include "skewflow/errors.hpp"
#include "skewflow/scenarios.hpp"

namespace skewflow {

using nlohmann::json;

json json_number(double value) {
  if (std::isnan(value)) return nullptr;
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double number_from_json(const json& value) {
  if (value.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number, got string '" + s + "'");
  }
  return value.get<double>();
}

namespace {

json times_json(const TimeTriple& t) { return {{"t", t.t}, {"s", t.s}, {"t0", t.t0}}; }

json to_json(const AxiomReport& r) {
  return {{"law", to_string(r.law)},
          {"max_residual", json_number(r.max_residual)},
          {"worst_times", times_json(r.worst_times)},
          {"worst_point", r.worst_point},
          {"worst_probe", r.worst_probe},
          {"tol", r.tol},
          {"pass", r.pass}};
}

json to_json(const CompatibilityReport& r) {
  json res = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = json_number(v);
  return {{"regime", to_string(r.regime)},
          {"norm", r.norm == NormKind::L1 ? "L1" : "L2"},
          {"residuals", res},
          {"tol", r.tol},
          {"pass", r.pass}};
}

json to_json(const VerificationVerdict& v) {
  json margins = json::object();
  json witnesses = json::object();
  for (const auto& [k, m] : v.margins) margins[k] = json_number(m);
  for (const auto& [k, w] : v.witnesses) {
    witnesses[k] = {{"times", times_json(w.times)}, {"point", w.point}, {"probe", w.probe}};
  }
  return {{"margins", margins}, {"witnesses", witnesses}, {"tol", v.tol}, {"pass", v.pass}};
}

json to_json(const RateCertificate& c) {
  json j{{"N", {c.N[0], c.N[1], c.N[2]}}, {"nu", {c.nu[0], c.nu[1], c.nu[2]}}, {"scope", to_string(c.scope)}};
  if (c.x0) j["x0"] = c.x0->label();
  return j;
}

json to_json(const EstimateResult& r) {
  json nu = json::array();
  json nmin = json::array();
  for (int k = 0; k < 3; ++k) {
    nu.push_back(r.nu[k] ? json(*r.nu[k]) : json(nullptr));
    nmin.push_back(r.minimal_N[k] ? json_number(*r.minimal_N[k]) : json(nullptr));
  }
  json j{{"nu", nu}, {"minimal_N", nmin}, {"certificate", r.certificate ? to_json(*r.certificate) : json(nullptr)}};
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

json to_json(const IntegralCheckResult& r) {
  return {{"kind", to_string(r.kind)},
          {"integral", json_number(r.integral)},
          {"bound", r.bound},
          {"alpha", r.alpha},
          {"error", json_number(r.error)},
          {"tail", json_number(r.tail)},
          {"worst", {{"times", times_json(r.worst.times)}, {"point", r.worst.point}, {"probe", r.worst.probe}}},
          {"pass", r.pass}};
}

json to_json(const HypothesisReport& h) {
  auto contraction = [](const std::optional<ContractionFound>& c) {
    return c ? json{{"s0_gap", c->s0_gap}, {"c", c->c}} : json(nullptr);
  };
  auto growth = [](const std::optional<GrowthFit>& g) {
    return g ? json{{"N", g->N}, {"omega", g->omega}} : json(nullptr);
  };
  return {{"st", contraction(h.st_found)}, {"in", contraction(h.in_found)}, {"c_st", h.c_st}, {"c_in", h.c_in},
          {"eg", growth(h.eg)},           {"ed", growth(h.ed)},           {"pass", h.pass}};
}

json to_json(const FalsificationReport& f) {
  json per = json::array();
  for (const auto& p : f.per_point) {
    per.push_back({{"id", p.id},
                   {"nu1", p.nu1 ? json(*p.nu1) : json(nullptr)},
                   {"certificate", p.certificate ? to_json(*p.certificate) : json(nullptr)}});
  }
  return {{"per_point", per},
          {"thresholds", f.thresholds},
          {"rates_nonincreasing", f.rates_nonincreasing},
          {"every_point_certified", f.every_point_certified},
          {"uniform_certificate_found", f.uniform_certificate_found},
          {"uniform_certificate", f.uniform_certificate ? to_json(*f.uniform_certificate) : json(nullptr)},
          {"conclusion", f.conclusion},
          {"verdict", f.conclusion ? "falsified" : "not falsified"}};
}

std::string error_kind(const std::exception& e) {
#define SKEWFLOW_KIND(T) \
  if (dynamic_cast<const T*>(&e)) return #T
  SKEWFLOW_KIND(TimeOrderError);
  SKEWFLOW_KIND(DomainError);
  SKEWFLOW_KIND(DimensionError);
  SKEWFLOW_KIND(EmptyGridError);
  SKEWFLOW_KIND(SpaceMismatchError);
  SKEWFLOW_KIND(IndexKindError);
  SKEWFLOW_KIND(FamilyCountError);
  SKEWFLOW_KIND(IncompatibleFamiliesError);
  SKEWFLOW_KIND(ScopeMismatchError);
  SKEWFLOW_KIND(NonConvergenceError);
  SKEWFLOW_KIND(NoDeltaError);
  SKEWFLOW_KIND(TailUnboundedError);
  SKEWFLOW_KIND(HypothesisFailError);
  SKEWFLOW_KIND(ParamError);
  SKEWFLOW_KIND(ConfigError);
#undef SKEWFLOW_KIND
  return "InternalError";
}

bool is_numeric_error(const std::exception& e) {
  return dynamic_cast<const NonConvergenceError*>(&e) || dynamic_cast<const NoDeltaError*>(&e) ||
         dynamic_cast<const TailUnboundedError*>(&e) || !dynamic_cast<const Error*>(&e);
}

struct Section {
  json body;
  bool pass = true;
  bool numeric_error = false;
  std::vector<MarginRow> rows;
};

struct Context {
  const RunConfig& cfg;
  const Scenario& sc;
  std::vector<GridSpec> grids;
  std::vector<double> nu_grid;
};

using MemberFn = std::function<json(const Context&, std::size_t, Section&)>;

/// Runs fn for every member; the section passes iff every member's "pass" does.
Section per_member(const Context& ctx, const MemberFn& fn) {
  Section s;
  s.body = json::object();
  for (std::size_t i = 0; i < ctx.sc.members.size(); ++i) {
    json m = fn(ctx, i, s);
    s.pass = s.pass && m.value("pass", false);
    s.body[ctx.sc.members[i].id] = std::move(m);
  }
  s.body["pass"] = s.pass;
  return s;
}

json axioms_member(const Context& ctx, std::size_t i, Section&) {
  const auto& m = ctx.sc.members[i];
  const auto& g = ctx.grids[i];
  const auto semi = check_semiflow_axioms(m.xi.semiflow, g);
  const auto coc = check_cocycle_axioms(m.xi.cocycle, m.xi.semiflow, g, m.xi.norm);
  json j;
  bool pass = true;
  for (const auto& r : semi) {
    j[to_string(r.law)] = to_json(r);
    pass = pass && r.pass;
  }
  for (const auto& r : coc) {
    j[to_string(r.law)] = to_json(r);
    pass = pass && r.pass;
  }
  j["pass"] = pass;
  return j;
}

json compat_member(const Context& ctx, std::size_t i, Section&) {
  const auto& m = ctx.sc.members[i];
  const auto& g = ctx.grids[i];
  const double tol = ctx.cfg.tol.compat;
  const auto r = ctx.cfg.reading;
  std::vector<CompatibilityReport> reps{
      check_compatibility(Regime::ThreeGlobal, ctx.sc.global_families.as_array(), m.xi, g, tol, r),
      check_compatibility(Regime::ThreePointwise, ctx.sc.pointwise_families.as_array(), m.xi, g, tol, r),
      check_compatibility(Regime::Two, ctx.sc.two, m.xi, g, tol, r),
      check_compatibility(Regime::Four, ctx.sc.four, m.xi, g, tol, r)};
  json j;
  bool pass = true;
  for (const auto& rep : reps) {
    j[to_string(rep.regime)] = to_json(rep);
    pass = pass && rep.pass;
  }
  j["pass"] = pass;
  return j;
}

TrichotomyOptions verify_options(const Context& ctx, Section& s) {
  TrichotomyOptions o;
  o.reading = ctx.cfg.reading;
  o.tol = ctx.cfg.tol.margin;
  o.compat_tol = ctx.cfg.tol.compat;
  o.rows = &s.rows;
  return o;
}

EstimateResult estimate_pointwise(const Context& ctx, std::size_t i) {
  const auto& m = ctx.sc.members[i];
  EstimateOptions eo;
  eo.reading = ctx.cfg.reading;
  eo.x0 = m.x0;
  eo.compat_tol = ctx.cfg.tol.compat;
  return estimate_rate_constants(m.xi, ctx.sc.pointwise_families, Mode::Pointwise, ctx.grids[i], ctx.nu_grid,
                                 ctx.cfg.tol.n_cap, eo);
}

EstimateResult estimate_global(const Context& ctx, std::size_t i) {
  const auto& m = ctx.sc.members[i];
  EstimateOptions eo;
  eo.reading = ctx.cfg.reading;
  eo.compat_tol = ctx.cfg.tol.compat;
  return estimate_rate_constants(m.xi, ctx.sc.global_families, Mode::Global, ctx.grids[i], ctx.nu_grid,
                                 ctx.cfg.tol.n_cap, eo);
}

/// The claimed global certificate, else the global estimate.
std::optional<RateCertificate> reference_certificate(const Context& ctx, std::size_t i) {
  if (ctx.sc.claimed) return ctx.sc.claimed;
  return estimate_global(ctx, i).certificate;
}

json verify_member(const Context& ctx, std::size_t i, Section& s) {
  const auto& m = ctx.sc.members[i];
  const auto& g = ctx.grids[i];
  json j;
  bool pass = true;
  std::optional<RateCertificate> cert = ctx.sc.claimed;
  if (!cert) {
    cert = estimate_pointwise(ctx, i).certificate;
    j["source"] = "pointwise estimate";
    if (!cert) {
      j["pass"] = false;
      j["failure"] = "no pointwise certificate on the rate grid";
      return j;
    }
  } else {
    j["source"] = "claimed";
    const auto v = verify_trichotomy(Mode::Global, m.xi, ctx.sc.global_families, *cert, g, verify_options(ctx, s));
    j["global"] = {{"certificate", to_json(*cert)}, {"verdict", to_json(v)}};
    pass = pass && v.pass;
  }
  RateCertificate pw = *cert;
  pw.scope = Mode::Pointwise;
  pw.x0 = m.x0;
  const auto v = verify_trichotomy(Mode::Pointwise, m.xi, ctx.sc.pointwise_families, pw, g, verify_options(ctx, s));
  j["pointwise"] = {{"certificate", to_json(pw)}, {"verdict", to_json(v)}};
  j["pass"] = pass && v.pass;
  return j;
}

json estimate_member(const Context& ctx, std::size_t i, Section& s) {
  const auto& m = ctx.sc.members[i];
  const auto& g = ctx.grids[i];
  json j;
  bool pass = true;
  const auto glob = estimate_global(ctx, i);
  j["global"] = to_json(glob);
  if (glob.certificate) {
    const auto v =
        verify_trichotomy(Mode::Global, m.xi, ctx.sc.global_families, *glob.certificate, g, verify_options(ctx, s));
    j["global"]["round_trip"] = to_json(v);
    pass = pass && v.pass;
  } else {
    pass = false;
  }
  const auto pw = estimate_pointwise(ctx, i);
  j["pointwise"] = to_json(pw);
  if (pw.certificate) {
    const auto v =
        verify_trichotomy(Mode::Pointwise, m.xi, ctx.sc.pointwise_families, *pw.certificate, g, verify_options(ctx, s));
    j["pointwise"]["round_trip"] = to_json(v);
    pass = pass && v.pass;
  } else {
    pass = false;
  }
  j["pass"] = pass;
  return j;
}

json phi_member(const Context& ctx, std::size_t i, Section& s) {
  const auto& m = ctx.sc.members[i];
  const auto& g = ctx.grids[i];
  json j;
  const auto est = estimate_pointwise(ctx, i);
  if (!est.certificate) {
    j["pass"] = false;
    j["failure"] = "no pointwise certificate to build phi from";
    return j;
  }
  const auto [phi1, phi2] = phi_from_constants(*est.certificate);
  PhiCheckOptions po;
  po.reading = ctx.cfg.reading;
  po.tol = ctx.cfg.tol.margin;
  po.compat_tol = ctx.cfg.tol.compat;
  const auto necessity = check_phi_characterization(m.xi, m.x0, ctx.sc.two[0], ctx.sc.two[1], phi1, phi2, g, po);
  const auto back = constants_from_phi(phi1, phi2, 10.0, 1e-12, m.x0);
  const auto sufficiency =
      verify_trichotomy(Mode::Pointwise, m.xi, ctx.sc.pointwise_families, back, g, verify_options(ctx, s));
  j["certificate"] = to_json(*est.certificate);
  j["phi1"] = phi1.describe();
  j["phi2"] = phi2.describe();
  j["necessity"] = to_json(necessity);
  j["recovered_certificate"] = to_json(back);
  j["sufficiency"] = to_json(sufficiency);
  j["pass"] = necessity.pass && sufficiency.pass;
  return j;
}

json integrals_member(const Context& ctx, std::size_t i, Section&) {
  const auto& m = ctx.sc.members[i];
  const auto& g = ctx.grids[i];
  json j;
  const auto cert = reference_certificate(ctx, i);
  if (!cert) {
    j["pass"] = false;
    j["failure"] = "no certificate to derive the integral constants from";
    return j;
  }
  const double n = std::max({cert->N[0], cert->N[1], cert->N[2]});
  IntegralParams base;
  base.quad_tol = ctx.cfg.tol.quadrature;
  base.reading = ctx.cfg.reading;
  base.tail = fit_decay_certificate(m.xi, m.x0, ctx.sc.four[0], g, ctx.nu_grid, ctx.cfg.tol.n_cap, ctx.cfg.reading);

  IntegralParams u0 = base;
  u0.alpha = 2.0 * cert->nu[0];
  u0.bound = n / cert->nu[0];
  IntegralParams u1 = base;
  u1.bound = n / cert->nu[1];
  IntegralParams u2 = base;
  u2.bound = n / cert->nu[2];

  const auto r_u0 = integral_bound(IntegralKind::U0, m.xi, m.x0, ctx.sc.four[2], u0, g);
  const auto r_u0p = integral_bound(IntegralKind::U0P, m.xi, m.x0, ctx.sc.four[3], u0, g);
  const auto r_u1 = integral_bound(IntegralKind::U1, m.xi, m.x0, ctx.sc.four[0], u1, g);
  const auto r_u2 = integral_bound(IntegralKind::U2, m.xi, m.x0, ctx.sc.four[1], u2, g);
  j["certificate"] = to_json(*cert);
  if (base.tail) j["tail_certificate"] = {{"K", base.tail->K}, {"beta", base.tail->beta}};
  j["U0"] = to_json(r_u0);
  j["U0P"] = to_json(r_u0p);
  j["U1"] = to_json(r_u1);
  j["U2"] = to_json(r_u2);
  j["pass"] = r_u0.pass && r_u0p.pass && r_u1.pass && r_u2.pass;
  return j;
}

json hypotheses_member(const Context& ctx, std::size_t i, Section& s) {
  const auto& m = ctx.sc.members[i];
  const auto& g = ctx.grids[i];
  json j;
  HypothesisSearch hs;
  hs.omega_grid = ctx.nu_grid;
  hs.n_cap = ctx.cfg.tol.n_cap;
  hs.reading = ctx.cfg.reading;
  hs.compat_tol = ctx.cfg.tol.compat;
  const auto hyp = check_integral_hypotheses(m.xi, ctx.sc.four, hs, g);
  j["hypotheses"] = to_json(hyp);

  const auto cert = reference_certificate(ctx, i);
  if (!cert) {
    j["pass"] = false;
    j["failure"] = "no certificate to take alpha from";
    return j;
  }
  SufficiencyOptions so;
  so.alpha = 2.0 * cert->nu[0];
  so.beta_grid = ctx.nu_grid;
  so.k_cap = ctx.cfg.tol.n_cap;
  so.reading = ctx.cfg.reading;
  const auto suf = sufficiency_certificate(m.xi, ctx.sc.four, hyp, m.x0, g, so);
  const TrichotomyFamilies fams{ProjectionFamily::product(ctx.sc.four[2], ctx.sc.four[3]), ctx.sc.four[0],
                                ctx.sc.four[1]};
  const auto v = verify_trichotomy(Mode::Pointwise, m.xi, fams, suf.certificate, g, verify_options(ctx, s));
  j["sufficiency"] = {{"certificate", to_json(suf.certificate)},
                      {"nu1_raw", suf.nu1_raw},
                      {"nu2_raw", suf.nu2_raw},
                      {"neutral_forward", {{"K", suf.neutral_forward.K}, {"beta", suf.neutral_forward.beta}}},
                      {"neutral_backward", {{"K", suf.neutral_backward.K}, {"beta", suf.neutral_backward.beta}}},
                      {"verdict", to_json(v)}};
  j["pass"] = hyp.pass && v.pass;
  return j;
}

Section falsify_section(const Context& ctx) {
  std::vector<FamilyMember> members;
  std::vector<double> thresholds;
  for (std::size_t i = 0; i < ctx.sc.members.size(); ++i) {
    const auto& m = ctx.sc.members[i];
    members.push_back(FamilyMember{m.id, m.xi, ctx.sc.pointwise_families, m.x0, ctx.grids[i]});
  }
  // Thresholds 1/(2n): the upper ends of the x_n intervals.
  if (ctx.sc.name == ScenarioName::Example3) {
    for (int n : ctx.sc.params.n_list) thresholds.push_back(1.0 / (2.0 * n));
  } else {
    thresholds = {1.0, 0.5, 0.25, 0.1};
  }
  std::sort(thresholds.rbegin(), thresholds.rend());
  FalsifyOptions fo;
  fo.nu_grid = ctx.nu_grid;
  fo.point_n_cap = ctx.cfg.tol.n_cap;
  fo.uniform_n_cap = ctx.cfg.tol.uniform_n_cap;
  fo.reading = ctx.cfg.reading;
  const auto rep = falsify_global(members, thresholds, fo);
  Section s;
  s.body = to_json(rep);
  s.pass = rep.conclusion;
  s.body["pass"] = s.pass;
  return s;
}

Section run_analysis(const std::string& name, const Context& ctx) {
  try {
    if (name == "axioms") return per_member(ctx, axioms_member);
    if (name == "compat") return per_member(ctx, compat_member);
    if (name == "verify") return per_member(ctx, verify_member);
    if (name == "estimate") return per_member(ctx, estimate_member);
    if (name == "phi") return per_member(ctx, phi_member);
    if (name == "integrals") return per_member(ctx, integrals_member);
    if (name == "hypotheses") return per_member(ctx, hypotheses_member);
    if (name == "falsify") return falsify_section(ctx);
    throw ConfigError("unknown analysis '" + name + "'");
  } catch (const std::exception& e) {
    Section s;
    s.pass = false;
    s.numeric_error = is_numeric_error(e);
    s.body = {{"pass", false}, {"error", {{"type", error_kind(e)}, {"message", e.what()}}}};
    return s;
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json grid_json(const GridSpec& g) {
  json pts = json::array();
  for (const auto& p : g.points) pts.push_back(p.label());
  return {{"t0", g.t0_values},
          {"first_steps", g.first_steps},
          {"second_steps", g.second_steps},
          {"points", pts},
          {"probe_count", g.probes.size()}};
}

}  // namespace

ReportDocument run_report(const RunConfig& config) {
  const Scenario sc = build_scenario(config.scenario, config.params);
  Context ctx{config, sc, {}, scenario_nu_grid(config)};
  for (const auto& m : sc.members) ctx.grids.push_back(make_grid(config, m));

  ReportDocument doc;
  json& body = doc.body;
  body["schema_version"] = kSchemaVersion;
  body["tool_version"] = kToolVersion;
  body[kTimestampField] = utc_timestamp();
  body["config"] = config_to_json(config);

  json members = json::array();
  for (std::size_t i = 0; i < sc.members.size(); ++i) {
    const auto& m = sc.members[i];
    members.push_back({{"id", m.id},
                       {"generator", m.x0.generator.describe()},
                       {"x0", m.x0.label()},
                       {"dimension", m.xi.dimension()},
                       {"grid", grid_json(ctx.grids[i])}});
  }
  body["scenario"] = {{"name", to_string(sc.name)},
                      {"members", members},
                      {"families",
                       {{"P0", sc.global_families.p0.describe()},
                        {"P1", sc.global_families.p1.describe()},
                        {"P2", sc.global_families.p2.describe()},
                        {"R3", sc.four[2].describe()},
                        {"R4", sc.four[3].describe()}}},
                      {"claimed_certificate", sc.claimed ? to_json(*sc.claimed) : json(nullptr)}};
  body["nu_grid"] = {{"first", ctx.nu_grid.front()}, {"last", ctx.nu_grid.back()}, {"count", ctx.nu_grid.size()}};

  const auto names = config.analyses ? *config.analyses : default_analyses(config.scenario);
  std::vector<std::future<Section>> futures;
  for (const auto& name : names) {
    futures.push_back(std::async(std::launch::async, [&ctx, name] { return run_analysis(name, ctx); }));
  }
  json analyses = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    Section s = futures[i].get();
    doc.success = doc.success && s.pass;
    doc.numeric_error = doc.numeric_error || s.numeric_error;
    doc.rows.insert(doc.rows.end(), s.rows.begin(), s.rows.end());
    analyses[names[i]] = std::move(s.body);
  }
  body["analyses"] = analyses;
  body["pass"] = doc.success;
  return doc;
}

std::string serialize_report(const ReportDocument& report) { return report.body.dump(2) + "\n"; }

ReportDocument parse_report(const std::string& text) {
  ReportDocument doc;
  try {
    doc.body = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }
  doc.success = doc.body.value("pass", false);
  return doc;
}

std::string margins_csv(const std::vector<MarginRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "t,s,t0,point,probe,label,log_margin\n";
  for (const auto& r : rows) {
    os << r.times.t << ',' << r.times.s << ',' << r.times.t0 << ',' << r.point << ',' << r.probe << ',' << r.label
       << ',' << r.log_margin << '\n';
  }
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace skewflow
