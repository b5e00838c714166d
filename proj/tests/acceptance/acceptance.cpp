// Runs the nine acceptance criteria and prints one PASS/FAIL line each.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "skewflow/errors.hpp"
#include "skewflow/scenarios.hpp"

using namespace skewflow;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

RunConfig config(ScenarioName name, GridPreset preset = GridPreset::Default) {
  RunConfig cfg;
  cfg.scenario = name;
  cfg.preset = preset;
  return cfg;
}

double min_margin(const VerificationVerdict& v) {
  double m = INFINITY;
  for (const auto& [label, x] : v.margins) m = std::min(m, x);
  return m;
}

Outcome axioms() {
  Outcome o;
  for (auto name : {ScenarioName::Example1, ScenarioName::Example2, ScenarioName::Example3}) {
    const auto cfg = config(name);
    const auto sc = build_scenario(name, cfg.params);
    for (const auto& m : sc.members) {
      const auto g = make_grid(cfg, m);
      for (const auto& r : check_semiflow_axioms(m.xi.semiflow, g)) {
        o.require(r.max_residual <= 1e-9, to_string(name) + "/" + m.id + " " + to_string(r.law) + " " + fmt(r.max_residual));
      }
      for (const auto& r : check_cocycle_axioms(m.xi.cocycle, m.xi.semiflow, g, m.xi.norm)) {
        o.require(r.max_residual <= 1e-9, to_string(name) + "/" + m.id + " " + to_string(r.law) + " " + fmt(r.max_residual));
      }
    }
  }
  return o;
}

Outcome compatibility() {
  Outcome o;
  const auto cfg = config(ScenarioName::Example2);
  const auto sc = build_scenario(ScenarioName::Example2, cfg.params);
  const auto& m = sc.members.front();
  const auto g = make_grid(cfg, m);
  const auto global = sc.global_families.as_array();
  const auto pointwise = sc.pointwise_families.as_array();
  const std::vector<std::pair<Regime, std::vector<ProjectionFamily>>> cases{
      {Regime::ThreeGlobal, {global.begin(), global.end()}},
      {Regime::ThreePointwise, {pointwise.begin(), pointwise.end()}},
      {Regime::Two, sc.two},
      {Regime::Four, sc.four}};
  for (const auto& [regime, fams] : cases) {
    const auto rep = check_compatibility(regime, fams, m.xi, g, 1e-12);
    o.require(rep.pass, to_string(regime) + " failed under L2");
  }

  auto l1 = m.xi;
  l1.norm = NormKind::L1;
  auto probe = g;
  probe.probes = {{1.0, 1.0, 0.0}};
  const auto rep = check_compatibility(Regime::Two, sc.two, l1, probe, 1e-12);
  const double cq2 = rep.residuals.at("cq2");
  o.require(!rep.pass && cq2 == 2.0, "L1 cq2 residual " + fmt(cq2) + ", expected exactly 2");
  return o;
}

Outcome example2_reproduction() {
  Outcome o;
  // Short steps are needed for the estimated rates to reach their limits.
  auto cfg = config(ScenarioName::Example2, GridPreset::Dense);
  const auto sc = build_scenario(ScenarioName::Example2, cfg.params);
  const auto& m = sc.members.front();
  const auto g = make_grid(cfg, m);
  const auto& cert = *sc.claimed;
  for (double n : cert.N) o.require(n <= 1.0 + 1e-6, "claimed N above 1+1e-6");
  o.require(cert.nu[0] == 2.0 && cert.nu[1] == 1.0 && cert.nu[2] == 1.0, "claimed rates are not (2, 1, 1)");
  const auto v = verify_trichotomy(Mode::Global, m.xi, sc.global_families, cert, g);
  o.require(v.pass, "global verify min margin " + fmt(min_margin(v)));
  auto l1 = m.xi;
  l1.norm = NormKind::L1;
  const auto v1 = verify_trichotomy(Mode::Global, l1, sc.global_families, cert, g);
  o.require(v1.pass, "global verify under L1 min margin " + fmt(min_margin(v1)));

  const auto est =
      estimate_rate_constants(m.xi, sc.global_families, Mode::Global, g, scenario_nu_grid(cfg), cfg.tol.n_cap);
  o.require(est.certificate.has_value(), "no estimated certificate: " + est.failure);
  if (est.certificate) {
    for (int k : {1, 2}) {
      const double nu = est.certificate->nu[k];
      o.require(std::abs(nu - 1.0) <= 0.1 + 1e-12, "estimated nu" + std::to_string(k) + " = " + fmt(nu));
    }
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("estimated nu = (") + fmt(est.certificate->nu[0]) +
                ", " + fmt(est.certificate->nu[1]) + ", " + fmt(est.certificate->nu[2]) + ")";
  }
  return o;
}

Outcome separation() {
  Outcome o;
  auto cfg = config(ScenarioName::Example3);
  cfg.params.n_list = {1, 2, 5, 10};
  const auto sc = build_scenario(ScenarioName::Example3, cfg.params);
  const auto nu_grid = scenario_nu_grid(cfg);
  std::vector<FamilyMember> members;
  std::vector<double> rates;
  for (std::size_t i = 0; i < sc.members.size(); ++i) {
    const auto& m = sc.members[i];
    const int n = cfg.params.n_list[i];
    const auto g = make_grid(cfg, m);
    members.push_back(FamilyMember{m.id, m.xi, sc.pointwise_families, m.x0, g});
    EstimateOptions eo;
    eo.x0 = m.x0;
    const auto est =
        estimate_rate_constants(m.xi, sc.pointwise_families, Mode::Pointwise, g, nu_grid, cfg.tol.n_cap, eo);
    if (!est.certificate) {
      o.require(false, m.id + ": no pointwise certificate");
      continue;
    }
    const double nu1 = est.certificate->nu[1];
    rates.push_back(nu1);
    o.require(nu1 >= 1.0 / (2 * n + 1) - 0.02 && nu1 <= 1.0 / (2 * n) + 0.02, m.id + ": nu1 = " + fmt(nu1));
  }
  for (std::size_t i = 1; i < rates.size(); ++i) o.require(rates[i] < rates[i - 1], "nu1 not strictly decreasing");
  std::string listed = "pointwise nu1 =";
  for (double r : rates) listed += " " + fmt(r);

  const auto uniform = estimate_uniform_certificate(members, nu_grid, cfg.tol.uniform_n_cap);
  if (uniform.certificate) {
    const auto& c = *uniform.certificate;
    o.require(false, "a single certificate verifies on all four points: N = (" + fmt(c.N[0]) + ", " + fmt(c.N[1]) +
                         ", " + fmt(c.N[2]) + "), nu = (" + fmt(c.nu[0]) + ", " + fmt(c.nu[1]) + ", " +
                         fmt(c.nu[2]) + ")");
  }
  o.detail = listed + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome phi_round_trip() {
  Outcome o;
  const auto cfg = config(ScenarioName::Example2);
  const auto sc = build_scenario(ScenarioName::Example2, cfg.params);
  const auto& m = sc.members.front();
  const auto g = make_grid(cfg, m);
  EstimateOptions eo;
  eo.x0 = m.x0;
  const auto est = estimate_rate_constants(m.xi, sc.pointwise_families, Mode::Pointwise, g, scenario_nu_grid(cfg),
                                           cfg.tol.n_cap, eo);
  o.require(est.certificate.has_value(), "no pointwise certificate: " + est.failure);
  if (!est.certificate) return o;
  const auto& cert = *est.certificate;
  const auto v0 = verify_trichotomy(Mode::Pointwise, m.xi, sc.pointwise_families, cert, g);
  o.require(v0.pass, "pointwise certificate does not verify");

  const auto [phi1, phi2] = phi_from_constants(cert);
  const auto nec = check_phi_characterization(m.xi, m.x0, sc.two[0], sc.two[1], phi1, phi2, g);
  o.require(nec.pass && min_margin(nec) >= -1e-9, "phi check min margin " + fmt(min_margin(nec)));

  const auto back = constants_from_phi(phi1, phi2, 10.0, 1e-12, m.x0);
  const auto suf = verify_trichotomy(Mode::Pointwise, m.xi, sc.pointwise_families, back, g);
  o.require(suf.pass && min_margin(suf) >= -1e-9, "recovered certificate min margin " + fmt(min_margin(suf)));
  return o;
}

Outcome necessity() {
  Outcome o;
  const auto cfg = config(ScenarioName::Example2);
  const auto sc = build_scenario(ScenarioName::Example2, cfg.params);
  const auto& m = sc.members.front();
  const auto g = make_grid(cfg, m);
  const auto& cert = *sc.claimed;
  const double n = std::max({cert.N[0], cert.N[1], cert.N[2]});

  IntegralParams base;
  base.quad_tol = 1e-8;
  base.tail = fit_decay_certificate(m.xi, m.x0, sc.four[0], g, scenario_nu_grid(cfg), cfg.tol.n_cap);
  o.require(base.tail.has_value(), "no decay certificate for the U1 tail");
  if (!base.tail) return o;
  auto u0 = base;
  u0.alpha = 2.0 * cert.nu[0];
  u0.bound = n / cert.nu[0];
  auto u1 = base;
  u1.bound = n / cert.nu[1];
  auto u2 = base;
  u2.bound = n / cert.nu[2];
  const std::vector<IntegralCheckResult> results{integral_bound(IntegralKind::U0, m.xi, m.x0, sc.four[2], u0, g),
                                                 integral_bound(IntegralKind::U0P, m.xi, m.x0, sc.four[3], u0, g),
                                                 integral_bound(IntegralKind::U1, m.xi, m.x0, sc.four[0], u1, g),
                                                 integral_bound(IntegralKind::U2, m.xi, m.x0, sc.four[1], u2, g)};
  for (const auto& r : results) {
    o.require(r.pass, to_string(r.kind) + ": " + fmt(r.integral) + " > " + fmt(r.bound));
  }

  // Constant-limit point: direction 1 decays like e^{-2 tau}.
  const auto lim = BasePoint::limit_of(m.x0.generator);
  auto limit_grid = g;
  limit_grid.points = {lim};
  auto oracle = u1;
  oracle.tail = DecayCertificate{1.0 + 1e-9, 2.0};
  const auto r = integral_bound(IntegralKind::U1, m.xi, lim, sc.four[0], oracle, limit_grid);
  o.require(std::abs(r.integral - 0.5) <= 1e-6, "limit-point U1 " + fmt(r.integral) + " vs 0.5");
  return o;
}

Outcome sufficiency() {
  Outcome o;
  const auto cfg = config(ScenarioName::Example2);
  const auto sc = build_scenario(ScenarioName::Example2, cfg.params);
  const auto& m = sc.members.front();
  const auto g = make_grid(cfg, m);
  const auto nu_grid = scenario_nu_grid(cfg);

  HypothesisSearch hs;
  hs.s0_gaps = {2.0};
  hs.omega_grid = nu_grid;
  hs.n_cap = cfg.tol.n_cap;
  HypothesisReport hyp;
  try {
    hyp = check_integral_hypotheses(m.xi, sc.four, hs, g);
  } catch (const HypothesisFailError& e) {
    o.require(false, e.what());
    return o;
  }
  const double target = std::exp(-2.0);
  o.require(hyp.st_found && std::abs(hyp.st_found->c - target) <= 1e-6 && hyp.st_found->s0_gap == 2.0,
            "(st) c = " + fmt(hyp.st_found ? hyp.st_found->c : NAN));
  o.require(hyp.in_found && std::abs(hyp.in_found->c - target) <= 1e-6 && hyp.in_found->s0_gap == 2.0,
            "(in) c = " + fmt(hyp.in_found ? hyp.in_found->c : NAN));
  o.require(hyp.eg && hyp.ed, "(eg)/(ed) not fitted");

  SufficiencyOptions so;
  so.alpha = 2.0 * sc.claimed->nu[0];
  so.beta_grid = nu_grid;
  so.k_cap = cfg.tol.n_cap;
  const auto suf = sufficiency_certificate(m.xi, sc.four, hyp, m.x0, g, so);
  const TrichotomyFamilies fams{ProjectionFamily::product(sc.four[2], sc.four[3]), sc.four[0], sc.four[1]};
  const auto v = verify_trichotomy(Mode::Pointwise, m.xi, fams, suf.certificate, g);
  o.require(v.pass, "sufficiency certificate min margin " + fmt(min_margin(v)));

  EstimateOptions eo;
  eo.x0 = m.x0;
  const auto est = estimate_rate_constants(m.xi, fams, Mode::Pointwise, g, nu_grid, cfg.tol.n_cap, eo);
  o.require(est.certificate.has_value(), "pointwise estimate failed: " + est.failure);
  if (est.certificate) {
    o.require(verify_trichotomy(Mode::Pointwise, m.xi, fams, *est.certificate, g).pass,
              "estimated pointwise certificate does not verify");
  }
  return o;
}

Outcome oracle_cross_check() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  std::vector<TrajectorySpec> gens{TrajectorySpec::exp_decay(1.0, 1.0)};
  for (int n : {1, 2, 5, 10}) gens.push_back(TrajectorySpec::interval_decay(n));
  double worst = 0.0;
  for (const auto& g : gens) {
    for (int i = 0; i < 200; ++i) {
      double s = u(rng), t = u(rng);
      if (s > t) std::swap(s, t);
      const auto x = BasePoint::at(g, 0.0);
      const auto q = quadrature([&](double tau) { return trajectory_eval(x, tau); }, s, t, 1e-8);
      worst = std::max(worst, std::abs(q.value - closed_form_log_growth(g, s, 0.0, t - s)));
    }
  }
  o.require(worst <= 1e-8, "worst gap " + fmt(worst));
  if (o.pass) o.detail = "worst gap " + fmt(worst);
  return o;
}

std::string strip_timestamp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  auto doc = nlohmann::json::parse(ss.str());
  doc.erase(kTimestampField);
  return doc.dump(2);
}

Outcome determinism() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / ("skewflow_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::vector<std::string> bodies;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / ("run" + std::to_string(run) + ".json");
    const std::string cmd = std::string("\"") + SKEWFLOW_CLI + "\" report --scenario example2 --seed 7 --out \"" +
                            out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.require(code == 0, "run " + std::to_string(run) + " exited with " + std::to_string(code));
    if (std::filesystem::exists(out)) bodies.push_back(strip_timestamp(out));
  }
  o.require(bodies.size() == 2 && bodies[0] == bodies[1], "reports differ outside the timestamp");
  std::filesystem::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 axiom residuals on all scenarios", axioms},
      {"2 compatibility regimes and L1 witness", compatibility},
      {"3 example 2 certificate and estimate", example2_reproduction},
      {"4 pointwise vs global separation", separation},
      {"5 phi characterization round trip", phi_round_trip},
      {"6 integral bounds with rate-derived constants", necessity},
      {"7 hypotheses and sufficiency certificate", sufficiency},
      {"8 closed-form growth vs quadrature", oracle_cross_check},
      {"9 deterministic CLI report", determinism}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %s (%.2fs)%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
