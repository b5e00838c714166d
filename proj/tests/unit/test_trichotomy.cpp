#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "skewflow/errors.hpp"
#include "skewflow/scenarios.hpp"
#include "skewflow/trichotomy.hpp"

using namespace skewflow;

namespace {

RunConfig config_for(ScenarioName name, GridPreset preset) {
  RunConfig cfg;
  cfg.scenario = name;
  cfg.preset = preset;
  return cfg;
}

struct Fixture {
  RunConfig cfg;
  Scenario sc;
  GridSpec grid;

  explicit Fixture(ScenarioName name, GridPreset preset = GridPreset::Small)
      : cfg(config_for(name, preset)), sc(build_scenario(name, cfg.params)), grid(make_grid(cfg, sc.members.front())) {}
  const ScenarioMember& m() const { return sc.members.front(); }
};

RateCertificate example2_claim(Mode scope = Mode::Global) {
  RateCertificate c;
  c.N = {1.0 + 1e-9, 1.0 + 1e-9, 1.0 + 1e-9};
  c.nu = {2.0, 1.0, 1.0};  // f(0), mu - f(0), l
  c.scope = scope;
  return c;
}

}  // namespace

TEST_CASE("inflation keeps constants above one") {
  CHECK(inflate_constant(0.5) > 1.0);
  CHECK(inflate_constant(1.0) > 1.0);
  CHECK(inflate_constant(2.0) == doctest::Approx(2.0 * (1.0 + 1e-9)));
}

TEST_CASE("minimal constant against a brute-force maximum") {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<ConstraintSample> s{{0.1, 2.0}, {-0.3, 5.0}, {-inf, 1.0}, {0.0, -1.0}};
  for (double nu : {0.0, 0.2, 1.0}) {
    double worst = -inf;
    for (const auto& x : s) worst = std::max(worst, x.r + x.coef * nu);
    CHECK(minimal_constant(s, nu) == doctest::Approx(std::exp(worst)));
  }
  s.push_back({inf, 1.0});
  CHECK(std::isinf(minimal_constant(s, 0.5)));
}

TEST_CASE("example 2 global certificate") {
  Fixture f(ScenarioName::Example2);
  const auto v = verify_trichotomy(Mode::Global, f.m().xi, f.sc.global_families, example2_claim(), f.grid);
  CHECK(v.pass);
  for (const auto& [label, m] : v.margins) CHECK(m >= -1e-9);

  auto worse = example2_claim();
  worse.nu[1] += 0.5;
  const auto w = verify_trichotomy(Mode::Global, f.m().xi, f.sc.global_families, worse, f.grid);
  CHECK_FALSE(w.pass);
  CHECK(w.margins.at("t1") < 0.0);
  CHECK(w.margins.at("t0-lower") >= -1e-9);

  // Looser constants keep passing.
  auto loose = example2_claim();
  loose.N = {3.0, 3.0, 3.0};
  loose.nu = {2.5, 0.5, 0.25};
  CHECK(verify_trichotomy(Mode::Global, f.m().xi, f.sc.global_families, loose, f.grid).pass);
}

TEST_CASE("zero probe vectors are satisfied") {
  Fixture f(ScenarioName::Example2);
  f.grid.probes = {{0.0, 0.0, 0.0}};
  auto cert = example2_claim();
  cert.nu = {100.0, 100.0, 100.0};
  CHECK(verify_trichotomy(Mode::Global, f.m().xi, f.sc.global_families, cert, f.grid).pass);
}

TEST_CASE("scope and compatibility are enforced") {
  Fixture f(ScenarioName::Example2);
  CHECK_THROWS_AS(verify_trichotomy(Mode::Pointwise, f.m().xi, f.sc.pointwise_families, example2_claim(), f.grid),
                  ScopeMismatchError);
  TrichotomyFamilies overlap = f.sc.global_families;
  overlap.p1 = ProjectionFamily::coordinates(3, {1, 2});
  CHECK_THROWS_AS(verify_trichotomy(Mode::Global, f.m().xi, overlap, example2_claim(), f.grid),
                  IncompatibleFamiliesError);
}

TEST_CASE("global pass implies pointwise pass at sampled points") {
  Fixture f(ScenarioName::Example2);
  for (const auto& x0 : f.grid.points) {
    auto cert = example2_claim(Mode::Pointwise);
    cert.x0 = x0;
    TrichotomyOptions opt;
    const auto v = verify_trichotomy(Mode::Pointwise, f.m().xi, f.sc.pointwise_families, cert, f.grid, opt);
    CHECK(v.pass);
  }
}

TEST_CASE("example 2 estimate round-trips") {
  Fixture f(ScenarioName::Example2, GridPreset::Default);
  const auto nu = linear_grid(0.1, 2.0, 0.1);
  const auto est = estimate_rate_constants(f.m().xi, f.sc.global_families, Mode::Global, f.grid, nu, 10.0);
  REQUIRE(est.certificate);
  const auto& c = *est.certificate;
  // Analytic rates mu - f(0) = 1 and l = 1. The loose cap admits a larger
  // nu1 on a finite horizon, so only a lower bound holds for it.
  CHECK(c.nu[1] >= 1.0 - 1e-12);
  CHECK(c.nu[2] >= 1.0 - 1e-12);
  CHECK(verify_trichotomy(Mode::Global, f.m().xi, f.sc.global_families, c, f.grid).pass);

  const auto tight = estimate_rate_constants(f.m().xi, f.sc.global_families, Mode::Global, f.grid, nu, 1.0 + 1e-6);
  REQUIRE(tight.certificate);
  CHECK(tight.certificate->nu[2] == doctest::Approx(1.0));
  for (double n : tight.certificate->N) CHECK(n <= 1.0 + 1e-6);
}

TEST_CASE("zero direction is vacuous") {
  Fixture f(ScenarioName::Example1);
  const auto nu = linear_grid(0.05, 5.0, 0.05);
  const auto est = estimate_rate_constants(f.m().xi, f.sc.global_families, Mode::Global, f.grid, nu, 10.0);
  REQUIRE(est.nu[1]);
  CHECK(*est.nu[1] == doctest::Approx(5.0));
  CHECK(*est.minimal_N[1] <= 1.0);
  REQUIRE(est.certificate);
  CHECK(est.certificate->N[1] == inflate_constant(0.0));
}

TEST_CASE("example 3 first point decays between 1/3 and 1/2") {
  Fixture f(ScenarioName::Example3, GridPreset::Default);
  EstimateOptions opt;
  opt.x0 = f.m().x0;
  const auto nu = linear_grid(0.0025, 1.0, 0.0025);
  const auto est =
      estimate_rate_constants(f.m().xi, f.sc.pointwise_families, Mode::Pointwise, f.grid, nu, 1.0 + 1e-6, opt);
  REQUIRE(est.nu[1]);
  CHECK(*est.nu[1] >= 1.0 / 3.0 - 0.0025);
  CHECK(*est.nu[1] <= 0.5);
}

TEST_CASE("special cases") {
  Fixture f(ScenarioName::Example2);
  auto fam = f.sc.global_families;
  fam.p1 = ProjectionFamily::coordinates(3, {1, 3});
  const auto dich = derive_special_case(SpecialCase::Dichotomy, fam);
  CHECK(dich.p0.kind() == ProjectionFamily::Kind::Zero);
  // Coordinate 3 is bounded but not decaying, so no dichotomy certificate.
  const auto nu = linear_grid(0.05, 2.0, 0.05);
  const auto est = estimate_rate_constants(f.m().xi, dich, Mode::Global, f.grid, nu, 1.0 + 1e-6);
  CHECK_FALSE(est.certificate);
  CHECK_FALSE(est.failure.empty());

  // Pure decay: law -3 + x along f = 1 + e^-u decays at rate 3 - f(0) = 1.
  const auto g = TrajectorySpec::exp_decay(1.0, 1.0);
  SkewSemiflow decay{SemiflowSpec::shift(BaseSpace{g}), CocycleSpec{{{ExponentLaw::MinusMuPlusX, 3.0}}}};
  TrichotomyFamilies one{ProjectionFamily::zero(1), ProjectionFamily::identity(1), ProjectionFamily::zero(1)};
  const auto stab = derive_special_case(SpecialCase::Stability, one);
  // Short steps matter: the rate tends to 1 only as t - t0 -> 0.
  Fixture dense(ScenarioName::Example2, GridPreset::Dense);
  GridSpec grid = dense.grid;
  grid.points = {BasePoint::at(g, 0.0), BasePoint::at(g, 2.0), BasePoint::limit_of(g)};
  grid.probes = default_probes(1, 1);
  const auto s = estimate_rate_constants(decay, stab, Mode::Global, grid, nu, 1.0 + 1e-6);
  REQUIRE(s.nu[1]);
  CHECK(*s.nu[1] == doctest::Approx(1.0));

  SkewSemiflow growth{SemiflowSpec::shift(BaseSpace{g}), CocycleSpec{{{ExponentLaw::PlusX}}}};
  const auto gr = estimate_rate_constants(growth, stab, Mode::Global, grid, nu, 1.0 + 1e-6);
  CHECK_FALSE(gr.nu[1]);
}

TEST_CASE("falsification needs escalation across members") {
  Fixture f(ScenarioName::Example2);
  FalsifyOptions opt;
  opt.nu_grid = linear_grid(0.05, 2.0, 0.05);
  FamilyMember m{"x", f.m().xi, f.sc.pointwise_families, f.m().x0, f.grid};
  const auto single = falsify_global({m}, {1.0, 0.5}, opt);
  CHECK_FALSE(single.conclusion);

  auto m2 = m, m3 = m;
  m2.id = "y";
  m3.id = "z";
  const auto same = falsify_global({m, m2, m3}, {1.0, 0.5, 0.25, 0.1}, opt);
  CHECK_FALSE(same.conclusion);
  CHECK(same.every_point_certified);
}

TEST_CASE("grids") {
  const auto g = linear_grid(0.05, 5.0, 0.05);
  CHECK(g.size() == 100);
  CHECK(g.back() == doctest::Approx(5.0));
  const auto l = log_grid(1e-3, 10.0, 40);
  CHECK(l.size() == 40);
  CHECK(l.front() == doctest::Approx(1e-3));
  CHECK(l.back() == doctest::Approx(10.0));
}
