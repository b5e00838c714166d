#include "skewflow/scenarios.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "skewflow/errors.hpp"

namespace skewflow {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

SkewSemiflow make_xi(const TrajectorySpec& g, std::vector<ComponentLaw> laws, const ScenarioParams& p) {
  SkewSemiflow xi{SemiflowSpec::shift(BaseSpace{g, true}), CocycleSpec{std::move(laws), p.anchor}, p.norm};
  xi.cocycle.validate();
  return xi;
}

TrichotomyFamilies coordinate_families(Indexing indexing) {
  return TrichotomyFamilies{ProjectionFamily::coordinates(3, {3}, indexing),
                            ProjectionFamily::coordinates(3, {1}, indexing),
                            ProjectionFamily::coordinates(3, {2}, indexing)};
}

RateCertificate claimed_certificate(double nu0, double nu1, double nu2) {
  RateCertificate c;
  c.N = {1.0 + 1e-9, 1.0 + 1e-9, 1.0 + 1e-9};
  c.nu = {nu0, nu1, nu2};
  c.scope = Mode::Global;
  return c;
}

}  // namespace

std::string to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::Example1:
      return "example1";
    case ScenarioName::Example2:
      return "example2";
    case ScenarioName::Example3:
      return "example3";
  }
  return "example2";
}

ScenarioName parse_scenario_name(const std::string& text) {
  const auto s = lower(text);
  if (s == "example1") return ScenarioName::Example1;
  if (s == "example2") return ScenarioName::Example2;
  if (s == "example3") return ScenarioName::Example3;
  throw ConfigError("unknown scenario '" + text + "' (expected example1, example2 or example3)");
}

Scenario build_scenario(ScenarioName name, const ScenarioParams& params) {
  const auto time_fams = [](std::vector<ProjectionFamily> fams) {
    for (auto& f : fams) f = f.reindexed(Indexing::Time);
    return fams;
  };

  switch (name) {
    case ScenarioName::Example1: {
      const auto g = TrajectorySpec::exp_decay(params.l, params.a);
      const auto zero = ProjectionFamily::zero(1);
      const auto id = ProjectionFamily::identity(1);
      Scenario sc{name,
                  params,
                  {ScenarioMember{"f", make_xi(g, {{ExponentLaw::PlusX, 0.0}}, params), BasePoint::at(g, 0.0)}},
                  TrichotomyFamilies{zero, zero, id},
                  TrichotomyFamilies{zero.reindexed(Indexing::Time), zero.reindexed(Indexing::Time),
                                     id.reindexed(Indexing::Time)},
                  time_fams({zero, id}),
                  time_fams({zero, id, complementary_projector(zero), complementary_projector(id)}),
                  claimed_certificate(g.value(0.0), 1.0, params.l)};
      return sc;
    }
    case ScenarioName::Example2: {
      const auto g = TrajectorySpec::exp_decay(params.l, params.a);
      const double f0 = g.value(0.0);
      if (!(params.mu > f0)) {
        throw ParamError("example2 needs mu > f(0) = " + std::to_string(f0) + ", got mu = " + std::to_string(params.mu));
      }
      auto xi = make_xi(g,
                        {{ExponentLaw::MinusMuPlusX, params.mu},
                         {ExponentLaw::PlusX, 0.0},
                         {ExponentLaw::MinusX0PlusX, 0.0}},
                        params);
      const auto r1 = ProjectionFamily::coordinates(3, {1}, Indexing::Time);
      const auto r2 = ProjectionFamily::coordinates(3, {2}, Indexing::Time);
      Scenario sc{name,
                  params,
                  {ScenarioMember{"f", std::move(xi), BasePoint::at(g, 0.0)}},
                  coordinate_families(Indexing::Point),
                  coordinate_families(Indexing::Time),
                  {r1, r2},
                  {r1, r2, complementary_projector(r1), complementary_projector(r2)},
                  claimed_certificate(f0, params.mu - f0, params.l)};
      return sc;
    }
    case ScenarioName::Example3: {
      if (params.n_list.empty()) throw ParamError("example3 needs a nonempty n list");
      std::set<int> seen;
      std::vector<ScenarioMember> members;
      for (int n : params.n_list) {
        if (n < 1) throw ParamError("example3 needs every n >= 1, got " + std::to_string(n));
        if (!seen.insert(n).second) throw ParamError("example3 n list repeats n = " + std::to_string(n));
        const auto g = TrajectorySpec::interval_decay(n);
        // x_n must stay inside (1/(2n+1), 1/(2n)); it decreases to its lower end.
        if (!(g.value(0.0) < 1.0 / (2.0 * n)) || !(g.limit() >= 1.0 / (2.0 * n + 1.0))) {
          throw ParamError("x_n leaves (1/(2n+1), 1/(2n)) for n = " + std::to_string(n));
        }
        members.push_back(ScenarioMember{
            "n=" + std::to_string(n),
            make_xi(g, {{ExponentLaw::MinusX, 0.0}, {ExponentLaw::PlusX, 0.0}, {ExponentLaw::PlusX, 0.0}}, params),
            BasePoint::at(g, 0.0)});
      }
      const auto r1 = ProjectionFamily::coordinates(3, {1}, Indexing::Time);
      const auto r2 = ProjectionFamily::coordinates(3, {2}, Indexing::Time);
      Scenario sc{name,
                  params,
                  std::move(members),
                  coordinate_families(Indexing::Point),
                  coordinate_families(Indexing::Time),
                  {r1, r2},
                  {r1, r2, complementary_projector(r1), complementary_projector(r2)},
                  std::nullopt};
      return sc;
    }
  }
  throw ParamError("unknown scenario");
}

std::string to_string(GridPreset preset) {
  switch (preset) {
    case GridPreset::Small:
      return "small";
    case GridPreset::Default:
      return "default";
    case GridPreset::Dense:
      return "dense";
  }
  return "default";
}

GridPreset parse_grid_preset(const std::string& text) {
  const auto s = lower(text);
  if (s == "small") return GridPreset::Small;
  if (s == "default") return GridPreset::Default;
  if (s == "dense") return GridPreset::Dense;
  throw ConfigError("unknown grid preset '" + text + "' (expected small, default or dense)");
}

const std::vector<std::string>& known_analyses() {
  static const std::vector<std::string> names{"axioms",    "compat",     "verify",  "estimate",
                                              "phi",       "integrals",  "hypotheses", "falsify"};
  return names;
}

std::vector<std::string> default_analyses(ScenarioName name) {
  switch (name) {
    case ScenarioName::Example1:
      return {"axioms", "compat", "verify", "estimate"};
    case ScenarioName::Example2:
      return {"axioms", "compat", "verify", "estimate", "phi", "integrals", "hypotheses"};
    case ScenarioName::Example3:
      return {"axioms", "compat", "estimate", "falsify"};
  }
  return {};
}

GridSpec make_grid(const RunConfig& config, const ScenarioMember& member) {
  GridSpec g;
  std::vector<double> shifts;
  switch (config.preset) {
    case GridPreset::Small:
      g.t0_values = {0.0, 1.0};
      g.first_steps = {0.0, 1.0, 2.0};
      g.second_steps = {0.0, 1.0, 5.0};
      shifts = {0.0, 1.0};
      break;
    case GridPreset::Default:
      g.t0_values = {0.0, 1.0, 2.0};
      g.first_steps = {0.0, 0.5, 1.0, 2.0, 5.0};
      g.second_steps = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
      shifts = {0.0, 0.5, 1.0, 2.0, 5.0};
      break;
    case GridPreset::Dense:
      g.t0_values = {0.0, 1.0, 2.0};
      g.first_steps = {0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0};
      g.second_steps = {0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
      shifts = {0.0, 0.5, 1.0, 2.0, 5.0};
      break;
  }
  if (config.grid.t0_values) g.t0_values = *config.grid.t0_values;
  if (config.grid.first_steps) g.first_steps = *config.grid.first_steps;
  if (config.grid.second_steps) g.second_steps = *config.grid.second_steps;
  if (config.grid.shifts) shifts = *config.grid.shifts;
  const auto& gen = member.x0.generator;
  for (double s : shifts) g.points.push_back(BasePoint::at(gen, s));
  if (config.grid.include_limit.value_or(true)) g.points.push_back(BasePoint::limit_of(gen));
  g.probes = default_probes(member.xi.dimension(), config.seed, config.random_probes);
  g.tol = config.tol.axiom;
  return g;
}

std::vector<double> scenario_nu_grid(const RunConfig& config) {
  NuGrid ng;
  if (config.nu_grid) {
    ng = *config.nu_grid;
  } else if (config.scenario == ScenarioName::Example3) {
    ng = NuGrid{0.0025, 1.0, 0.0025};
  }
  return linear_grid(ng.first, ng.last, ng.step);
}

// ---------------------------------------------------------------- config

namespace {

void require_known(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("field '" + path + "': expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown field '" + (path.empty() ? key : path + "." + key) + "'");
    }
  }
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("field '" + path + "': expected a number");
  return v.get<double>();
}

double get_positive(const json& v, const std::string& path) {
  const double x = get_number(v, path);
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("field '" + path + "': expected a positive number");
  return x;
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError("field '" + path + "': expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError("field '" + path + "': expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = get_number(v[i], path + "[" + std::to_string(i) + "]");
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("field '" + path + "': values must be finite and >= 0");
    out.push_back(x);
  }
  return out;
}

NormKind parse_norm(const std::string& s, const std::string& path) {
  const auto l = lower(s);
  if (l == "l1") return NormKind::L1;
  if (l == "l2") return NormKind::L2;
  throw ConfigError("field '" + path + "': expected L1 or L2");
}

std::string norm_name(NormKind k) { return k == NormKind::L1 ? "L1" : "L2"; }

std::string anchor_name(AnchorReading a) {
  return a == AnchorReading::OrbitOrigin ? "orbit_origin" : "evaluation_point";
}

std::string reading_name(OrbitReading r) { return r == OrbitReading::Initial ? "initial" : "evolved"; }

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require_known(doc, "", {"schema_version", "scenario", "grid", "probes", "tolerances", "analyses"});

  RunConfig cfg;
  if (doc.contains("schema_version")) {
    const auto& v = doc["schema_version"];
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
      throw ConfigError("field 'schema_version': expected " + std::to_string(kSchemaVersion));
    }
  }

  if (!doc.contains("scenario")) throw ConfigError("missing field 'scenario'");
  const auto& sc = doc["scenario"];
  require_known(sc, "scenario", {"name", "l", "a", "mu", "n_list", "norm", "anchor", "reading"});
  if (!sc.contains("name")) throw ConfigError("missing field 'scenario.name'");
  cfg.scenario = parse_scenario_name(get_string(sc["name"], "scenario.name"));
  if (sc.contains("l")) cfg.params.l = get_number(sc["l"], "scenario.l");
  if (sc.contains("a")) cfg.params.a = get_number(sc["a"], "scenario.a");
  if (sc.contains("mu")) cfg.params.mu = get_number(sc["mu"], "scenario.mu");
  if (sc.contains("n_list")) {
    const auto& nl = sc["n_list"];
    if (!nl.is_array() || nl.empty()) throw ConfigError("field 'scenario.n_list': expected a nonempty array");
    cfg.params.n_list.clear();
    for (const auto& n : nl) {
      if (!n.is_number_integer()) throw ConfigError("field 'scenario.n_list': expected integers");
      cfg.params.n_list.push_back(n.get<int>());
    }
  }
  if (sc.contains("norm")) cfg.params.norm = parse_norm(get_string(sc["norm"], "scenario.norm"), "scenario.norm");
  if (sc.contains("anchor")) {
    const auto a = lower(get_string(sc["anchor"], "scenario.anchor"));
    if (a == "orbit_origin") {
      cfg.params.anchor = AnchorReading::OrbitOrigin;
    } else if (a == "evaluation_point") {
      cfg.params.anchor = AnchorReading::EvaluationPoint;
    } else {
      throw ConfigError("field 'scenario.anchor': expected orbit_origin or evaluation_point");
    }
  }
  if (sc.contains("reading")) {
    const auto r = lower(get_string(sc["reading"], "scenario.reading"));
    if (r == "initial") {
      cfg.reading = OrbitReading::Initial;
    } else if (r == "evolved") {
      cfg.reading = OrbitReading::Evolved;
    } else {
      throw ConfigError("field 'scenario.reading': expected initial or evolved");
    }
  }

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    require_known(g, "grid", {"preset", "t0", "first_steps", "second_steps", "shifts", "include_limit", "nu_grid"});
    if (g.contains("preset")) cfg.preset = parse_grid_preset(get_string(g["preset"], "grid.preset"));
    if (g.contains("t0")) cfg.grid.t0_values = get_numbers(g["t0"], "grid.t0");
    if (g.contains("first_steps")) cfg.grid.first_steps = get_numbers(g["first_steps"], "grid.first_steps");
    if (g.contains("second_steps")) cfg.grid.second_steps = get_numbers(g["second_steps"], "grid.second_steps");
    if (g.contains("shifts")) cfg.grid.shifts = get_numbers(g["shifts"], "grid.shifts");
    if (g.contains("include_limit")) {
      if (!g["include_limit"].is_boolean()) throw ConfigError("field 'grid.include_limit': expected a boolean");
      cfg.grid.include_limit = g["include_limit"].get<bool>();
    }
    if (g.contains("nu_grid")) {
      const auto& ng = g["nu_grid"];
      require_known(ng, "grid.nu_grid", {"first", "last", "step"});
      NuGrid n;
      if (ng.contains("first")) n.first = get_positive(ng["first"], "grid.nu_grid.first");
      if (ng.contains("last")) n.last = get_positive(ng["last"], "grid.nu_grid.last");
      if (ng.contains("step")) n.step = get_positive(ng["step"], "grid.nu_grid.step");
      if (n.last < n.first) throw ConfigError("field 'grid.nu_grid': last must be >= first");
      cfg.nu_grid = n;
    }
  }

  if (doc.contains("probes")) {
    const auto& p = doc["probes"];
    require_known(p, "probes", {"seed", "random"});
    if (p.contains("seed")) {
      if (!p["seed"].is_number_unsigned()) throw ConfigError("field 'probes.seed': expected a nonnegative integer");
      cfg.seed = p["seed"].get<std::uint64_t>();
    }
    if (p.contains("random")) {
      if (!p["random"].is_number_integer() || p["random"].get<int>() < 0) {
        throw ConfigError("field 'probes.random': expected a nonnegative integer");
      }
      cfg.random_probes = p["random"].get<int>();
    }
  }

  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    require_known(t, "tolerances", {"axiom", "compat", "margin", "quadrature", "n_cap", "uniform_n_cap"});
    if (t.contains("axiom")) cfg.tol.axiom = get_positive(t["axiom"], "tolerances.axiom");
    if (t.contains("compat")) cfg.tol.compat = get_positive(t["compat"], "tolerances.compat");
    if (t.contains("margin")) cfg.tol.margin = get_positive(t["margin"], "tolerances.margin");
    if (t.contains("quadrature")) cfg.tol.quadrature = get_positive(t["quadrature"], "tolerances.quadrature");
    if (t.contains("n_cap")) cfg.tol.n_cap = get_positive(t["n_cap"], "tolerances.n_cap");
    if (t.contains("uniform_n_cap")) cfg.tol.uniform_n_cap = get_positive(t["uniform_n_cap"], "tolerances.uniform_n_cap");
  }

  if (doc.contains("analyses")) {
    const auto& a = doc["analyses"];
    if (!a.is_array()) throw ConfigError("field 'analyses': expected an array of names");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto name = lower(get_string(a[i], "analyses[" + std::to_string(i) + "]"));
      const auto& known = known_analyses();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("field 'analyses[" + std::to_string(i) + "]': unknown analysis '" + name + "'");
      }
      names.push_back(name);
    }
    cfg.analyses = names;
  }
  return cfg;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["scenario"] = {{"name", to_string(c.scenario)},
                   {"l", c.params.l},
                   {"a", c.params.a},
                   {"mu", c.params.mu},
                   {"n_list", c.params.n_list},
                   {"norm", norm_name(c.params.norm)},
                   {"anchor", anchor_name(c.params.anchor)},
                   {"reading", reading_name(c.reading)}};
  json g{{"preset", to_string(c.preset)}};
  if (c.grid.t0_values) g["t0"] = *c.grid.t0_values;
  if (c.grid.first_steps) g["first_steps"] = *c.grid.first_steps;
  if (c.grid.second_steps) g["second_steps"] = *c.grid.second_steps;
  if (c.grid.shifts) g["shifts"] = *c.grid.shifts;
  if (c.grid.include_limit) g["include_limit"] = *c.grid.include_limit;
  if (c.nu_grid) g["nu_grid"] = {{"first", c.nu_grid->first}, {"last", c.nu_grid->last}, {"step", c.nu_grid->step}};
  j["grid"] = g;
  j["probes"] = {{"seed", c.seed}, {"random", c.random_probes}};
  j["tolerances"] = {{"axiom", c.tol.axiom},           {"compat", c.tol.compat}, {"margin", c.tol.margin},
                     {"quadrature", c.tol.quadrature}, {"n_cap", c.tol.n_cap},   {"uniform_n_cap", c.tol.uniform_n_cap}};
  j["analyses"] = c.analyses ? *c.analyses : default_analyses(c.scenario);
  return j;
}

}  // namespace skewflow
