#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "skewflow/errors.hpp"
#include "skewflow/scenarios.hpp"

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3 };

struct Options {
  std::string config;
  std::string scenario;
  std::string out;
  std::string csv;
  std::string preset;
  double tol = 0.0;
  std::uint64_t seed = 0;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw skewflow::ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

skewflow::RunConfig build_config(const Options& o, const std::optional<std::vector<std::string>>& analyses) {
  skewflow::RunConfig cfg;
  if (!o.config.empty()) {
    cfg = skewflow::parse_config(read_file(o.config));
  } else if (o.scenario.empty()) {
    throw skewflow::ConfigError("either --config or --scenario is required");
  }
  if (!o.scenario.empty()) cfg.scenario = skewflow::parse_scenario_name(o.scenario);
  if (!o.preset.empty()) cfg.preset = skewflow::parse_grid_preset(o.preset);
  if (o.seed_opt && o.seed_opt->count() > 0) cfg.seed = o.seed;
  if (o.tol_opt && o.tol_opt->count() > 0) {
    if (!(o.tol > 0.0)) throw skewflow::ConfigError("--tol must be > 0");
    cfg.tol.margin = o.tol;
  }
  if (analyses) cfg.analyses = analyses;
  return cfg;
}

int run(const Options& o, const std::optional<std::vector<std::string>>& analyses) {
  skewflow::RunConfig cfg;
  try {
    cfg = build_config(o, analyses);
  } catch (const skewflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  }

  skewflow::ReportDocument report;
  try {
    report = skewflow::run_report(cfg);
  } catch (const skewflow::ParamError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kUsage;
  } catch (const skewflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  }

  const auto text = skewflow::serialize_report(report);
  try {
    if (o.out.empty()) {
      std::cout << text;
    } else {
      skewflow::write_atomic(o.out, text);
    }
    if (!o.csv.empty()) skewflow::write_atomic(o.csv, skewflow::margins_csv(report.rows));
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kUsage;
  }

  for (const auto& [name, section] : report.body["analyses"].items()) {
    std::cerr << (section.value("pass", false) ? "PASS " : "FAIL ") << name;
    if (section.contains("error")) std::cerr << " (" << section["error"]["type"].get<std::string>() << ")";
    std::cerr << "\n";
  }
  if (report.numeric_error) return kNumeric;
  return report.success ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skewflow: checks and estimates for skew-evolution semiflows"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"axioms", "semiflow and cocycle axioms"},
      {"compat", "projection compatibility in all four regimes"},
      {"verify", "trichotomy inequalities for a certificate"},
      {"estimate", "rate-constant estimation with round-trip verification"},
      {"phi-check", "two-projection phi characterization, both directions"},
      {"integrals", "integral bounds and their hypotheses"},
      {"falsify-global", "pointwise-vs-global escalation test"},
      {"report", "the configured (or default) pipeline"}};
  const std::map<std::string, std::vector<std::string>> analyses{
      {"axioms", {"axioms"}},     {"compat", {"compat"}},
      {"verify", {"verify"}},     {"estimate", {"estimate"}},
      {"phi-check", {"phi"}},     {"integrals", {"integrals", "hypotheses"}},
      {"falsify-global", {"falsify"}}};

  Options opts;
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opts.config, "JSON config file");
    sub->add_option("--scenario", opts.scenario, "example1, example2 or example3");
    sub->add_option("--out", opts.out, "write the JSON report here instead of stdout");
    sub->add_option("--csv", opts.csv, "write per-sample log-margins as CSV");
    auto* tol = sub->add_option("--tol", opts.tol, "margin tolerance");
    auto* seed = sub->add_option("--seed", opts.seed, "probe seed");
    sub->add_option("--grid-preset", opts.preset, "small, default or dense");
    // Only the chosen subcommand parses, so the last registration wins harmlessly.
    sub->callback([&opts, tol, seed] {
      opts.tol_opt = tol;
      opts.seed_opt = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  for (auto* sub : app.get_subcommands()) {
    const auto it = analyses.find(sub->get_name());
    std::optional<std::vector<std::string>> chosen;
    if (it != analyses.end()) chosen = it->second;
    return run(opts, chosen);
  }
  return kUsage;
}
