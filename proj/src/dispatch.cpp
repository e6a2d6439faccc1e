#include "robusthedge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace robusthedge {

namespace {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

TreeFamily load_tree(const std::string& path) {
  return tree_family_from_json(parse_json_text(read_text_file(path), path));
}

Claim load_claim(const RunConfig& c) {
  if (!c.payoff.empty()) return parse_payoff(c.payoff);
  return claim_from_json(parse_json_text(read_text_file(c.claim), c.claim));
}

UncertaintySpec load_spec(const RunConfig& c) {
  auto spec = uncertainty_spec_from_json(parse_json_text(read_text_file(c.spec), c.spec));
  if (c.steps) spec.steps = *c.steps;
  return spec;
}

double max_supported(const TreeFamily& fam, const std::vector<double>& f) {
  double m = 0.0;
  for (NodeIndex u : fam.terminal_nodes())
    for (std::size_t k = 0; k < fam.model_count(); ++k)
      if (fam.reach_probability(k, u) > 0.0) m = std::max(m, f[u]);
  return m;
}

class Emitter {
 public:
  Emitter(const RunConfig& c, RunReport& r) : config_(c), report_(r) {}

  void primary(const std::string& text) {
    if (config_.out.empty()) return;
    write_text_file(config_.out, text);
    report_.artifacts.push_back(config_.out);
  }
  // Sidecar holding the numeric results of a CSV artifact.
  void summary() {
    if (config_.out.empty()) return;
    const std::string path = config_.out + ".summary.json";
    write_text_file(path, dump(Json{{"command", config_.command}, {"results", report_.results}}));
    report_.artifacts.push_back(path);
  }

 private:
  const RunConfig& config_;
  RunReport& report_;
};

void run_na1(const RunConfig& c, RunReport& r, Emitter& out) {
  const TreeFamily fam = load_tree(c.model);
  const Na1Report rep = na1_check(fam);
  r.results["holds"] = rep.holds;
  r.results["node_checks"] = rep.records.size();
  if (rep.certificate) {
    r.results["failing_node"] = fam.node(rep.certificate->node).id;
    r.results["certificate_valid"] = certificate_validate(fam, *rep.certificate);
    r.results["quasi_sure"] = rep.certificate->quasi_sure;
  } else {
    double defect = 0.0;
    for (const auto& Q : rep.measures) defect = std::max(defect, martingale_defect(fam, Q));
    r.results["martingale_defect"] = defect;
  }
  out.primary(dump(na1_report_to_json(fam, rep)));
  if (!rep.holds) r.exit_code = kExitNa1Fails;
}

void run_price_tree(const RunConfig& c, RunReport& r, Emitter& out) {
  const TreeFamily fam = load_tree(c.model);
  const Claim claim = load_claim(c);
  const auto f = terminal_payoff(fam, claim);
  const Na1Report na1 = na1_check(fam);
  if (!na1.holds)
    r.warnings.push_back("NA1 fails at node '" + fam.node(na1.certificate->node).id + "'; prices computed anyway");
  const TreeValue value = sublinear_price_tree(fam, f);
  for (const auto& w : value.warnings) r.warnings.push_back(w);
  const HedgeStrategy H = extract_strategy_envelope(fam, value.Z);
  const auto check = verify_superhedge(fam, value.root(), H, f, c.tolerance.value_or(1e-10), &value.Z);
  r.results["price"] = value.root();
  r.results["nodes"] = fam.size();
  r.results["hedge_violations"] = check.violations;
  r.results["min_slack"] = check.min_slack;
  out.primary(price_to_csv(fam, value.Z, H));
  out.summary();
}

void run_price_bsb(const RunConfig& c, RunReport& r, Emitter& out) {
  const UncertaintySpec spec = load_spec(c);
  const Claim claim = load_claim(c);
  BsbGrid grid = c.grid.value_or(BsbGrid{400, 400, 4.0 * spec.S0(0)});
  const BsbSurface surface = bsb_solve(spec, claim, grid, c.stepper);
  r.results["price"] = surface.price_at(spec.S0(0));
  r.results["delta"] = surface.delta_at(0.0, spec.S0(0));
  r.results["grid"] = Json::array({grid.nt, grid.ns, grid.smax});
  r.results["sigma_hi_fraction"] =
      static_cast<double>(surface.hi_selections) / (static_cast<double>(grid.nt) * (grid.ns - 1));
  out.primary(surface_to_csv(surface));
  out.summary();
}

void run_duality(const RunConfig& c, RunReport& r, Emitter& out) {
  const TreeFamily fam = load_tree(c.model);
  const Claim claim = load_claim(c);
  const auto f = terminal_payoff(fam, claim);
  const TreeValue value = sublinear_price_tree(fam, f);
  for (const auto& w : value.warnings) r.warnings.push_back(w);
  const double dual = dual_enumerate(fam, f, c.grid_step);
  const double gap = value.root() - dual;
  const double tol = c.tolerance.value_or(c.grid_step * max_supported(fam, f));
  r.results["primal"] = value.root();
  r.results["dual"] = dual;
  r.results["gap"] = gap;
  r.results["tolerance"] = tol;
  r.results["within_tolerance"] = gap >= -1e-9 && gap <= tol;
  out.primary(dump(Json{{"command", c.command}, {"results", r.results}}));
}

void run_verify(const RunConfig& c, RunReport& r, Emitter& out) {
  const Claim claim = load_claim(c);
  if (!c.price.empty()) {
    const TreeFamily fam = load_tree(c.model);
    const auto f = terminal_payoff(fam, claim);
    const PriceTable table = price_from_csv(fam, read_text_file(c.price));
    const double tol = c.tolerance.value_or(1e-10);
    const auto v = verify_superhedge(fam, table.Z[0], table.H, f, tol, &table.Z);
    r.results["mode"] = "tree";
    r.results["capital"] = table.Z[0];
    r.results["terminal_checked"] = v.terminal_checked;
    r.results["violations"] = v.violations;
    r.results["min_slack"] = v.min_slack;
    r.results["residual_monotone"] = v.residual_monotone;
    r.results["tolerance"] = tol;
  } else {
    const UncertaintySpec spec = load_spec(c);
    const BsbSurface surface = surface_from_csv(read_text_file(c.surface));
    const std::size_t n = c.samples.value_or(10000);
    const auto paths = simulate_paths(spec, random_volatility_policy(spec, c.seed), n, c.seed);
    const double x = surface.price_at(spec.S0(0));
    const double eps = c.tolerance.value_or(1e-10);
    const auto v = verify_superhedge(paths, x, surface, claim, eps);
    r.results["mode"] = "paths";
    r.results["capital"] = x;
    r.results["paths"] = v.paths;
    r.results["violations"] = v.violations;
    r.results["violation_rate"] = v.violation_rate();
    r.results["min_slack"] = v.min_slack;
    r.results["mean_slack"] = v.mean_slack;
    r.results["epsilon"] = eps;
    r.results["seed"] = c.seed;
  }
  out.primary(dump(Json{{"command", c.command}, {"results", r.results}}));
}

void run_follmer(const RunConfig& c, RunReport& r, Emitter& out) {
  const std::size_t n = c.samples.value_or(1000000);
  const BesselReport rep = inverse_bessel_demo(c.horizon, n, c.seed);
  r.results["horizon"] = rep.horizon;
  r.results["samples"] = rep.samples;
  r.results["estimate"] = rep.estimate;
  r.results["oracle"] = rep.oracle;
  r.results["standard_error"] = rep.standard_error;
  r.results["z_score"] = rep.z_score;
  r.results["cemetery_mass"] = rep.cemetery_mass;
  r.results["cemetery_oracle"] = rep.cemetery_oracle;
  const int steps = c.steps.value_or(10000);
  const auto paths = simulate_absorbed_brownian(1.0, c.horizon, steps, std::min<std::size_t>(n, 2000), c.seed);
  const auto ann = announce_lifetime(paths, {0.5, 0.25, 0.125, 0.0625});
  r.results["announcement"] = Json{{"paths", paths.size()},
                                   {"killed", ann.killed_paths},
                                   {"not_before_lifetime", ann.not_before_lifetime},
                                   {"non_monotone", ann.non_monotone},
                                   {"max_final_gap", ann.max_final_gap}};
  out.primary(bessel_report_csv(rep));
  out.summary();
}

}  // namespace

Json RunReport::to_json() const {
  Json j{{"command", command}, {"config", config}, {"duration_seconds", duration_seconds}, {"results", results}};
  j["warnings"] = warnings;
  j["artifacts"] = artifacts;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  return j;
}

RunReport dispatch(const RunConfig& config) {
  RunReport report;
  report.command = config.command;
  report.config = config.echo();
  Emitter out(config, report);
  const auto start = std::chrono::steady_clock::now();
  try {
    if (config.command == "na1")
      run_na1(config, report, out);
    else if (config.command == "price-tree")
      run_price_tree(config, report, out);
    else if (config.command == "price-bsb")
      run_price_bsb(config, report, out);
    else if (config.command == "duality")
      run_duality(config, report, out);
    else if (config.command == "verify-hedge")
      run_verify(config, report, out);
    else if (config.command == "follmer-demo")
      run_follmer(config, report, out);
    else
      throw std::invalid_argument("unknown command '" + config.command + "'");
  } catch (const std::domain_error& e) {
    report.exit_code = kExitNumerics;
    report.error = e.what();
  } catch (const std::invalid_argument& e) {
    report.exit_code = kExitMalformed;
    report.error = e.what();
  } catch (const std::exception& e) {
    report.exit_code = kExitNumerics;
    report.error = e.what();
  }
  report.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace robusthedge
