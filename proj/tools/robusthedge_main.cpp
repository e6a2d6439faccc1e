#include "robusthedge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>

using robusthedge::Json;

namespace {

// Keeps the raw text when it is not a number so validation can name it.
Json scalar_of(const std::string& text) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] != '-') {
      const unsigned long long u = std::stoull(text, &used);
      if (used == text.size()) return Json(static_cast<std::uint64_t>(u));
    }
    const long long i = std::stoll(text, &used);
    if (used == text.size()) return Json(static_cast<std::int64_t>(i));
    const double d = std::stod(text, &used);
    if (used == text.size()) return Json(d);
  } catch (const std::exception&) {
  }
  return Json(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust superhedging and no-arbitrage engine for scenario-tree families and volatility bands", "robusthedge"};
  std::string command, config_path;
  app.add_option("command", command, "na1 | price-tree | price-bsb | duality | verify-hedge | follmer-demo");
  app.add_option("--config", config_path, "JSON run configuration; flags override its keys");

  const std::map<std::string, std::string> text_flags = {
      {"model", "tree family JSON"}, {"claim", "claim JSON"},  {"spec", "uncertainty spec JSON"},
      {"price", "price CSV (verify-hedge, tree mode)"},        {"surface", "surface CSV (verify-hedge, path mode)"},
      {"payoff", "payoff string, e.g. call:100"},              {"out", "primary artifact path"},
      {"grid", "PDE grid nt,ns,smax"},                          {"stepper", "implicit | explicit"}};
  const std::map<std::string, std::string> number_flags = {
      {"grid-step", "dual enumeration step"}, {"samples", "Monte Carlo sample count"},
      {"seed", "64-bit seed"},                {"tolerance", "positive tolerance"},
      {"horizon", "time horizon"},            {"steps", "time steps"}};
  std::map<std::string, std::string> values;
  for (const auto& [name, help] : text_flags) app.add_option("--" + name, values[name], help);
  for (const auto& [name, help] : number_flags) app.add_option("--" + name, values[name], help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : robusthedge::kExitMalformed;
  }

  Json raw = Json::object();
  std::string raw_text;
  const std::string origin = config_path.empty() ? "command line" : config_path;
  if (!config_path.empty()) {
    try {
      raw_text = robusthedge::read_text_file(config_path);
      raw = robusthedge::parse_json_text(raw_text, config_path);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return robusthedge::kExitMalformed;
    }
  }
  if (!command.empty()) raw["command"] = command;
  for (const auto& [name, value] : values) {
    if (value.empty()) continue;
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    raw[key] = number_flags.count(name) ? scalar_of(value) : Json(value);
  }

  const auto checked = robusthedge::validate_config_document(raw, raw_text, origin);
  if (!checked.config) {
    for (const auto& err : checked.errors) std::cerr << origin << ": " << err.to_string() << "\n";
    return robusthedge::kExitMalformed;
  }
  const auto report = robusthedge::dispatch(*checked.config);
  std::cout << report.to_json().dump(2) << "\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (!report.error.empty()) std::cerr << "error: " << report.error << "\n";
  return report.exit_code;
}
