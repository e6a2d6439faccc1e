#include "robusthedge/cli.hpp"

#include <filesystem>
#include <set>
#include <sstream>

namespace robusthedge {

namespace {

const std::set<std::string> kCommands = {"na1", "price-tree", "price-bsb", "duality", "verify-hedge", "follmer-demo"};
const std::set<std::string> kKeys = {"command", "model", "claim",  "spec",      "price",   "surface",
                                     "payoff",  "out",   "grid",   "grid_step", "samples", "seed",
                                     "tolerance", "horizon", "steps", "stepper"};

int line_of(const std::string& raw_text, const std::string& key) {
  if (raw_text.empty()) return 0;
  const auto pos = raw_text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if (raw_text[i] == '\n') ++line;
  return line;
}

std::optional<BsbGrid> parse_grid(const Json& j, std::string& problem) {
  std::vector<double> parts;
  if (j.is_string()) {
    std::stringstream ss(j.get<std::string>());
    for (std::string item; std::getline(ss, item, ',');) {
      try {
        std::size_t used = 0;
        parts.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        problem = "'" + item + "' is not a number";
        return std::nullopt;
      }
    }
  } else if (j.is_array()) {
    for (const auto& x : j) {
      if (!x.is_number()) {
        problem = "entries must be numbers";
        return std::nullopt;
      }
      parts.push_back(x.get<double>());
    }
  } else {
    problem = "expected \"nt,ns,smax\" or [nt, ns, smax]";
    return std::nullopt;
  }
  if (parts.size() != 3) {
    problem = "expected three entries nt,ns,smax";
    return std::nullopt;
  }
  BsbGrid g;
  if (parts[0] != static_cast<int>(parts[0]) || parts[1] != static_cast<int>(parts[1])) {
    problem = "nt and ns must be integers";
    return std::nullopt;
  }
  g.nt = static_cast<int>(parts[0]);
  g.ns = static_cast<int>(parts[1]);
  g.smax = parts[2];
  if (g.nt < 1 || g.ns < 2 || !(g.smax > 0.0)) {
    problem = "need nt >= 1, ns >= 2 and smax > 0";
    return std::nullopt;
  }
  return g;
}

}  // namespace

std::string ConfigError::to_string() const {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!key.empty()) out += key + ": ";
  return out + message;
}

Json RunConfig::echo() const {
  Json j{{"command", command}};
  for (const auto& [key, value] : {std::pair<const char*, const std::string*>{"model", &model},
                                   {"claim", &claim},
                                   {"spec", &spec},
                                   {"price", &price},
                                   {"surface", &surface},
                                   {"payoff", &payoff},
                                   {"out", &out}})
    if (!value->empty()) j[key] = *value;
  if (grid) j["grid"] = Json::array({grid->nt, grid->ns, grid->smax});
  j["grid_step"] = grid_step;
  if (samples) j["samples"] = *samples;
  j["seed"] = seed;
  if (tolerance) j["tolerance"] = *tolerance;
  j["horizon"] = horizon;
  if (steps) j["steps"] = *steps;
  j["stepper"] = stepper == Stepper::kImplicit ? "implicit" : "explicit";
  return j;
}

ConfigResult validate_config(const std::string& raw_text, const std::string& origin) {
  Json raw;
  try {
    raw = parse_json_text(raw_text, origin);
  } catch (const std::invalid_argument& e) {
    ConfigResult r;
    r.errors.push_back({"", 0, e.what()});
    return r;
  }
  return validate_config_document(raw, raw_text, origin);
}

ConfigResult validate_config_document(const Json& raw, const std::string& raw_text, const std::string& origin) {
  ConfigResult result;
  auto fail = [&](const std::string& key, const std::string& message) {
    result.errors.push_back({key, line_of(raw_text, key), message});
  };
  if (!raw.is_object()) {
    result.errors.push_back({"", 1, origin + " must be a JSON object"});
    return result;
  }
  RunConfig cfg;
  for (const auto& [key, _] : raw.items())
    if (!kKeys.count(key)) fail(key, "unknown key");

  auto text = [&](const char* key, std::string& into) {
    if (!raw.contains(key)) return;
    if (!raw.at(key).is_string() || raw.at(key).get<std::string>().empty())
      fail(key, "must be a non-empty string");
    else
      into = raw.at(key).get<std::string>();
  };
  text("command", cfg.command);
  if (!raw.contains("command"))
    fail("command", "missing");
  else if (!cfg.command.empty() && !kCommands.count(cfg.command))
    fail("command", "unknown command '" + cfg.command + "'");
  text("model", cfg.model);
  text("claim", cfg.claim);
  text("spec", cfg.spec);
  text("price", cfg.price);
  text("surface", cfg.surface);
  text("payoff", cfg.payoff);
  text("out", cfg.out);

  auto positive = [&](const char* key) -> std::optional<double> {
    if (!raw.contains(key)) return std::nullopt;
    const auto& v = raw.at(key);
    if (!v.is_number()) {
      fail(key, "must be a number");
      return std::nullopt;
    }
    if (!(v.get<double>() > 0.0)) {
      fail(key, "must be > 0");
      return std::nullopt;
    }
    return v.get<double>();
  };
  auto count = [&](const char* key, long long minimum) -> std::optional<long long> {
    if (!raw.contains(key)) return std::nullopt;
    const auto& v = raw.at(key);
    if (!v.is_number_integer() || v.get<long long>() < minimum) {
      fail(key, "must be an integer >= " + std::to_string(minimum));
      return std::nullopt;
    }
    return v.get<long long>();
  };

  if (auto t = positive("tolerance")) cfg.tolerance = *t;
  if (auto g = positive("grid_step")) {
    if (*g > 1.0)
      fail("grid_step", "must be <= 1");
    else
      cfg.grid_step = *g;
  }
  if (auto h = positive("horizon")) cfg.horizon = *h;
  if (auto n = count("samples", 1)) cfg.samples = static_cast<std::size_t>(*n);
  if (auto n = count("steps", 1)) cfg.steps = static_cast<int>(*n);
  if (raw.contains("seed")) {
    const auto& s = raw.at("seed");
    if (s.is_number_unsigned())
      cfg.seed = s.get<std::uint64_t>();
    else
      fail("seed", "must be a nonnegative 64-bit integer");
  }
  if (raw.contains("stepper")) {
    const auto& s = raw.at("stepper");
    if (s == "implicit")
      cfg.stepper = Stepper::kImplicit;
    else if (s == "explicit")
      cfg.stepper = Stepper::kExplicit;
    else
      fail("stepper", "must be \"implicit\" or \"explicit\"");
  }
  if (raw.contains("grid")) {
    std::string problem;
    cfg.grid = parse_grid(raw.at("grid"), problem);
    if (!cfg.grid) fail("grid", problem);
  }
  if (!cfg.payoff.empty()) {
    try {
      parse_payoff(cfg.payoff);
    } catch (const std::invalid_argument& e) {
      fail("payoff", e.what());
    }
  }

  for (const auto& [key, path] : {std::pair<const char*, const std::string*>{"model", &cfg.model},
                                  {"claim", &cfg.claim},
                                  {"spec", &cfg.spec},
                                  {"price", &cfg.price},
                                  {"surface", &cfg.surface}})
    if (!path->empty() && !std::filesystem::is_regular_file(*path)) fail(key, "file '" + *path + "' does not exist");
  if (!cfg.out.empty()) {
    const auto parent = std::filesystem::path(cfg.out).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
      fail("out", "directory '" + parent.string() + "' does not exist");
  }

  auto need = [&](const char* key, const std::string& value) {
    if (value.empty() && !raw.contains(key)) fail(key, "required by command '" + cfg.command + "'");
  };
  const std::string& c = cfg.command;
  if (c == "na1") need("model", cfg.model);
  if (c == "price-tree" || c == "duality") {
    need("model", cfg.model);
    need("claim", cfg.claim);
  }
  if (c == "price-bsb") {
    need("spec", cfg.spec);
    if (cfg.payoff.empty() && cfg.claim.empty() && !raw.contains("payoff") && !raw.contains("claim"))
      fail("payoff", "price-bsb needs a payoff or a claim file");
  }
  if (c == "verify-hedge") {
    const bool tree = raw.contains("price");
    const bool paths = raw.contains("surface");
    if (tree == paths) {
      fail("price", "verify-hedge needs exactly one of 'price' (tree mode) or 'surface' (path mode)");
    } else if (tree) {
      need("model", cfg.model);
      need("claim", cfg.claim);
    } else {
      need("spec", cfg.spec);
      if (cfg.payoff.empty() && cfg.claim.empty() && !raw.contains("payoff") && !raw.contains("claim"))
        fail("payoff", "path mode needs a payoff or a claim file");
    }
  }

  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

}  // namespace robusthedge
