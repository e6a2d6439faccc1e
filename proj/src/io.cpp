#include "robusthedge/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace robusthedge {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

const Json& require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(where + ": missing key '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw std::invalid_argument(where + ": expected a number");
  return j.get<double>();
}

Vector vector_of(const Json& j, const std::string& where) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) throw std::invalid_argument(where + ": expected a number or a non-empty array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], where);
  return v;
}

Json json_of(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json json_of(const Matrix& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(json_of(Vector(m.row(i).transpose())));
  return a;
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw std::invalid_argument(where + ": expected an integer");
  return j.get<int>();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw std::invalid_argument(where + ": '" + s + "' is not a number");
  return x;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

TreeFamily generator_family(const Json& g) {
  const std::string where = "tree generator";
  const std::string type = require(g, "type", where).get<std::string>();
  if (type == "lattice") {
    reject_unknown(g, {"type", "S0", "factors", "periods", "models"}, where);
    const Vector S0 = vector_of(require(g, "S0", where), where + " S0");
    std::vector<Vector> factors, models;
    for (const auto& f : require(g, "factors", where)) factors.push_back(vector_of(f, where + " factors"));
    for (const auto& m : require(g, "models", where)) models.push_back(vector_of(m, where + " models"));
    return lattice_family(S0, factors, integer(require(g, "periods", where), where + " periods"), models);
  }
  if (type == "binomial" || type == "trinomial") {
    reject_unknown(g, {"type", "S0", "sigma", "dt", "periods"}, where);
    const Vector sigma = vector_of(require(g, "sigma", where), where + " sigma");
    if (sigma.size() > 2) throw std::invalid_argument(where + ": sigma is a value or a [lo, hi] pair");
    return volatility_lattice(number(require(g, "S0", where), where + " S0"), sigma(0), sigma(sigma.size() - 1),
                              number(require(g, "dt", where), where + " dt"),
                              integer(require(g, "periods", where), where + " periods"), type == "binomial" ? 2 : 3);
  }
  throw std::invalid_argument(where + ": unknown type '" + type + "'");
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw std::invalid_argument(origin + ":" + std::to_string(line) + ": malformed JSON");
  }
}

TreeFamily tree_family_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw std::invalid_argument("tree: document must be an object");
    if (j.contains("generator")) {
      reject_unknown(j, {"generator"}, "tree");
      return generator_family(j.at("generator"));
    }
    reject_unknown(j, {"nodes", "edges", "models", "require_nonnegative_S"}, "tree");
    TreeSpec spec;
    for (const auto& n : require(j, "nodes", "tree")) {
      reject_unknown(n, {"id", "time", "S"}, "tree node");
      TreeSpec::NodeSpec ns;
      ns.id = require(n, "id", "tree node").get<std::string>();
      ns.time = integer(require(n, "time", "tree node '" + ns.id + "'"), "tree node '" + ns.id + "' time");
      ns.S = vector_of(require(n, "S", "tree node '" + ns.id + "'"), "tree node '" + ns.id + "' S");
      spec.nodes.push_back(std::move(ns));
    }
    for (const auto& e : require(j, "edges", "tree")) {
      reject_unknown(e, {"from", "to"}, "tree edge");
      spec.edges.push_back({require(e, "from", "tree edge").get<std::string>(), require(e, "to", "tree edge").get<std::string>()});
    }
    for (const auto& m : require(j, "models", "tree")) {
      reject_unknown(m, {"name", "probabilities"}, "tree model");
      TreeSpec::ModelSpec ms;
      ms.name = require(m, "name", "tree model").get<std::string>();
      for (const auto& [key, p] : require(m, "probabilities", "tree model '" + ms.name + "'").items())
        ms.probabilities[key] = number(p, "model '" + ms.name + "' edge '" + key + "'");
      spec.models.push_back(std::move(ms));
    }
    if (j.contains("require_nonnegative_S")) spec.require_nonnegative_S = j.at("require_nonnegative_S").get<bool>();
    return build_tree_family(spec);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("tree: ") + e.what());
  }
}

Json tree_family_to_json(const TreeFamily& fam) {
  Json j;
  Json nodes = Json::array(), edges = Json::array(), models = Json::array();
  for (const auto& n : fam.nodes()) {
    nodes.push_back(Json{{"id", n.id}, {"time", n.time}, {"S", json_of(n.S)}});
    for (NodeIndex c : n.children) edges.push_back(Json{{"from", n.id}, {"to", fam.node(c).id}});
  }
  for (const auto& m : fam.models()) {
    Json probs = Json::object();
    for (NodeIndex v = 0; v < fam.size(); ++v) {
      const auto& ch = fam.node(v).children;
      for (std::size_t c = 0; c < ch.size(); ++c)
        probs[fam.node(v).id + "->" + fam.node(ch[c]).id] = m.transitions[v](static_cast<Index>(c));
    }
    models.push_back(Json{{"name", m.name}, {"probabilities", probs}});
  }
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["models"] = models;
  return j;
}

Claim claim_from_json(const Json& j) {
  try {
    reject_unknown(j, {"type", "strike", "strikes", "value", "weights", "values"}, "claim");
    Claim c;
    c.type = require(j, "type", "claim").get<std::string>();
    if (j.contains("strike")) c.strikes.push_back(number(j.at("strike"), "claim strike"));
    if (j.contains("strikes"))
      for (const auto& k : j.at("strikes")) c.strikes.push_back(number(k, "claim strikes"));
    if (j.contains("value")) c.level = number(j.at("value"), "claim value");
    if (j.contains("weights")) c.weights = vector_of(j.at("weights"), "claim weights");
    if (j.contains("values"))
      for (const auto& [id, v] : j.at("values").items()) c.table[id] = number(v, "claim value at '" + id + "'");
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("claim: ") + e.what());
  }
}

Json claim_to_json(const Claim& claim) {
  Json j{{"type", claim.type}};
  if (!claim.strikes.empty()) {
    Json ks = Json::array();
    for (double k : claim.strikes) ks.push_back(k);
    j["strikes"] = ks;
  }
  if (claim.type == "constant") j["value"] = claim.level;
  if (claim.weights.size() > 0) j["weights"] = json_of(claim.weights);
  if (claim.type == "table") {
    Json vals = Json::object();
    for (const auto& [id, v] : claim.table) vals[id] = v;
    j["values"] = vals;
  }
  return j;
}

namespace {

std::vector<double> node_values(const TreeFamily& fam, const Json& j, const std::string& where) {
  std::vector<double> out(fam.size(), 0.0);
  std::vector<bool> seen(fam.size(), false);
  for (const auto& [id, v] : j.items()) {
    const NodeIndex n = fam.find(id);
    if (n == kNoNode) throw std::invalid_argument(where + ": unknown node '" + id + "'");
    out[n] = number(v, where + " at '" + id + "'");
    seen[n] = true;
  }
  for (NodeIndex n = 0; n < fam.size(); ++n)
    if (!seen[n]) throw std::invalid_argument(where + ": no value for node '" + fam.node(n).id + "'");
  return out;
}

Json node_map(const TreeFamily& fam, const std::vector<double>& values) {
  Json j = Json::object();
  for (NodeIndex v = 0; v < fam.size(); ++v) j[fam.node(v).id] = values[v];
  return j;
}

}  // namespace

Deflator deflator_from_json(const TreeFamily& fam, const Json& j) {
  try {
    reject_unknown(j, {"values", "martingale_part", "decreasing_part"}, "deflator");
    if (j.contains("decreasing_part")) {
      if (j.contains("values") && !j.contains("martingale_part")) {
        auto total = node_values(fam, j.at("values"), "deflator values");
        auto dec = node_values(fam, j.at("decreasing_part"), "deflator decreasing_part");
        for (NodeIndex v = 0; v < fam.size(); ++v) total[v] /= dec[v];
        return Deflator::factored(fam, std::move(total), std::move(dec));
      }
      return Deflator::factored(fam, node_values(fam, require(j, "martingale_part", "deflator"), "deflator martingale_part"),
                                node_values(fam, j.at("decreasing_part"), "deflator decreasing_part"));
    }
    return Deflator(fam, node_values(fam, require(j, "values", "deflator"), "deflator values"));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("deflator: ") + e.what());
  }
}

Json deflator_to_json(const TreeFamily& fam, const Deflator& Y) {
  Json j{{"values", node_map(fam, Y.values())}};
  if (Y.is_factored()) {
    j["martingale_part"] = node_map(fam, Y.martingale_part());
    j["decreasing_part"] = node_map(fam, Y.decreasing_part());
  }
  return j;
}

KilledMeasure killed_measure_from_json(const TreeFamily& fam, const Json& j) {
  try {
    reject_unknown(j, {"nodes"}, "killed measure");
    KilledMeasure Q;
    Q.weights.assign(fam.size(), Vector(0));
    Q.cemetery.assign(fam.size(), 0.0);
    std::vector<bool> seen(fam.size(), false);
    for (const auto& [id, entry] : require(j, "nodes", "killed measure").items()) {
      const NodeIndex v = fam.find(id);
      if (v == kNoNode) throw std::invalid_argument("killed measure: unknown node '" + id + "'");
      reject_unknown(entry, {"weights", "cemetery"}, "killed measure node '" + id + "'");
      Q.weights[v] = vector_of(require(entry, "weights", id), "killed measure weights at '" + id + "'");
      Q.cemetery[v] = number(require(entry, "cemetery", id), "killed measure cemetery at '" + id + "'");
      seen[v] = true;
    }
    for (NodeIndex v = 0; v < fam.size(); ++v)
      if (!fam.is_terminal(v) && !seen[v])
        throw std::invalid_argument("killed measure: no weights for node '" + fam.node(v).id + "'");
    Q.validate(fam, 1e-9);
    return Q;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("killed measure: ") + e.what());
  }
}

Json killed_measure_to_json(const TreeFamily& fam, const KilledMeasure& Q) {
  Json nodes = Json::object();
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    if (fam.is_terminal(v)) continue;
    nodes[fam.node(v).id] = Json{{"weights", json_of(Q.weights[v])}, {"cemetery", Q.cemetery[v]}};
  }
  return Json{{"nodes", nodes}};
}

UncertaintySpec uncertainty_spec_from_json(const Json& j) {
  try {
    reject_unknown(j, {"S0", "drift", "sigma2", "sigma2_set", "horizon", "steps", "volatility"}, "spec");
    UncertaintySpec s;
    s.S0 = vector_of(require(j, "S0", "spec"), "spec S0");
    const Index d = s.S0.size();
    s.drift_lo = Vector::Zero(d);
    s.drift_hi = Vector::Zero(d);
    if (j.contains("drift")) {
      reject_unknown(j.at("drift"), {"lo", "hi"}, "spec drift");
      s.drift_lo = vector_of(require(j.at("drift"), "lo", "spec drift"), "spec drift lo");
      s.drift_hi = vector_of(require(j.at("drift"), "hi", "spec drift"), "spec drift hi");
    }
    if (j.contains("sigma2")) {
      reject_unknown(j.at("sigma2"), {"lo", "hi"}, "spec sigma2");
      s.sigma2_lo = vector_of(require(j.at("sigma2"), "lo", "spec sigma2"), "spec sigma2 lo");
      s.sigma2_hi = vector_of(require(j.at("sigma2"), "hi", "spec sigma2"), "spec sigma2 hi");
    }
    if (j.contains("sigma2_set")) {
      for (const auto& m : j.at("sigma2_set")) {
        if (m.is_number()) {
          s.sigma2_set.push_back(Matrix::Constant(1, 1, m.get<double>()));
          continue;
        }
        Matrix M(static_cast<Index>(m.size()), static_cast<Index>(m.size()));
        for (std::size_t r = 0; r < m.size(); ++r) {
          const Vector row = vector_of(m[r], "spec sigma2_set row");
          if (row.size() != M.cols()) throw std::invalid_argument("spec: sigma2_set matrices must be square");
          M.row(static_cast<Index>(r)) = row.transpose();
        }
        s.sigma2_set.push_back(M);
      }
    }
    if (!j.contains("sigma2") && !j.contains("sigma2_set"))
      throw std::invalid_argument("spec: one of 'sigma2' or 'sigma2_set' is required");
    if (j.contains("horizon")) s.horizon = number(j.at("horizon"), "spec horizon");
    if (j.contains("steps")) s.steps = integer(j.at("steps"), "spec steps");
    if (j.contains("volatility")) {
      const auto& v = j.at("volatility");
      if (v == "relative")
        s.relative_volatility = true;
      else if (v == "absolute")
        s.relative_volatility = false;
      else
        throw std::invalid_argument("spec: volatility must be \"relative\" or \"absolute\"");
    }
    if (s.sigma2_lo.size() == 0 && !s.sigma2_set.empty()) {
      s.sigma2_lo = Vector::Zero(d);
      s.sigma2_hi = Vector::Zero(d);
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
}

Json uncertainty_spec_to_json(const UncertaintySpec& spec) {
  Json j{{"S0", json_of(spec.S0)},
         {"drift", Json{{"lo", json_of(spec.drift_lo)}, {"hi", json_of(spec.drift_hi)}}}};
  if (spec.sigma2_set.empty()) {
    j["sigma2"] = Json{{"lo", json_of(spec.sigma2_lo)}, {"hi", json_of(spec.sigma2_hi)}};
  } else {
    Json set = Json::array();
    for (const auto& m : spec.sigma2_set) set.push_back(json_of(m));
    j["sigma2_set"] = set;
  }
  j["horizon"] = spec.horizon;
  j["steps"] = spec.steps;
  j["volatility"] = spec.relative_volatility ? "relative" : "absolute";
  return j;
}

Json na1_report_to_json(const TreeFamily& fam, const Na1Report& report) {
  Json j{{"holds", report.holds}};
  Json nodes = Json::array();
  for (const auto& r : report.records) {
    Json charged = Json::array();
    for (NodeIndex c : r.charged) charged.push_back(fam.node(c).id);
    Json rec{{"node", fam.node(r.node).id},
             {"model", fam.model(r.model).name},
             {"charged", charged},
             {"feasible", r.feasible},
             {"margin", std::isfinite(r.margin) ? Json(r.margin) : Json(nullptr)}};
    if (r.feasible) rec["weights"] = json_of(r.weights);
    nodes.push_back(rec);
  }
  j["nodes"] = nodes;
  if (report.holds) {
    Json measures = Json::array();
    for (std::size_t k = 0; k < report.measures.size(); ++k)
      measures.push_back(Json{{"model", fam.model(k).name}, {"measure", killed_measure_to_json(fam, report.measures[k])}});
    j["measures"] = measures;
  } else if (report.certificate) {
    const auto& c = *report.certificate;
    Json claim = Json::object();
    for (NodeIndex u : fam.terminal_nodes()) claim[fam.node(u).id] = c.claim[u];
    j["certificate"] = Json{{"node", fam.node(c.node).id},
                            {"model", fam.model(c.model).name},
                            {"quasi_sure", c.quasi_sure},
                            {"capital", c.capital},
                            {"h", json_of(c.h)},
                            {"claim", claim}};
  }
  return j;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string price_to_csv(const TreeFamily& fam, const std::vector<double>& Z, const HedgeStrategy& H) {
  const Index d = fam.dimension();
  std::string out = "node,parent,time";
  for (Index i = 1; i <= d; ++i) out += ",S_" + std::to_string(i);
  out += ",Z";
  for (Index i = 1; i <= d; ++i) out += ",H_" + std::to_string(i);
  out += "\n";
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const TreeNode& n = fam.node(v);
    out += n.id + "," + (n.parent == kNoNode ? std::string() : fam.node(n.parent).id) + "," + std::to_string(n.time);
    for (Index i = 0; i < d; ++i) out += "," + format_number(n.S(i));
    out += "," + format_number(Z[v]);
    for (Index i = 0; i < d; ++i) out += "," + format_number(H.H[v](i));
    out += "\n";
  }
  return out;
}

PriceTable price_from_csv(const TreeFamily& fam, const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw std::invalid_argument("price csv: empty file");
  const Index d = fam.dimension();
  const std::size_t width = 3 + 2 * static_cast<std::size_t>(d) + 1;
  if (split(lines[0], ',').size() != width) throw std::invalid_argument("price csv: header does not match the tree dimension");
  PriceTable t;
  t.Z.assign(fam.size(), 0.0);
  t.H.H.assign(fam.size(), Vector::Zero(d));
  t.H.residual.resize(fam.size());
  std::vector<bool> seen(fam.size(), false);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split(lines[l], ',');
    const std::string where = "price csv line " + std::to_string(l + 1);
    if (cells.size() != width) throw std::invalid_argument(where + ": expected " + std::to_string(width) + " columns");
    const NodeIndex v = fam.find(cells[0]);
    if (v == kNoNode) throw std::invalid_argument(where + ": unknown node '" + cells[0] + "'");
    t.Z[v] = parse_double(cells[3 + static_cast<std::size_t>(d)], where);
    for (Index i = 0; i < d; ++i) t.H.H[v](i) = parse_double(cells[4 + static_cast<std::size_t>(d + i)], where);
    seen[v] = true;
  }
  for (NodeIndex v = 0; v < fam.size(); ++v)
    if (!seen[v]) throw std::invalid_argument("price csv: no row for node '" + fam.node(v).id + "'");
  return t;
}

BsbSurface surface_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0] != "t,s,value,delta") throw std::invalid_argument("surface csv: expected header t,s,value,delta");
  std::vector<std::array<double, 4>> rows;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split(lines[l], ',');
    const std::string where = "surface csv line " + std::to_string(l + 1);
    if (cells.size() != 4) throw std::invalid_argument(where + ": expected 4 columns");
    rows.push_back({parse_double(cells[0], where), parse_double(cells[1], where), parse_double(cells[2], where),
                    parse_double(cells[3], where)});
  }
  BsbSurface s;
  for (const auto& r : rows) {
    if (s.t.empty() || r[0] != s.t.back()) s.t.push_back(r[0]);
    if (s.t.size() == 1) s.s.push_back(r[1]);
  }
  const std::size_t nt = s.t.size(), ns = s.s.size();
  if (nt < 2 || ns < 2 || rows.size() != nt * ns) throw std::invalid_argument("surface csv: rows do not form a grid");
  s.value.resize(static_cast<Index>(nt), static_cast<Index>(ns));
  s.delta.resize(static_cast<Index>(nt), static_cast<Index>(ns));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t n = i / ns, j = i % ns;
    if (rows[i][0] != s.t[n] || rows[i][1] != s.s[j]) throw std::invalid_argument("surface csv: rows do not form a grid");
    s.value(static_cast<Index>(n), static_cast<Index>(j)) = rows[i][2];
    s.delta(static_cast<Index>(n), static_cast<Index>(j)) = rows[i][3];
  }
  return s;
}

}  // namespace robusthedge
