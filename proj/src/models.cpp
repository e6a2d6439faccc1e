#include "robusthedge/models.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace robusthedge {

namespace {

constexpr double kSumTol = 1e-12;

std::string edge_key(const std::string& from, const std::string& to) { return from + "->" + to; }

}  // namespace

void validate_law(const TreeFamily& fam, const ModelLaw& law) {
  if (law.transitions.size() != fam.size())
    throw std::invalid_argument("model '" + law.name + "': transition table size does not match the tree");
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto& t = law.transitions[v];
    const auto k = static_cast<Index>(fam.node(v).children.size());
    if (t.size() != k)
      throw std::invalid_argument("model '" + law.name + "': node '" + fam.node(v).id + "' has " +
                                  std::to_string(t.size()) + " probabilities for " + std::to_string(k) + " children");
    if (k == 0) continue;
    if (!t.allFinite() || t.minCoeff() < 0.0)
      throw std::invalid_argument("model '" + law.name + "': negative probability at node '" + fam.node(v).id + "'");
    if (std::abs(t.sum() - 1.0) > kSumTol)
      throw std::invalid_argument("model '" + law.name + "': probabilities at node '" + fam.node(v).id +
                                  "' do not sum to 1");
  }
}

TreeFamily::TreeFamily(std::vector<TreeNode> nodes, std::vector<ModelLaw> models, bool require_nonnegative_S)
    : nodes_(std::move(nodes)), models_(std::move(models)) {
  if (nodes_.empty()) throw std::invalid_argument("TreeFamily: no nodes");
  if (models_.empty()) throw std::invalid_argument("TreeFamily: at least one model is required");
  const TreeNode& root = nodes_.front();
  if (root.parent != kNoNode || root.time != 0) throw std::invalid_argument("TreeFamily: node 0 must be a root at time 0");
  const Index d = root.S.size();
  if (d == 0) throw std::invalid_argument("TreeFamily: asset dimension must be positive");

  std::vector<bool> seen(nodes_.size(), false);
  seen[0] = true;
  for (NodeIndex v = 0; v < nodes_.size(); ++v) {
    const TreeNode& n = nodes_[v];
    if (n.S.size() != d || !n.S.allFinite())
      throw std::invalid_argument("TreeFamily: node '" + n.id + "' has an invalid asset value");
    if (require_nonnegative_S && n.S.minCoeff() < 0.0)
      throw std::invalid_argument("TreeFamily: node '" + n.id + "' has a negative asset value");
    if (v > 0 && (n.parent == kNoNode || n.parent >= v))
      throw std::invalid_argument("TreeFamily: node '" + n.id + "' must come after its parent");
    if (!by_id_.emplace(n.id, v).second) throw std::invalid_argument("TreeFamily: duplicate node id '" + n.id + "'");
    for (NodeIndex c : n.children) {
      if (c >= nodes_.size() || nodes_[c].parent != v)
        throw std::invalid_argument("TreeFamily: inconsistent edge at node '" + n.id + "'");
      if (nodes_[c].time != n.time + 1)
        throw std::invalid_argument("TreeFamily: child of '" + n.id + "' is not on the next time level");
      seen[c] = true;
    }
    horizon_ = std::max(horizon_, n.time);
  }
  for (NodeIndex v = 0; v < nodes_.size(); ++v) {
    if (!seen[v]) throw std::invalid_argument("TreeFamily: node '" + nodes_[v].id + "' is disconnected");
    if (nodes_[v].origin == kNoNode) nodes_[v].origin = v;
  }
  for (const auto& n : nodes_)
    if (n.children.empty() && n.time < horizon_)
      throw std::invalid_argument("TreeFamily: dangling node '" + n.id + "' ends before the horizon");

  reach_.assign(models_.size(), std::vector<double>(nodes_.size(), 0.0));
  for (std::size_t k = 0; k < models_.size(); ++k) {
    validate_law(*this, models_[k]);
    reach_[k][0] = 1.0;
    for (NodeIndex v = 0; v < nodes_.size(); ++v)
      for (std::size_t c = 0; c < nodes_[v].children.size(); ++c)
        reach_[k][nodes_[v].children[c]] = reach_[k][v] * models_[k].transitions[v](static_cast<Index>(c));
  }
}

std::vector<NodeIndex> TreeFamily::level(int t) const {
  std::vector<NodeIndex> out;
  for (NodeIndex v = 0; v < nodes_.size(); ++v)
    if (nodes_[v].time == t) out.push_back(v);
  return out;
}

std::vector<NodeIndex> TreeFamily::terminal_nodes() const {
  std::vector<NodeIndex> out;
  for (NodeIndex v = 0; v < nodes_.size(); ++v)
    if (nodes_[v].children.empty()) out.push_back(v);
  return out;
}

NodeIndex TreeFamily::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? kNoNode : it->second;
}

bool TreeFamily::descends_from(NodeIndex v, NodeIndex ancestor) const {
  for (NodeIndex u = v; u != kNoNode; u = nodes_[u].parent)
    if (u == ancestor) return true;
  return false;
}

std::vector<NodeIndex> TreeFamily::ancestry(NodeIndex v) const {
  std::vector<NodeIndex> out;
  for (NodeIndex u = v; u != kNoNode; u = nodes_[u].parent) out.push_back(u);
  return {out.rbegin(), out.rend()};
}

TreeFamily build_tree_family(const TreeSpec& spec) {
  if (spec.nodes.empty()) throw std::invalid_argument("tree: no nodes");
  std::map<std::string, std::size_t> spec_index;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    if (!spec_index.emplace(spec.nodes[i].id, i).second)
      throw std::invalid_argument("tree: duplicate node id '" + spec.nodes[i].id + "'");

  std::vector<std::vector<std::size_t>> kids(spec.nodes.size());
  std::vector<int> parent(spec.nodes.size(), -1);
  for (const auto& e : spec.edges) {
    auto f = spec_index.find(e.from);
    auto t = spec_index.find(e.to);
    if (f == spec_index.end() || t == spec_index.end())
      throw std::invalid_argument("tree: edge " + edge_key(e.from, e.to) + " references an unknown node");
    if (parent[t->second] >= 0) throw std::invalid_argument("tree: node '" + e.to + "' has two parents");
    parent[t->second] = static_cast<int>(f->second);
    kids[f->second].push_back(t->second);
  }
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    if (parent[i] < 0) roots.push_back(i);
  if (roots.size() != 1) throw std::invalid_argument("tree: expected exactly one root, found " + std::to_string(roots.size()));

  // Breadth-first renumbering.
  std::vector<TreeNode> nodes;
  std::vector<std::size_t> order;
  std::deque<std::pair<std::size_t, NodeIndex>> queue{{roots.front(), kNoNode}};
  while (!queue.empty()) {
    auto [i, par] = queue.front();
    queue.pop_front();
    const NodeIndex v = nodes.size();
    TreeNode n;
    n.id = spec.nodes[i].id;
    n.time = spec.nodes[i].time;
    n.S = spec.nodes[i].S;
    n.parent = par;
    if (par != kNoNode) nodes[par].children.push_back(v);
    nodes.push_back(std::move(n));
    order.push_back(i);
    for (std::size_t c : kids[i]) queue.emplace_back(c, v);
  }
  if (nodes.size() != spec.nodes.size()) throw std::invalid_argument("tree: graph is not connected");

  std::set<std::string> known_edges;
  for (const auto& e : spec.edges) known_edges.insert(edge_key(e.from, e.to));
  std::vector<ModelLaw> models;
  for (const auto& m : spec.models) {
    for (const auto& [key, p] : m.probabilities) {
      if (!known_edges.count(key)) throw std::invalid_argument("model '" + m.name + "': unknown edge '" + key + "'");
      if (!(p >= 0.0)) throw std::invalid_argument("model '" + m.name + "': negative probability on '" + key + "'");
    }
    ModelLaw law;
    law.name = m.name;
    law.transitions.resize(nodes.size());
    std::vector<double> reach(nodes.size(), 0.0);
    reach[0] = 1.0;
    for (NodeIndex v = 0; v < nodes.size(); ++v) {
      const auto& ch = nodes[v].children;
      Vector t = Vector::Zero(static_cast<Index>(ch.size()));
      for (std::size_t c = 0; c < ch.size(); ++c) {
        auto it = m.probabilities.find(edge_key(nodes[v].id, nodes[ch[c]].id));
        if (it != m.probabilities.end()) t(static_cast<Index>(c)) = it->second;
      }
      // Nodes the model never reaches may be omitted from its table.
      if (!ch.empty() && t.sum() == 0.0 && reach[v] == 0.0) t.setConstant(1.0 / static_cast<double>(ch.size()));
      for (std::size_t c = 0; c < ch.size(); ++c) reach[ch[c]] = reach[v] * t(static_cast<Index>(c));
      law.transitions[v] = std::move(t);
    }
    models.push_back(std::move(law));
  }
  return TreeFamily(std::move(nodes), std::move(models), spec.require_nonnegative_S);
}

TreeFamily lattice_family(const Vector& S0, const std::vector<Vector>& factors, int periods,
                          const std::vector<Vector>& model_probabilities) {
  if (periods < 0) throw std::invalid_argument("lattice: negative period count");
  if (factors.empty()) throw std::invalid_argument("lattice: no factors");
  for (const auto& f : factors)
    if (f.size() != S0.size()) throw std::invalid_argument("lattice: factor dimension does not match S0");
  const auto k = static_cast<Index>(factors.size());
  for (const auto& p : model_probabilities)
    if (p.size() != k) throw std::invalid_argument("lattice: model must give one probability per factor");

  std::vector<TreeNode> nodes;
  nodes.push_back(TreeNode{"0", 0, S0, kNoNode, {}, kNoNode});
  for (NodeIndex v = 0; v < nodes.size(); ++v) {
    if (nodes[v].time == periods) continue;
    for (Index c = 0; c < k; ++c) {
      TreeNode n;
      n.id = nodes[v].id + "." + std::to_string(c);
      n.time = nodes[v].time + 1;
      n.S = nodes[v].S.cwiseProduct(factors[static_cast<std::size_t>(c)]);
      n.parent = v;
      nodes[v].children.push_back(nodes.size());
      nodes.push_back(std::move(n));
    }
  }
  std::vector<ModelLaw> models;
  for (std::size_t m = 0; m < model_probabilities.size(); ++m) {
    ModelLaw law{"P" + std::to_string(m + 1), {}};
    for (const auto& n : nodes)
      law.transitions.push_back(n.children.empty() ? Vector() : model_probabilities[m]);
    models.push_back(std::move(law));
  }
  return TreeFamily(std::move(nodes), std::move(models));
}

TreeFamily volatility_lattice(double S0, double sigma_lo, double sigma_hi, double dt, int periods, int branching) {
  if (!(sigma_lo > 0.0) || sigma_hi < sigma_lo || !(dt > 0.0))
    throw std::invalid_argument("volatility_lattice: need 0 < sigma_lo <= sigma_hi and dt > 0");
  const double h = sigma_hi * std::sqrt(dt);
  const double up = std::exp(h), down = std::exp(-h);
  Vector s0(1);
  s0 << S0;
  auto factor = [](double f) {
    Vector v(1);
    v << f;
    return v;
  };
  if (branching == 2) {
    const double pu = (1.0 - down) / (up - down);
    Vector p(2);
    p << pu, 1.0 - pu;
    return lattice_family(s0, {factor(up), factor(down)}, periods, {p});
  }
  if (branching == 3) {
    std::vector<Vector> probs;
    for (double sigma : {sigma_lo, sigma_hi}) {
      const double w = (sigma * sigma) / (sigma_hi * sigma_hi);
      // p_u (up - 1) = p_d (1 - down), p_u + p_d = w
      const double pu = w * (1.0 - down) / ((up - 1.0) + (1.0 - down));
      Vector p(3);
      p << pu, 1.0 - w, w - pu;
      probs.push_back(p);
    }
    if (sigma_lo == sigma_hi) probs.pop_back();
    return lattice_family(s0, {factor(up), factor(1.0), factor(down)}, periods, probs);
  }
  throw std::invalid_argument("volatility_lattice: branching must be 2 or 3");
}

std::vector<NodeIndex> supports(const TreeFamily& fam, NodeIndex v) {
  std::vector<NodeIndex> out;
  const auto& ch = fam.node(v).children;
  for (std::size_t c = 0; c < ch.size(); ++c) {
    for (std::size_t k = 0; k < fam.model_count(); ++k) {
      if (fam.reach_probability(k, v) > 0.0 && fam.model(k).transitions[v](static_cast<Index>(c)) > 0.0) {
        out.push_back(ch[c]);
        break;
      }
    }
  }
  return out;
}

std::vector<NodeIndex> model_support(const TreeFamily& fam, std::size_t k, NodeIndex v) {
  std::vector<NodeIndex> out;
  const auto& ch = fam.node(v).children;
  for (std::size_t c = 0; c < ch.size(); ++c)
    if (fam.model(k).transitions[v](static_cast<Index>(c)) > 0.0) out.push_back(ch[c]);
  return out;
}

TreeFamily condition(const TreeFamily& fam, NodeIndex v) {
  if (v >= fam.size()) throw std::invalid_argument("condition: unknown node");
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < fam.model_count(); ++k)
    if (fam.reach_probability(k, v) > 0.0) keep.push_back(k);
  if (keep.empty()) throw std::invalid_argument("condition: node '" + fam.node(v).id + "' has zero mass under every model");

  const int t0 = fam.node(v).time;
  std::vector<TreeNode> nodes;
  std::vector<NodeIndex> source;
  nodes.push_back(TreeNode{fam.node(v).id, 0, fam.node(v).S, kNoNode, {}, v});
  source.push_back(v);
  for (NodeIndex i = 0; i < nodes.size(); ++i) {
    for (NodeIndex c : fam.node(source[i]).children) {
      TreeNode n{fam.node(c).id, fam.node(c).time - t0, fam.node(c).S, i, {}, c};
      nodes[i].children.push_back(nodes.size());
      nodes.push_back(std::move(n));
      source.push_back(c);
    }
  }
  std::vector<ModelLaw> models;
  for (std::size_t k : keep) {
    ModelLaw law{fam.model(k).name, {}};
    for (NodeIndex s : source) law.transitions.push_back(fam.model(k).transitions[s]);
    models.push_back(std::move(law));
  }
  return TreeFamily(std::move(nodes), std::move(models));
}

TreeFamily truncate(const TreeFamily& fam, int t) {
  if (t < 0) throw std::invalid_argument("truncate: negative time");
  std::vector<TreeNode> nodes;
  std::vector<NodeIndex> remap(fam.size(), kNoNode);
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const TreeNode& src = fam.node(v);
    if (src.time > t) continue;
    remap[v] = nodes.size();
    TreeNode n{src.id, src.time, src.S, src.parent == kNoNode ? kNoNode : remap[src.parent], {}, v};
    if (n.parent != kNoNode) nodes[n.parent].children.push_back(nodes.size());
    nodes.push_back(std::move(n));
  }
  std::vector<ModelLaw> models;
  for (const auto& m : fam.models()) {
    ModelLaw law{m.name, {}};
    for (const auto& n : nodes) law.transitions.push_back(n.children.empty() ? Vector() : m.transitions[n.origin]);
    models.push_back(std::move(law));
  }
  return TreeFamily(std::move(nodes), std::move(models));
}

ModelLaw paste(const TreeFamily& fam, const ModelLaw& prefix, int s, const std::map<NodeIndex, ConditionalLaw>& kernel) {
  validate_law(fam, prefix);
  ModelLaw out{prefix.name + "*", prefix.transitions};
  for (const auto& [v, entry] : kernel) {
    if (v >= fam.size() || fam.node(v).time != s)
      throw std::invalid_argument("paste: kernel key is not a time-" + std::to_string(s) + " node");
    const TreeFamily& sub = entry.subtree;
    if (sub.node(0).origin != v || sub.node(0).id != fam.node(v).id)
      throw std::invalid_argument("paste: kernel entry for '" + fam.node(v).id + "' references a foreign subtree");
    for (NodeIndex i = 0; i < sub.size(); ++i) {
      const NodeIndex o = sub.node(i).origin;
      if (o >= fam.size() || fam.node(o).id != sub.node(i).id || fam.node(o).time != sub.node(i).time + s ||
          fam.node(o).children.size() != sub.node(i).children.size() || !fam.descends_from(o, v))
        throw std::invalid_argument("paste: kernel entry for '" + fam.node(v).id + "' references a foreign subtree");
    }
    validate_law(sub, entry.law);
    for (NodeIndex i = 0; i < sub.size(); ++i) out.transitions[sub.node(i).origin] = entry.law.transitions[i];
  }
  return out;
}

double path_probability(const TreeFamily& fam, const ModelLaw& law, NodeIndex v) {
  double p = 1.0;
  for (NodeIndex u = v; fam.node(u).parent != kNoNode; u = fam.node(u).parent) {
    const NodeIndex par = fam.node(u).parent;
    const auto& ch = fam.node(par).children;
    const auto c = static_cast<Index>(std::find(ch.begin(), ch.end(), u) - ch.begin());
    p *= law.transitions[par](c);
  }
  return p;
}

double expectation(const TreeFamily& fam, const ModelLaw& law, const std::vector<double>& terminal_values) {
  double e = 0.0;
  for (NodeIndex v : fam.terminal_nodes()) e += path_probability(fam, law, v) * terminal_values.at(v);
  return e;
}

std::vector<double> conditional_expectation(const TreeFamily& fam, const ModelLaw& law,
                                            const std::vector<double>& terminal_values, int t) {
  std::vector<double> value(fam.size(), 0.0);
  for (NodeIndex v = fam.size(); v-- > 0;) {
    const auto& n = fam.node(v);
    if (n.children.empty()) {
      value[v] = terminal_values.at(v);
      continue;
    }
    double e = 0.0;
    for (std::size_t c = 0; c < n.children.size(); ++c)
      e += law.transitions[v](static_cast<Index>(c)) * value[n.children[c]];
    value[v] = e;
  }
  std::vector<double> out;
  for (NodeIndex v : fam.level(t)) out.push_back(value[v]);
  return out;
}

}  // namespace robusthedge
