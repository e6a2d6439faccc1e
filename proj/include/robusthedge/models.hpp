#pragma once

#include "robusthedge/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace robusthedge {

struct TreeNode {
  std::string id;
  int time = 0;
  Vector S;
  NodeIndex parent = kNoNode;
  std::vector<NodeIndex> children;
  /// Index of this node in the family it was derived from (itself for a
  /// freshly built family).
  NodeIndex origin = kNoNode;
};

/// One model P of the family: per node, a law over that node's children
/// (empty vector at terminal nodes). Zero entries encode null edges.
struct ModelLaw {
  std::string name;
  std::vector<Vector> transitions;
};

/// Node-level description consumed by build_tree_family.
struct TreeSpec {
  struct NodeSpec {
    std::string id;
    int time = 0;
    Vector S;
  };
  struct EdgeSpec {
    std::string from;
    std::string to;
  };
  struct ModelSpec {
    std::string name;
    std::map<std::string, double> probabilities;  // "from->to" -> p
  };
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  std::vector<ModelSpec> models;
  bool require_nonnegative_S = false;
};

/// Finite event tree plus a finite set of model laws. Node 0 is the root;
/// nodes are stored in breadth-first order. Immutable after construction.
class TreeFamily {
 public:
  TreeFamily(std::vector<TreeNode> nodes, std::vector<ModelLaw> models, bool require_nonnegative_S = false);

  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(NodeIndex v) const { return nodes_.at(v); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<ModelLaw>& models() const { return models_; }
  const ModelLaw& model(std::size_t k) const { return models_.at(k); }
  std::size_t model_count() const { return models_.size(); }
  Index dimension() const { return nodes_.front().S.size(); }
  int horizon() const { return horizon_; }
  bool is_terminal(NodeIndex v) const { return nodes_[v].children.empty(); }

  /// Nodes at a given time level, in storage order.
  std::vector<NodeIndex> level(int t) const;
  std::vector<NodeIndex> terminal_nodes() const;

  /// Probability of reaching v under model k (product of edge weights).
  double reach_probability(std::size_t k, NodeIndex v) const { return reach_[k][v]; }

  /// Node index by id, or kNoNode.
  NodeIndex find(const std::string& id) const;

  /// Children of v in the subtree rooted at `ancestor`?
  bool descends_from(NodeIndex v, NodeIndex ancestor) const;

  /// Root-to-v nodes, inclusive.
  std::vector<NodeIndex> ancestry(NodeIndex v) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<ModelLaw> models_;
  std::vector<std::vector<double>> reach_;
  std::map<std::string, NodeIndex> by_id_;
  int horizon_ = 0;
};

TreeFamily build_tree_family(const TreeSpec& spec);

/// Non-recombining lattice: every node has one child per factor vector,
/// S_child = S_parent .* factor. Each model gives one probability per factor.
TreeFamily lattice_family(const Vector& S0, const std::vector<Vector>& factors, int periods,
                          const std::vector<Vector>& model_probabilities);

/// 1-d lattice whose log-factors span a volatility interval. Binomial uses
/// factors e^{+-sigma_hi sqrt(dt)}; trinomial adds a middle factor 1 and one
/// model per endpoint of [sigma_lo, sigma_hi] matching the per-step variance.
TreeFamily volatility_lattice(double S0, double sigma_lo, double sigma_hi, double dt, int periods, int branching);

/// Children of v charged by at least one model that reaches v.
std::vector<NodeIndex> supports(const TreeFamily& fam, NodeIndex v);

/// Children of v charged by model k.
std::vector<NodeIndex> model_support(const TreeFamily& fam, std::size_t k, NodeIndex v);

/// Subtree rooted at v with times shifted to start at 0. Models with zero
/// mass at v are dropped; the remaining ones keep their one-step laws, which
/// is the exact Bayes conditioning on a tree.
TreeFamily condition(const TreeFamily& fam, NodeIndex v);

/// The family truncated after time t (nodes at t become terminal).
TreeFamily truncate(const TreeFamily& fam, int t);

/// A law on a conditioned subtree, as consumed by paste().
struct ConditionalLaw {
  TreeFamily subtree;
  ModelLaw law;
};

/// Original transitions of `prefix` before time s, kernel transitions from
/// each time-s node on. Time-s nodes absent from the kernel keep `prefix`.
ModelLaw paste(const TreeFamily& fam, const ModelLaw& prefix, int s,
               const std::map<NodeIndex, ConditionalLaw>& kernel);

/// Product of edge weights of `law` from the root to v.
double path_probability(const TreeFamily& fam, const ModelLaw& law, NodeIndex v);

/// E^P[g] for a function of the terminal nodes (indexed by node).
double expectation(const TreeFamily& fam, const ModelLaw& law, const std::vector<double>& terminal_values);

/// E^P[g | node] for every node at time t, computed by backward recursion.
std::vector<double> conditional_expectation(const TreeFamily& fam, const ModelLaw& law,
                                            const std::vector<double>& terminal_values, int t);

/// Validates a law for fam's shape.
void validate_law(const TreeFamily& fam, const ModelLaw& law);

}  // namespace robusthedge
