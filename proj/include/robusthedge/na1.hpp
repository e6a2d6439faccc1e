#pragma once

#include "robusthedge/deflator.hpp"
#include "robusthedge/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

/// Optimal value of  max t  s.t.  q_c >= t, sum q = 1, sum q_c S_c = S_v,
/// together with the maximizer. margin is -inf when the equality system has
/// no nonnegative solution.
struct FeasibilityResult {
  bool feasible = false;
  double margin = -kInfinity;
  Vector weights;
};

inline constexpr double kFeasibilityThreshold = 1e-10;

FeasibilityResult node_feasibility_lp(const Vector& S_v, const std::vector<Vector>& children);

/// Strictly positive martingale weights over `children`, or nullopt.
std::optional<Vector> node_feasibility(const Vector& S_v, const std::vector<Vector>& children);

/// One-step strategy "hold h from `node` to the next date" started from zero
/// capital, whose terminal wealth is the claim f.
struct ArbitrageCertificate {
  NodeIndex node = kNoNode;
  std::size_t model = 0;     // model whose support failed first
  bool quasi_sure = true;    // wealth >= 0 on the union support of the node
  Vector h;
  std::vector<double> claim;  // per node; nonzero only at terminal nodes
  double capital = 0.0;
};

struct NodeRecord {
  NodeIndex node = kNoNode;
  std::size_t model = 0;
  std::vector<NodeIndex> charged;
  bool feasible = false;
  double margin = 0.0;
  Vector weights;  // over `charged`, empty when infeasible
};

struct Na1Report {
  bool holds = false;
  std::vector<NodeRecord> records;
  std::vector<KilledMeasure> measures;  // one per model when holds
  std::optional<ArbitrageCertificate> certificate;
};

Na1Report na1_check(const TreeFamily& fam);

/// Children the certificate must cover: the union support for quasi-sure
/// certificates, the failing model's charged children otherwise.
std::vector<NodeIndex> certificate_support(const TreeFamily& fam, const ArbitrageCertificate& cert);

bool certificate_validate(const TreeFamily& fam, const ArbitrageCertificate& cert);

/// Largest |sum_c q_c S_c + q_cemetery S_v - S_v| over nodes charged by Q.
double martingale_defect(const TreeFamily& fam, const KilledMeasure& Q);

}  // namespace robusthedge
