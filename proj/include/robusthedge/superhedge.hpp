#pragma once

#include "robusthedge/deflator.hpp"
#include "robusthedge/models.hpp"
#include "robusthedge/simulation.hpp"

#include <map>
#include <string>
#include <vector>

namespace robusthedge {

/// Nonnegative claim on the terminal state. Vanilla types act on the basket
/// weights . S (weights default to all ones); `table` is keyed by node id.
struct Claim {
  std::string type = "constant";  // call, put, straddle, digital, butterfly, constant, table
  std::vector<double> strikes;
  double level = 0.0;
  Vector weights;
  std::map<std::string, double> table;

  static Claim call(double K) { return Claim{"call", {K}, 0.0, {}, {}}; }
  static Claim put(double K) { return Claim{"put", {K}, 0.0, {}, {}}; }
  static Claim constant(double c) { return Claim{"constant", {}, c, {}, {}}; }

  double of_state(const Vector& S) const;
  double of_scalar(double s) const;
  double of_node(const TreeNode& node) const;
  void validate() const;
  bool operator==(const Claim& other) const;
};

/// Parses `call:K`, `put:K`, `straddle:K`, `digital:K`,
/// `butterfly:K1:K2:K3`, `constant:c`.
Claim parse_payoff(const std::string& text);
std::string payoff_to_string(const Claim& claim);

/// Payoff at every terminal node (0 elsewhere). Rejects negative values.
std::vector<double> terminal_payoff(const TreeFamily& fam, const Claim& claim);

struct TreeValue {
  std::vector<double> Z;
  KilledMeasure optimizer;  // maximizing weights of the node problems
  std::vector<std::string> warnings;

  double root() const { return Z.front(); }
};

/// Backward recursion Z_v = sup{ sum_c q_c Z_c : q >= 0, sum q <= 1,
/// sum_c q_c (S_c - S_v) = 0 } over the quasi-sure support of each node;
/// the missing mass sits on the cemetery with value 0.
TreeValue sublinear_price_tree(const TreeFamily& fam, const std::vector<double>& terminal_values);
TreeValue sublinear_price_tree(const TreeFamily& fam, const Claim& claim);

/// Node problem on its own: value and maximizing weights over `children`.
double node_sup(const Vector& S_v, const std::vector<Vector>& children, const std::vector<double>& values,
                Vector* weights = nullptr);

/// Brute-force dual oracle: per node, simplex grid points of step
/// `grid_step` on every face of the support, projected onto the martingale
/// constraint without changing their mass.
double dual_enumerate(const TreeFamily& fam, const std::vector<double>& terminal_values, double grid_step);
double dual_enumerate(const TreeFamily& fam, const Claim& claim, double grid_step);

struct HedgeStrategy {
  std::vector<Vector> H;         // per node; zero at terminal nodes
  std::vector<Vector> residual;  // per node and child: Z_v + H.dS_c - Z_c
};

/// Per node the least-norm minimizer h of max(0, max_c Z_c - h.dS_c) over
/// the quasi-sure support (least L1 norm when d > 1).
HedgeStrategy extract_strategy_envelope(const TreeFamily& fam, const std::vector<double>& Z);

struct CovariationEstimate {
  Matrix cS;
  Vector cSZ;
  double dA = 0.0;
};

struct CovariationStrategy {
  HedgeStrategy strategy;
  std::vector<CovariationEstimate> estimates;
};

/// H = c^{SZ} pinv(c^S) from one-step covariances under Q given survival;
/// zero where Q does not charge the node.
CovariationStrategy extract_strategy_covariation(const TreeFamily& fam, const std::vector<double>& Z,
                                                 const KilledMeasure& Q);

/// sum_c q_c Z_c <= Z_v (+ tol max(1, |Z_v|)) at every Q-charged node.
SlackReport supermartingale_check(const TreeFamily& fam, const std::vector<double>& Z, const KilledMeasure& Q,
                                  double tol = 1e-12);

/// |one-pass root value - value of the recursion split at time t|.
double dpp_check(const TreeFamily& fam, const std::vector<double>& terminal_values, int t);
double dpp_check(const TreeFamily& fam, const Claim& claim, int t);

struct TreeVerification {
  std::size_t terminal_checked = 0;
  std::size_t violations = 0;
  double min_slack = kInfinity;
  NodeIndex worst_node = kNoNode;
  bool residual_monotone = true;   // Z - Z_0 - (H.S) nonincreasing along edges
  double worst_residual_increase = 0.0;
};

/// Exact check x + sum H.dS >= f at every quasi-sure reachable terminal node.
/// The residual monotonicity test runs when Z is given.
TreeVerification verify_superhedge(const TreeFamily& fam, double x, const HedgeStrategy& H,
                                   const std::vector<double>& terminal_values, double tol = 1e-10,
                                   const std::vector<double>* Z = nullptr);

enum class Stepper { kImplicit, kExplicit };

struct BsbGrid {
  int nt = 200;
  int ns = 200;
  double smax = 0.0;
};

/// v(t, s) on t_n = n dt (calendar time), s_j = j ds.
struct BsbSurface {
  std::vector<double> t;
  std::vector<double> s;
  Matrix value;  // (nt+1) x (ns+1)
  Matrix delta;
  std::size_t hi_selections = 0;  // grid points where sigma_hi was chosen

  double price_at(double S) const;
  double value_at(double time, double S) const;
  double delta_at(double time, double S) const;
};

/// Worst-case volatility equation v_t + 1/2 sup sigma^2 s^2 v_ss = 0 on a
/// uniform grid; v(t, 0) = payoff(0), v_ss = 0 at smax.
BsbSurface bsb_solve(const UncertaintySpec& spec, const Claim& claim, const BsbGrid& grid,
                     Stepper stepper = Stepper::kImplicit);

/// Closed-form Black-Scholes call with zero rates.
double black_scholes_call(double S, double K, double sigma, double T);

std::string surface_to_csv(const BsbSurface& surface);

struct PathVerification {
  std::size_t paths = 0;
  std::size_t violations = 0;
  double min_slack = kInfinity;
  double mean_slack = 0.0;
  double epsilon = 0.0;
  double violation_rate() const { return paths ? static_cast<double>(violations) / paths : 0.0; }
};

/// Discrete wealth x + sum delta(t_k, S_k) (S_{k+1} - S_k) along each path
/// against payoff(S_T) - epsilon, deltas interpolated bilinearly.
PathVerification verify_superhedge(const std::vector<Path>& paths, double x, const BsbSurface& surface,
                                   const Claim& claim, double epsilon);

}  // namespace robusthedge
