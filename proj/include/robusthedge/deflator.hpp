#pragma once

#include "robusthedge/models.hpp"
#include "robusthedge/pathspace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

/// Node-indexed strictly positive process, normalized so Y(root) = 1.
/// Optionally carries a factorization Y = martingale_part * D with D in
/// (0, 1] nonincreasing along every edge and D(root) = 1.
class Deflator {
 public:
  explicit Deflator(const TreeFamily& fam, std::vector<double> values);
  static Deflator factored(const TreeFamily& fam, std::vector<double> martingale_part, std::vector<double> decreasing);

  const std::vector<double>& values() const { return values_; }
  double operator[](NodeIndex v) const { return values_.at(v); }
  bool is_factored() const { return decreasing_.has_value(); }
  const std::vector<double>& martingale_part() const { return *martingale_; }
  const std::vector<double>& decreasing_part() const { return *decreasing_; }

 private:
  Deflator() = default;
  std::vector<double> values_;
  std::optional<std::vector<double>> martingale_;
  std::optional<std::vector<double>> decreasing_;
};

/// Node-indexed transition weights over children plus a cemetery mass.
struct KilledMeasure {
  std::vector<Vector> weights;
  std::vector<double> cemetery;

  /// Rejects negative entries and per-node totals away from 1.
  void validate(const TreeFamily& fam, double tol = 1e-12) const;

  /// Product of edge weights from the root to v (mass of {v, t < zeta}).
  double alive_mass(const TreeFamily& fam, NodeIndex v) const;
};

struct SlackReport {
  bool ok = true;
  double worst = 0.0;  // largest positive violation, 0 when none
  NodeIndex worst_node = kNoNode;
};

/// sum_c p_c Y_c <= Y_v (+1e-12) at every P-alive node.
SlackReport is_supermartingale_deflator(const TreeFamily& fam, const ModelLaw& P, const Deflator& Y);

/// Discrete exit measure: q_c = p_c Y_c / Y_v, cemetery = remaining mass.
KilledMeasure follmer_extend(const TreeFamily& fam, const ModelLaw& P, const Deflator& Y);

/// |Q(A, t < zeta) - E^P[Y_t 1_A]| for a set A of time-t nodes.
double density_identity_residual(const TreeFamily& fam, const ModelLaw& P, const Deflator& Y, const KilledMeasure& Q,
                                 int t, const std::vector<NodeIndex>& A);

/// Trajectories of the tree drawn under a killed measure; a cemetery draw
/// kills the path from the next grid point on.
std::vector<Path> sample_killed_paths(const TreeFamily& fam, const KilledMeasure& Q, std::size_t n, std::uint64_t seed);

/// Brownian motion started at x0 > 0 and absorbed (killed) at the first grid
/// point with a nonpositive value: the Q-dynamics of the inverse Bessel
/// deflator.
std::vector<Path> simulate_absorbed_brownian(double x0, double horizon, int steps, std::size_t n, std::uint64_t seed);

struct AnnouncementReport {
  /// times[path][n]: first grid time with coordinate in [0, eps_n); nullopt
  /// when it does not happen within the horizon.
  std::vector<std::vector<std::optional<double>>> times;
  std::size_t not_before_lifetime = 0;  // tau_n >= zeta on a killed path
  std::size_t non_monotone = 0;         // tau_n decreasing in n
  std::size_t killed_paths = 0;
  double max_final_gap = 0.0;           // max over killed paths of zeta - tau_last
};

/// Announcing sequence for the lifetime from level crossings of the first
/// coordinate. `levels` must be strictly decreasing and positive.
AnnouncementReport announce_lifetime(const std::vector<Path>& paths, const std::vector<double>& levels);

struct BesselReport {
  double horizon = 0.0;
  std::size_t samples = 0;
  double estimate = 0.0;          // MC estimate of E^P[1/R_T]
  double standard_error = 0.0;
  double oracle = 0.0;            // 2 Phi(1/sqrt(T)) - 1
  double z_score = 0.0;
  double cemetery_mass = 0.0;     // 1 - estimate
  double cemetery_oracle = 0.0;   // 2 (1 - Phi(1/sqrt(T)))
};

/// Inverse of a 3-d Bessel process started at 1: exact endpoint sampling of
/// |e_1 + W_T| and the deflator Y_T = 1 / R_T.
BesselReport inverse_bessel_demo(double horizon, std::size_t n, std::uint64_t seed);

/// CSV with columns quantity,estimate,oracle,standard_error,z_score.
std::string bessel_report_csv(const BesselReport& r);

}  // namespace robusthedge
