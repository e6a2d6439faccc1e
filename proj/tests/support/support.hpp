#pragma once

#include "robusthedge/deflator.hpp"
#include "robusthedge/models.hpp"
#include "robusthedge/superhedge.hpp"

#include <random>
#include <string>
#include <vector>

namespace testsupport {

using robusthedge::Deflator;
using robusthedge::ModelLaw;
using robusthedge::NodeIndex;
using robusthedge::TreeFamily;
using robusthedge::Vector;

struct FamilyOptions {
  int max_periods = 3;
  int max_children = 4;
  int max_models = 3;
  int dimension = 1;
  bool feasible = true;   // every model support strictly contains 0 in its hull
  double null_edge = 0.3; // chance a model leaves a non-core child uncharged
};

/// Random event tree plus model laws. With `feasible`, every node has a core
/// of dimension+1 children whose increments surround 0 and every model
/// charges the core.
TreeFamily random_family(std::mt19937_64& rng, const FamilyOptions& opt);

/// Random nonnegative terminal claim (vanilla on the basket or a table).
std::vector<double> random_claim(std::mt19937_64& rng, const TreeFamily& fam);

/// Random law with the tree's shape sharing the zero pattern of model k.
ModelLaw random_law_like(std::mt19937_64& rng, const TreeFamily& fam, std::size_t k);

/// Positive supermartingale deflator for `P`; exact martingale when
/// `martingale`.
Deflator random_deflator(std::mt19937_64& rng, const TreeFamily& fam, const ModelLaw& P, bool martingale);

/// Standard normal CDF by composite Simpson quadrature of the density.
double normal_cdf_quadrature(double x);

/// Black-Scholes call price using normal_cdf_quadrature.
double bs_call_oracle(double S, double K, double sigma, double T);

enum class Decision { kFeasible, kInfeasible, kAmbiguous };

/// Grid decision for the one-step problem "exists q > 0, sum q = 1,
/// sum q_c dS_c = 0" (d <= 2, <= 3 children). Feasible when 0 lies in the
/// hull of the images of grid points on the boundary of {q >= step};
/// infeasible when 0 is farther than step * max|dS| from conv(dS).
Decision grid_feasibility(const std::vector<Vector>& dS, double step);

std::string family_digest(const TreeFamily& fam);

}  // namespace testsupport
