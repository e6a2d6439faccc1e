#pragma once

#include "robusthedge/pathspace.hpp"
#include "robusthedge/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace robusthedge {

/// Canonical Ito-uncertainty class: drift in a box, sigma sigma^T in a
/// per-component interval (diagonal) or a finite set of PSD matrices.
struct UncertaintySpec {
  Vector S0;
  Vector drift_lo;
  Vector drift_hi;
  Vector sigma2_lo;                   // interval form, per component
  Vector sigma2_hi;
  std::vector<Matrix> sigma2_set;     // finite-set form (used when non-empty)
  double horizon = 1.0;
  int steps = 100;
  /// Diffusion coefficient diag(S) sigma instead of sigma, so the volatility
  /// set bounds d<S^i>/(S^i)^2 dt. The drift box is absolute either way.
  bool relative_volatility = true;

  Index dimension() const { return S0.size(); }
  double dt() const { return horizon / steps; }
  void validate() const;

  /// Does sigma sigma^T lie in the volatility set (within tol)?
  bool admits_volatility(const Matrix& sigma, double tol = 1e-9) const;
  bool admits_drift(const Vector& drift, double tol = 1e-12) const;

  /// 1-d convenience constructor: zero drift box, interval [lo, hi] for sigma^2.
  static UncertaintySpec scalar(double S0, double sigma2_lo, double sigma2_hi, double horizon, int steps);
};

struct Control {
  Vector drift;
  Matrix sigma;
};

/// What a policy may look at when choosing the next control.
struct PolicyContext {
  std::size_t path_index = 0;
  std::size_t step = 0;
  double time = 0.0;
  const Vector* state = nullptr;
  std::span<const Vector> history;
};

using ControlPolicy = std::function<Control(const PolicyContext&)>;

ControlPolicy constant_policy(Vector drift, Matrix sigma);

/// Zero drift; per step and per path an independent volatility drawn
/// uniformly from [sqrt(sigma2_lo), sqrt(sigma2_hi)] componentwise. Pure
/// function of (seed, path, step).
ControlPolicy random_volatility_policy(const UncertaintySpec& spec, std::uint64_t seed);

/// Euler-Maruyama paths on the spec grid. Path i uses its own RNG stream, so
/// output is independent of the number of worker threads.
std::vector<Path> simulate_paths(const UncertaintySpec& spec, const ControlPolicy& policy, std::size_t n,
                                 std::uint64_t seed);

}  // namespace robusthedge
