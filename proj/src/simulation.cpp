#include "robusthedge/simulation.hpp"

#include "robusthedge/random.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace robusthedge {

void UncertaintySpec::validate() const {
  const Index d = S0.size();
  if (d == 0) throw std::invalid_argument("uncertainty spec: S0 is empty");
  if (!(horizon > 0.0)) throw std::invalid_argument("uncertainty spec: horizon must be positive");
  if (steps < 1) throw std::invalid_argument("uncertainty spec: steps must be at least 1");
  if (drift_lo.size() != d || drift_hi.size() != d)
    throw std::invalid_argument("uncertainty spec: drift box dimension mismatch");
  if (!drift_lo.allFinite() || !drift_hi.allFinite() || (drift_hi - drift_lo).minCoeff() < 0.0)
    throw std::invalid_argument("uncertainty spec: drift box must be bounded with lo <= hi");
  if (sigma2_set.empty()) {
    if (sigma2_lo.size() != d || sigma2_hi.size() != d)
      throw std::invalid_argument("uncertainty spec: volatility interval dimension mismatch");
    if (sigma2_lo.minCoeff() < 0.0 || (sigma2_hi - sigma2_lo).minCoeff() < 0.0)
      throw std::invalid_argument("uncertainty spec: need 0 <= sigma2_lo <= sigma2_hi");
  } else {
    for (const auto& m : sigma2_set) {
      if (m.rows() != d || m.cols() != d) throw std::invalid_argument("uncertainty spec: volatility matrix dimension mismatch");
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("uncertainty spec: volatility matrix not symmetric");
      Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
      if (eig.eigenvalues().minCoeff() < -1e-12) throw std::invalid_argument("uncertainty spec: volatility matrix not PSD");
    }
  }
}

bool UncertaintySpec::admits_volatility(const Matrix& sigma, double tol) const {
  const Matrix c = sigma * sigma.transpose();
  if (!sigma2_set.empty()) {
    for (const auto& m : sigma2_set)
      if ((c - m).cwiseAbs().maxCoeff() <= tol) return true;
    return false;
  }
  for (Index i = 0; i < c.rows(); ++i)
    for (Index j = 0; j < c.cols(); ++j) {
      if (i != j && std::abs(c(i, j)) > tol) return false;
      if (i == j && (c(i, i) < sigma2_lo(i) - tol || c(i, i) > sigma2_hi(i) + tol)) return false;
    }
  return true;
}

bool UncertaintySpec::admits_drift(const Vector& drift, double tol) const {
  return drift.size() == drift_lo.size() && (drift - drift_lo).minCoeff() >= -tol && (drift_hi - drift).minCoeff() >= -tol;
}

UncertaintySpec UncertaintySpec::scalar(double S0, double sigma2_lo, double sigma2_hi, double horizon, int steps) {
  UncertaintySpec s;
  s.S0 = Vector::Constant(1, S0);
  s.drift_lo = Vector::Zero(1);
  s.drift_hi = Vector::Zero(1);
  s.sigma2_lo = Vector::Constant(1, sigma2_lo);
  s.sigma2_hi = Vector::Constant(1, sigma2_hi);
  s.horizon = horizon;
  s.steps = steps;
  return s;
}

ControlPolicy constant_policy(Vector drift, Matrix sigma) {
  return [drift = std::move(drift), sigma = std::move(sigma)](const PolicyContext&) { return Control{drift, sigma}; };
}

ControlPolicy random_volatility_policy(const UncertaintySpec& spec, std::uint64_t seed) {
  if (!spec.sigma2_set.empty()) throw std::invalid_argument("random_volatility_policy: needs the interval form");
  const Vector lo = spec.sigma2_lo.cwiseSqrt();
  const Vector hi = spec.sigma2_hi.cwiseSqrt();
  return [lo, hi, seed](const PolicyContext& ctx) {
    const Index d = lo.size();
    Matrix sigma = Matrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
      const double u = hashed_uniform(seed, ctx.path_index, ctx.step * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(j));
      sigma(j, j) = lo(j) + u * (hi(j) - lo(j));
    }
    return Control{Vector::Zero(d), sigma};
  };
}

std::vector<Path> simulate_paths(const UncertaintySpec& spec, const ControlPolicy& policy, std::size_t n,
                                 std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("simulate_paths: need at least one path");
  const Index d = spec.dimension();
  const double dt = spec.dt();
  const double sqdt = std::sqrt(dt);
  std::vector<double> grid(static_cast<std::size_t>(spec.steps) + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = spec.horizon * static_cast<double>(i) / spec.steps;

  std::vector<std::vector<Vector>> points(n);
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_blocks(blocks, [&](std::size_t b) {
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      auto rng = stream_rng(seed, i);
      std::normal_distribution<double> normal;
      auto& pts = points[i];
      pts.reserve(grid.size());
      pts.push_back(spec.S0);
      Vector z(d);
      for (int k = 0; k < spec.steps; ++k) {
        const Vector& x = pts.back();
        PolicyContext ctx{i, static_cast<std::size_t>(k), grid[static_cast<std::size_t>(k)], &x, std::span<const Vector>(pts)};
        const Control c = policy(ctx);
        if (!spec.admits_drift(c.drift)) throw std::domain_error("simulate_paths: policy drift outside the drift set");
        if (c.sigma.rows() != d || !spec.admits_volatility(c.sigma))
          throw std::domain_error("simulate_paths: policy volatility outside the volatility set");
        for (Index j = 0; j < d; ++j) z(j) = normal(rng);
        const Vector shock = c.sigma * z * sqdt;
        pts.push_back(spec.relative_volatility ? Vector(x + c.drift * dt + x.cwiseProduct(shock))
                                               : Vector(x + c.drift * dt + shock));
      }
    }
  });
  std::vector<Path> out;
  out.reserve(n);
  for (auto& pts : points) out.push_back(Path::alive(grid, pts));
  return out;
}

}  // namespace robusthedge
