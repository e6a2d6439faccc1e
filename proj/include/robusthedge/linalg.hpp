#pragma once

#include "robusthedge/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace robusthedge {

/// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix.
///
/// Eigenvalues above `tol * lambda_max` are inverted, the rest are zeroed.
/// Rejects input that is not symmetric within `tol` (relative to its largest
/// entry).
template <typename Derived>
MatrixX<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& m,
                                       typename Derived::Scalar tol = typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw std::invalid_argument("pinv: matrix must be square");
  const Index n = m.rows();
  if (n == 0) return MatrixX<Scalar>(0, 0);
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("pinv: matrix is not symmetric");

  const MatrixX<Scalar> sym = (m + m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(sym);
  const VectorX<Scalar>& lambda = eig.eigenvalues();
  const Scalar lambda_max = lambda.cwiseAbs().maxCoeff();
  VectorX<Scalar> inv = VectorX<Scalar>::Zero(n);
  if (lambda_max > Scalar(0)) {
    for (Index i = 0; i < n; ++i)
      if (std::abs(lambda(i)) > tol * lambda_max) inv(i) = Scalar(1) / lambda(i);
  }
  const MatrixX<Scalar>& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

/// Largest deviation over the four Penrose identities.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar penrose_residual(const Eigen::MatrixBase<DerivedA>& m,
                                           const Eigen::MatrixBase<DerivedB>& p) {
  using Scalar = typename DerivedA::Scalar;
  if (m.size() == 0) return Scalar(0);
  const MatrixX<Scalar> mp = m * p;
  const MatrixX<Scalar> pm = p * m;
  Scalar r = (mp * m - m).cwiseAbs().maxCoeff();
  r = std::max(r, (pm * p - p).cwiseAbs().maxCoeff());
  r = std::max(r, (mp.transpose() - mp).cwiseAbs().maxCoeff());
  r = std::max(r, (pm.transpose() - pm).cwiseAbs().maxCoeff());
  return r;
}

}  // namespace robusthedge
