#pragma once

#include "robusthedge/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace robusthedge {

/// maximize c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
template <typename Scalar>
struct LinearProgram {
  VectorX<Scalar> objective;
  MatrixX<Scalar> eq_matrix;
  VectorX<Scalar> eq_rhs;
  MatrixX<Scalar> ub_matrix;
  VectorX<Scalar> ub_rhs;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  VectorX<Scalar> x;
  Scalar value = Scalar(0);
  int pivots = 0;
};

namespace detail {

// Dense tableau simplex with Bland's rule. Rows of `tab` are B^{-1}[A | b].
template <typename Scalar>
class Tableau {
 public:
  Tableau(MatrixX<Scalar> tab, std::vector<Index> basis, Scalar tol)
      : tab_(std::move(tab)), basis_(std::move(basis)), tol_(tol) {}

  // Returns false when unbounded.
  bool optimize(const VectorX<Scalar>& cost, const std::vector<bool>& allowed, int& pivots) {
    const Index cols = tab_.cols() - 1;
    for (int guard = 0; guard < 100000; ++guard) {
      Index entering = -1;
      for (Index j = 0; j < cols; ++j) {
        if (!allowed[j]) continue;
        if (reduced_cost(cost, j) < -tol_) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;
      Index leaving = -1;
      Scalar best = Scalar(0);
      for (Index i = 0; i < tab_.rows(); ++i) {
        const Scalar a = tab_(i, entering);
        if (a <= tol_) continue;
        const Scalar ratio = tab_(i, cols) / a;
        if (leaving < 0 || ratio < best - tol_ ||
            (std::abs(ratio - best) <= tol_ && basis_[i] < basis_[leaving])) {
          leaving = i;
          best = ratio;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
      ++pivots;
    }
    throw std::runtime_error("simplex: iteration limit reached");
  }

  Scalar reduced_cost(const VectorX<Scalar>& cost, Index j) const {
    Scalar z = Scalar(0);
    for (Index i = 0; i < tab_.rows(); ++i) z += cost(basis_[i]) * tab_(i, j);
    return z - cost(j);
  }

  Scalar value(const VectorX<Scalar>& cost) const {
    Scalar z = Scalar(0);
    for (Index i = 0; i < tab_.rows(); ++i) z += cost(basis_[i]) * tab_(i, tab_.cols() - 1);
    return z;
  }

  void pivot(Index row, Index col) {
    tab_.row(row) /= tab_(row, col);
    for (Index i = 0; i < tab_.rows(); ++i) {
      if (i == row) continue;
      const Scalar f = tab_(i, col);
      if (f != Scalar(0)) tab_.row(i) -= f * tab_.row(row);
    }
    basis_[row] = col;
  }

  void drop_row(Index row) {
    const Index last = tab_.rows() - 1;
    if (row != last) {
      tab_.row(row) = tab_.row(last);
      basis_[row] = basis_[last];
    }
    tab_.conservativeResize(last, Eigen::NoChange);
    basis_.pop_back();
  }

  MatrixX<Scalar>& tab() { return tab_; }
  std::vector<Index>& basis() { return basis_; }

 private:
  MatrixX<Scalar> tab_;
  std::vector<Index> basis_;
  Scalar tol_;
};

}  // namespace detail

/// Two-phase dense simplex. Deterministic: Bland's rule for entering and
/// leaving variables. Intended for the tiny per-node problems of this library.
template <typename Scalar>
LpResult<Scalar> solve_lp(const LinearProgram<Scalar>& lp, Scalar tol = Scalar(1e-11)) {
  const Index n = lp.objective.size();
  const Index m_eq = lp.eq_matrix.rows();
  const Index m_ub = lp.ub_matrix.rows();
  if ((m_eq > 0 && lp.eq_matrix.cols() != n) || (m_ub > 0 && lp.ub_matrix.cols() != n) ||
      lp.eq_rhs.size() != m_eq || lp.ub_rhs.size() != m_ub)
    throw std::invalid_argument("solve_lp: inconsistent dimensions");

  const Index m = m_eq + m_ub;
  // Columns: x (n), slacks (m_ub), artificials (one per row needing one), rhs.
  std::vector<Index> needs_artificial;
  std::vector<Scalar> sign(static_cast<std::size_t>(m), Scalar(1));
  for (Index i = 0; i < m_eq; ++i) {
    if (lp.eq_rhs(i) < Scalar(0)) sign[i] = Scalar(-1);
    needs_artificial.push_back(i);
  }
  for (Index i = 0; i < m_ub; ++i) {
    if (lp.ub_rhs(i) < Scalar(0)) {
      sign[m_eq + i] = Scalar(-1);
      needs_artificial.push_back(m_eq + i);
    }
  }
  const Index n_art = static_cast<Index>(needs_artificial.size());
  const Index cols = n + m_ub + n_art;
  MatrixX<Scalar> tab = MatrixX<Scalar>::Zero(m, cols + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m), -1);
  for (Index i = 0; i < m_eq; ++i) {
    tab.row(i).head(n) = sign[i] * lp.eq_matrix.row(i);
    tab(i, cols) = sign[i] * lp.eq_rhs(i);
  }
  for (Index i = 0; i < m_ub; ++i) {
    const Index r = m_eq + i;
    tab.row(r).head(n) = sign[r] * lp.ub_matrix.row(i);
    tab(r, n + i) = sign[r];
    tab(r, cols) = sign[r] * lp.ub_rhs(i);
    if (sign[r] > Scalar(0)) basis[r] = n + i;
  }
  for (Index k = 0; k < n_art; ++k) {
    const Index r = needs_artificial[k];
    tab(r, n + m_ub + k) = Scalar(1);
    basis[r] = n + m_ub + k;
  }

  LpResult<Scalar> result;
  detail::Tableau<Scalar> t(std::move(tab), std::move(basis), tol);
  std::vector<bool> allowed(static_cast<std::size_t>(cols), true);

  if (n_art > 0) {
    VectorX<Scalar> phase1 = VectorX<Scalar>::Zero(cols);
    phase1.tail(n_art).setConstant(Scalar(-1));
    t.optimize(phase1, allowed, result.pivots);
    const Scalar rhs_scale = std::max(Scalar(1), t.tab().col(cols).cwiseAbs().maxCoeff());
    if (t.value(phase1) < -tol * rhs_scale * Scalar(10)) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive remaining zero-level artificials out of the basis.
    for (Index i = 0; i < t.tab().rows();) {
      if (t.basis()[i] < n + m_ub) {
        ++i;
        continue;
      }
      Index col = -1;
      for (Index j = 0; j < n + m_ub; ++j) {
        if (std::abs(t.tab()(i, j)) > tol) {
          col = j;
          break;
        }
      }
      if (col < 0) {
        t.drop_row(i);
      } else {
        t.pivot(i, col);
        ++result.pivots;
        ++i;
      }
    }
    for (Index k = 0; k < n_art; ++k) allowed[n + m_ub + k] = false;
  }

  VectorX<Scalar> cost = VectorX<Scalar>::Zero(cols);
  cost.head(n) = lp.objective;
  if (!t.optimize(cost, allowed, result.pivots)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  result.status = LpStatus::kOptimal;
  result.x = VectorX<Scalar>::Zero(n);
  for (Index i = 0; i < t.tab().rows(); ++i) {
    const Index b = t.basis()[i];
    if (b < n) result.x(b) = std::max(Scalar(0), t.tab()(i, cols));
  }
  result.value = lp.objective.dot(result.x);
  return result;
}

}  // namespace robusthedge
