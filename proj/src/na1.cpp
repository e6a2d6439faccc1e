#include "robusthedge/na1.hpp"

#include "robusthedge/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robusthedge {

namespace {

Matrix increments(const Vector& S_v, const std::vector<Vector>& children, double& scale) {
  const Index d = S_v.size();
  Matrix dS(d, static_cast<Index>(children.size()));
  for (std::size_t c = 0; c < children.size(); ++c) {
    if (children[c].size() != d) throw std::invalid_argument("node_feasibility: child dimension mismatch");
    dS.col(static_cast<Index>(c)) = children[c] - S_v;
  }
  scale = dS.size() > 0 ? dS.cwiseAbs().maxCoeff() : 0.0;
  if (scale > 0.0) dS /= scale;
  return dS;
}

std::vector<Vector> child_values(const TreeFamily& fam, const std::vector<NodeIndex>& children) {
  std::vector<Vector> out;
  out.reserve(children.size());
  for (NodeIndex c : children) out.push_back(fam.node(c).S);
  return out;
}

// max sum_c h.dS_c  s.t.  0 <= h.dS_c <= 1, with h = h+ - h-.
std::optional<Vector> separating_vector(const Vector& S_v, const std::vector<Vector>& children) {
  double scale = 0.0;
  const Matrix dS = increments(S_v, children, scale);
  if (scale == 0.0) return std::nullopt;
  const Index d = dS.rows(), k = dS.cols();
  LinearProgram<double> lp;
  lp.objective.resize(2 * d);
  const Vector total = dS.rowwise().sum();
  lp.objective << total, -total;
  lp.ub_matrix.resize(2 * k, 2 * d);
  lp.ub_rhs.resize(2 * k);
  for (Index c = 0; c < k; ++c) {
    lp.ub_matrix.row(c) << dS.col(c).transpose(), -dS.col(c).transpose();
    lp.ub_rhs(c) = 1.0;
    lp.ub_matrix.row(k + c) << -dS.col(c).transpose(), dS.col(c).transpose();
    lp.ub_rhs(k + c) = 0.0;
  }
  const auto res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal || res.value <= 1e-9) return std::nullopt;
  Vector h = res.x.head(d) - res.x.tail(d);
  const double norm = h.cwiseAbs().maxCoeff();
  if (norm <= 0.0) return std::nullopt;
  return Vector(h / norm);
}

std::vector<double> certificate_claim(const TreeFamily& fam, NodeIndex v, const Vector& h,
                                      const std::vector<NodeIndex>& covered) {
  std::vector<double> claim(fam.size(), 0.0);
  const Vector& S_v = fam.node(v).S;
  for (NodeIndex c : covered) {
    const double w = std::max(0.0, h.dot(fam.node(c).S - S_v));
    for (NodeIndex u : fam.terminal_nodes())
      if (fam.descends_from(u, c)) claim[u] = w;
  }
  return claim;
}

}  // namespace

FeasibilityResult node_feasibility_lp(const Vector& S_v, const std::vector<Vector>& children) {
  if (children.empty()) throw std::invalid_argument("node_feasibility: at least one child is required");
  double scale = 0.0;
  const Matrix dS = increments(S_v, children, scale);
  const Index k = dS.cols(), d = dS.rows();
  const Index rows = scale > 0.0 ? d + 1 : 1;
  LinearProgram<double> lp;
  lp.objective = Vector::Zero(k + 1);
  lp.objective(k) = 1.0;
  lp.eq_matrix = Matrix::Zero(rows, k + 1);
  lp.eq_rhs = Vector::Zero(rows);
  lp.eq_matrix.row(0).head(k).setOnes();
  lp.eq_rhs(0) = 1.0;
  if (scale > 0.0) lp.eq_matrix.block(1, 0, d, k) = dS;
  lp.ub_matrix = Matrix::Zero(k, k + 1);
  lp.ub_rhs = Vector::Zero(k);
  for (Index c = 0; c < k; ++c) {
    lp.ub_matrix(c, c) = -1.0;
    lp.ub_matrix(c, k) = 1.0;
  }
  FeasibilityResult out;
  const auto res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal) return out;
  out.margin = res.value;
  out.feasible = res.value > kFeasibilityThreshold;
  if (out.feasible) {
    out.weights = res.x.head(k);
    out.weights /= out.weights.sum();
  }
  return out;
}

std::optional<Vector> node_feasibility(const Vector& S_v, const std::vector<Vector>& children) {
  auto r = node_feasibility_lp(S_v, children);
  if (!r.feasible) return std::nullopt;
  return r.weights;
}

Na1Report na1_check(const TreeFamily& fam) {
  Na1Report report;
  std::vector<std::vector<Vector>> weights(fam.model_count(), std::vector<Vector>(fam.size()));
  std::optional<std::pair<NodeIndex, std::size_t>> failure;
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    if (fam.is_terminal(v)) continue;
    for (std::size_t k = 0; k < fam.model_count(); ++k) {
      if (fam.reach_probability(k, v) <= 0.0) continue;
      NodeRecord rec;
      rec.node = v;
      rec.model = k;
      rec.charged = model_support(fam, k, v);
      const auto r = node_feasibility_lp(fam.node(v).S, child_values(fam, rec.charged));
      rec.feasible = r.feasible;
      rec.margin = r.margin;
      if (r.feasible) {
        rec.weights = r.weights;
        const auto& ch = fam.node(v).children;
        Vector q = Vector::Zero(static_cast<Index>(ch.size()));
        for (std::size_t j = 0; j < rec.charged.size(); ++j) {
          const auto pos = std::find(ch.begin(), ch.end(), rec.charged[j]) - ch.begin();
          q(pos) = r.weights(static_cast<Index>(j));
        }
        weights[k][v] = std::move(q);
      } else if (!failure) {
        failure = std::make_pair(v, k);
      }
      report.records.push_back(std::move(rec));
    }
  }

  if (failure) {
    const auto [v, k] = *failure;
    ArbitrageCertificate cert;
    cert.node = v;
    cert.model = k;
    auto covered = supports(fam, v);
    auto h = separating_vector(fam.node(v).S, child_values(fam, covered));
    if (!h) {
      cert.quasi_sure = false;
      covered = model_support(fam, k, v);
      h = separating_vector(fam.node(v).S, child_values(fam, covered));
    }
    if (!h)
      throw std::runtime_error("na1_check: node '" + fam.node(v).id +
                               "' is infeasible but admits no separating strategy at working tolerance");
    cert.h = *h;
    cert.claim = certificate_claim(fam, v, cert.h, covered);
    report.certificate = std::move(cert);
    return report;
  }

  report.holds = true;
  for (std::size_t k = 0; k < fam.model_count(); ++k) {
    KilledMeasure Q;
    Q.weights.resize(fam.size());
    Q.cemetery.assign(fam.size(), 0.0);
    for (NodeIndex v = 0; v < fam.size(); ++v)
      Q.weights[v] = weights[k][v].size() > 0 || fam.is_terminal(v) ? weights[k][v] : fam.model(k).transitions[v];
    for (NodeIndex v = 0; v < fam.size(); ++v)
      if (fam.is_terminal(v)) Q.weights[v] = Vector(0);
    report.measures.push_back(std::move(Q));
  }
  return report;
}

std::vector<NodeIndex> certificate_support(const TreeFamily& fam, const ArbitrageCertificate& cert) {
  if (cert.quasi_sure) return supports(fam, cert.node);
  return model_support(fam, cert.model, cert.node);
}

bool certificate_validate(const TreeFamily& fam, const ArbitrageCertificate& cert) {
  if (cert.node >= fam.size() || fam.is_terminal(cert.node)) return false;
  if (cert.model >= fam.model_count() || fam.reach_probability(cert.model, cert.node) <= 0.0) return false;
  if (cert.h.size() != fam.dimension() || !cert.h.allFinite()) return false;
  if (cert.claim.size() != fam.size() || cert.capital != 0.0) return false;
  const auto covered = certificate_support(fam, cert);
  const Vector& S_v = fam.node(cert.node).S;
  bool strict = false;
  std::vector<double> expected(fam.size(), 0.0);
  for (NodeIndex c : covered) {
    const double w = cert.h.dot(fam.node(c).S - S_v);
    if (w < -1e-12) return false;
    if (w > 1e-9) strict = true;
    for (NodeIndex u : fam.terminal_nodes())
      if (fam.descends_from(u, c)) expected[u] = w;
  }
  if (!strict) return false;
  for (NodeIndex u = 0; u < fam.size(); ++u) {
    if (cert.claim[u] < 0.0) return false;
    const double tol = 1e-12 * std::max(1.0, std::abs(expected[u]));
    if (std::abs(cert.claim[u] - std::max(0.0, expected[u])) > tol) return false;
  }
  return true;
}

double martingale_defect(const TreeFamily& fam, const KilledMeasure& Q) {
  double worst = 0.0;
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto& ch = fam.node(v).children;
    if (ch.empty() || Q.alive_mass(fam, v) <= 0.0) continue;
    Vector mean = Vector::Zero(fam.dimension());
    for (std::size_t c = 0; c < ch.size(); ++c) mean += Q.weights[v](static_cast<Index>(c)) * fam.node(ch[c]).S;
    mean += Q.cemetery[v] * fam.node(v).S;
    worst = std::max(worst, (mean - fam.node(v).S).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace robusthedge
