#include "robusthedge/superhedge.hpp"

#include "robusthedge/linalg.hpp"
#include "robusthedge/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace robusthedge {

namespace {

bool reachable(const TreeFamily& fam, NodeIndex v) {
  for (std::size_t k = 0; k < fam.model_count(); ++k)
    if (fam.reach_probability(k, v) > 0.0) return true;
  return false;
}

// Quasi-sure support; nodes no model reaches fall back to every child some
// model charges, so their values stay well defined.
std::vector<NodeIndex> pricing_support(const TreeFamily& fam, NodeIndex v) {
  auto U = supports(fam, v);
  if (!U.empty()) return U;
  const auto& ch = fam.node(v).children;
  for (std::size_t c = 0; c < ch.size(); ++c) {
    for (const auto& m : fam.models()) {
      if (m.transitions[v](static_cast<Index>(c)) > 0.0) {
        U.push_back(ch[c]);
        break;
      }
    }
  }
  return U.empty() ? ch : U;
}

Index child_position(const TreeFamily& fam, NodeIndex v, NodeIndex c) {
  const auto& ch = fam.node(v).children;
  return static_cast<Index>(std::find(ch.begin(), ch.end(), c) - ch.begin());
}

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

// Least-norm h in [lo, hi] for the scalar envelope problem.
double scalar_hedge(double Zv, const std::vector<double>& dS, const std::vector<double>& Zc) {
  double lo = -kInfinity, hi = kInfinity;
  for (std::size_t c = 0; c < dS.size(); ++c) {
    if (dS[c] > 0.0) lo = std::max(lo, (Zc[c] - Zv) / dS[c]);
    if (dS[c] < 0.0) hi = std::min(hi, (Zc[c] - Zv) / dS[c]);
  }
  if (lo > hi) return 0.5 * (lo + hi);
  return std::clamp(0.0, lo, hi);
}

double worst_residual(double Zv, const Matrix& dS, const std::vector<double>& Zc, const Vector& h) {
  double worst = kInfinity;
  for (Index c = 0; c < dS.cols(); ++c) worst = std::min(worst, Zv + h.dot(dS.col(c)) - Zc[static_cast<std::size_t>(c)]);
  return worst;
}

// Smallest correction of an LP hedge making its binding constraints exact;
// keeps whichever hedge has the larger worst residual.
Vector polish_hedge(double Zv, const Matrix& dS, const std::vector<double>& Zc, const Vector& h) {
  double scale = std::max(1.0, std::abs(Zv));
  for (double z : Zc) scale = std::max(scale, std::abs(z));
  std::vector<Index> active;
  for (Index c = 0; c < dS.cols(); ++c)
    if (Zv + h.dot(dS.col(c)) - Zc[static_cast<std::size_t>(c)] <= 1e-7 * scale) active.push_back(c);
  if (active.empty()) return h;
  Matrix A(static_cast<Index>(active.size()), dS.rows());
  Vector b(static_cast<Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) {
    A.row(static_cast<Index>(i)) = dS.col(active[i]).transpose();
    b(static_cast<Index>(i)) = Zc[static_cast<std::size_t>(active[i])] - Zv;
  }
  const Vector exact = h + Eigen::CompleteOrthogonalDecomposition<Matrix>(A).solve(b - A * h);
  return worst_residual(Zv, dS, Zc, exact) > worst_residual(Zv, dS, Zc, h) ? exact : h;
}

Vector vector_hedge(double Zv, const Matrix& dS, const std::vector<double>& Zc) {
  const Index d = dS.rows(), k = dS.cols();
  const double s_scale = dS.cwiseAbs().maxCoeff();
  if (s_scale == 0.0) return Vector::Zero(d);
  double z_scale = std::max(1.0, std::abs(Zv));
  for (double z : Zc) z_scale = std::max(z_scale, std::abs(z));
  // g = h s_scale / z_scale;  -g.dS_c/s_scale <= (Zv - Z_c)/z_scale + slack.
  for (double slack : {1e-11, 1e-9, 1e-7}) {
    LinearProgram<double> lp;
    lp.objective = -Vector::Ones(2 * d);
    lp.ub_matrix.resize(k, 2 * d);
    lp.ub_rhs.resize(k);
    for (Index c = 0; c < k; ++c) {
      const Vector a = dS.col(c) / s_scale;
      lp.ub_matrix.row(c) << -a.transpose(), a.transpose();
      lp.ub_rhs(c) = (Zv - Zc[static_cast<std::size_t>(c)]) / z_scale + slack;
    }
    const auto res = solve_lp(lp);
    if (res.status == LpStatus::kOptimal) return polish_hedge(Zv, dS, Zc, (res.x.head(d) - res.x.tail(d)) * (z_scale / s_scale));
  }
  throw std::runtime_error("extract_strategy_envelope: hedge problem infeasible, value is not a superhedging price");
}

std::vector<Vector> values_of(const TreeFamily& fam, const std::vector<NodeIndex>& nodes) {
  std::vector<Vector> out;
  for (NodeIndex c : nodes) out.push_back(fam.node(c).S);
  return out;
}

std::vector<double> z_of(const std::vector<double>& Z, const std::vector<NodeIndex>& nodes) {
  std::vector<double> out;
  for (NodeIndex c : nodes) out.push_back(Z[c]);
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double Claim::of_state(const Vector& S) const {
  if (type == "table") throw std::invalid_argument("Claim: table claims are evaluated by node id");
  if (type == "constant") return level;
  if (weights.size() > 0 && weights.size() != S.size())
    throw std::invalid_argument("Claim: basket weights do not match the asset dimension");
  return of_scalar(weights.size() > 0 ? weights.dot(S) : S.sum());
}

double Claim::of_scalar(double x) const {
  if (type == "constant") return level;
  if (type == "call") return positive_part(x - strikes.at(0));
  if (type == "put") return positive_part(strikes.at(0) - x);
  if (type == "straddle") return std::abs(x - strikes.at(0));
  if (type == "digital") return x >= strikes.at(0) ? 1.0 : 0.0;
  if (type == "butterfly") {
    const double k1 = strikes.at(0), k2 = strikes.at(1), k3 = strikes.at(2);
    return positive_part(x - k1) - (k3 - k1) / (k3 - k2) * positive_part(x - k2) +
           (k2 - k1) / (k3 - k2) * positive_part(x - k3);
  }
  throw std::invalid_argument("Claim: '" + type + "' is not a function of the state");
}

double Claim::of_node(const TreeNode& node) const {
  if (type != "table") return of_state(node.S);
  const auto it = table.find(node.id);
  if (it == table.end()) throw std::invalid_argument("Claim: table has no value for node '" + node.id + "'");
  return it->second;
}

void Claim::validate() const {
  auto need = [&](std::size_t n) {
    if (strikes.size() != n)
      throw std::invalid_argument("Claim: '" + type + "' needs " + std::to_string(n) + " strike(s)");
  };
  if (type == "call" || type == "put" || type == "straddle" || type == "digital") {
    need(1);
  } else if (type == "butterfly") {
    need(3);
    if (!(strikes[0] < strikes[1] && strikes[1] < strikes[2]))
      throw std::invalid_argument("Claim: butterfly strikes must be strictly increasing");
  } else if (type == "constant") {
    if (!(level >= 0.0) || !std::isfinite(level)) throw std::invalid_argument("Claim: constant must be finite and >= 0");
  } else if (type == "table") {
    for (const auto& [id, value] : table)
      if (!(value >= 0.0) || !std::isfinite(value))
        throw std::invalid_argument("Claim: table value at '" + id + "' must be finite and >= 0");
  } else {
    throw std::invalid_argument("Claim: unknown type '" + type + "'");
  }
  for (double k : strikes)
    if (!std::isfinite(k)) throw std::invalid_argument("Claim: strikes must be finite");
}

bool Claim::operator==(const Claim& other) const {
  return type == other.type && strikes == other.strikes && level == other.level && weights == other.weights &&
         table == other.table;
}

Claim parse_payoff(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw std::invalid_argument("payoff: empty specification");
  Claim c;
  c.type = parts[0];
  std::vector<double> nums;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != parts[i].size() || parts[i].empty())
      throw std::invalid_argument("payoff: '" + parts[i] + "' is not a number in '" + text + "'");
    nums.push_back(x);
  }
  if (c.type == "constant") {
    if (nums.size() != 1) throw std::invalid_argument("payoff: constant needs one value");
    c.level = nums[0];
  } else if (c.type == "table") {
    throw std::invalid_argument("payoff: table claims need a claim file");
  } else {
    c.strikes = nums;
  }
  c.validate();
  return c;
}

std::string payoff_to_string(const Claim& claim) {
  char buf[64];
  if (claim.type == "constant") {
    std::snprintf(buf, sizeof buf, "constant:%.17g", claim.level);
    return buf;
  }
  std::string out = claim.type;
  for (double k : claim.strikes) {
    std::snprintf(buf, sizeof buf, ":%.17g", k);
    out += buf;
  }
  return out;
}

std::vector<double> terminal_payoff(const TreeFamily& fam, const Claim& claim) {
  claim.validate();
  std::vector<double> f(fam.size(), 0.0);
  for (NodeIndex u : fam.terminal_nodes()) {
    if (claim.type == "table" && !reachable(fam, u) && !claim.table.count(fam.node(u).id)) continue;
    f[u] = claim.of_node(fam.node(u));
  }
  return f;
}

double node_sup(const Vector& S_v, const std::vector<Vector>& children, const std::vector<double>& values,
                Vector* weights) {
  const Index k = static_cast<Index>(children.size());
  if (k == 0 || values.size() != children.size()) throw std::invalid_argument("node_sup: children and values differ");
  const Index d = S_v.size();
  Matrix dS(d, k);
  for (Index c = 0; c < k; ++c) dS.col(c) = children[static_cast<std::size_t>(c)] - S_v;
  const double scale = dS.cwiseAbs().maxCoeff();
  Vector q = Vector::Zero(k);
  double best = -kInfinity;

  if (scale == 0.0) {
    const auto it = std::max_element(values.begin(), values.end());
    best = *it;
    q(it - values.begin()) = 1.0;
  } else if (d == 1) {
    const double eps = 1e-14;
    for (Index i = 0; i < k; ++i) {
      const double di = dS(0, i) / scale;
      if (std::abs(di) <= eps && values[static_cast<std::size_t>(i)] > best) {
        best = values[static_cast<std::size_t>(i)];
        q.setZero();
        q(i) = 1.0;
      }
      if (di >= -eps) continue;
      for (Index j = 0; j < k; ++j) {
        const double dj = dS(0, j) / scale;
        if (dj <= eps) continue;
        const double lambda = dj / (dj - di);
        const double val = lambda * values[static_cast<std::size_t>(i)] + (1.0 - lambda) * values[static_cast<std::size_t>(j)];
        if (val > best) {
          best = val;
          q.setZero();
          q(i) = lambda;
          q(j) = 1.0 - lambda;
        }
      }
    }
  } else {
    double z_scale = 1.0;
    for (double z : values) z_scale = std::max(z_scale, std::abs(z));
    LinearProgram<double> lp;
    lp.objective.resize(k);
    for (Index c = 0; c < k; ++c) lp.objective(c) = values[static_cast<std::size_t>(c)] / z_scale;
    lp.eq_matrix.resize(d + 1, k);
    lp.eq_matrix.row(0).setOnes();
    lp.eq_matrix.bottomRows(d) = dS / scale;
    lp.eq_rhs = Vector::Zero(d + 1);
    lp.eq_rhs(0) = 1.0;
    const auto res = solve_lp(lp);
    if (res.status == LpStatus::kOptimal) {
      q = res.x;
      best = 0.0;
      for (Index c = 0; c < k; ++c) best += q(c) * values[static_cast<std::size_t>(c)];
    }
  }
  if (!(best > 0.0)) {
    q.setZero();
    best = 0.0;
  }
  if (weights) *weights = q;
  return best;
}

TreeValue sublinear_price_tree(const TreeFamily& fam, const std::vector<double>& terminal_values) {
  if (terminal_values.size() != fam.size())
    throw std::invalid_argument("sublinear_price_tree: one terminal value per node is required");
  TreeValue out;
  out.Z.assign(fam.size(), 0.0);
  out.optimizer.weights.resize(fam.size());
  out.optimizer.cemetery.assign(fam.size(), 0.0);
  for (NodeIndex v = fam.size(); v-- > 0;) {
    const TreeNode& node = fam.node(v);
    if (node.children.empty()) {
      const double f = terminal_values[v];
      if (!std::isfinite(f)) throw std::invalid_argument("sublinear_price_tree: payoff at '" + node.id + "' is not finite");
      if (f < 0.0) {
        if (reachable(fam, v))
          throw std::invalid_argument("sublinear_price_tree: payoff is negative at supported node '" + node.id + "'");
        out.warnings.push_back("negative payoff at unreachable node '" + node.id + "' replaced by 0");
      }
      out.Z[v] = std::max(0.0, f);
      out.optimizer.weights[v] = Vector(0);
      continue;
    }
    const auto U = pricing_support(fam, v);
    Vector q;
    out.Z[v] = node_sup(node.S, values_of(fam, U), z_of(out.Z, U), &q);
    Vector full = Vector::Zero(static_cast<Index>(node.children.size()));
    for (std::size_t j = 0; j < U.size(); ++j) full(child_position(fam, v, U[j])) = q(static_cast<Index>(j));
    out.optimizer.cemetery[v] = std::max(0.0, 1.0 - full.sum());
    out.optimizer.weights[v] = std::move(full);
    if (q.sum() == 0.0 && reachable(fam, v)) {
      std::vector<double> zu = z_of(out.Z, U);
      if (*std::max_element(zu.begin(), zu.end()) > 0.0)
        out.warnings.push_back("node '" + node.id + "' admits no martingale weights; its value is carried by the cemetery");
    }
  }
  return out;
}

TreeValue sublinear_price_tree(const TreeFamily& fam, const Claim& claim) {
  return sublinear_price_tree(fam, terminal_payoff(fam, claim));
}

double dual_enumerate(const TreeFamily& fam, const std::vector<double>& terminal_values, double grid_step) {
  if (fam.horizon() > 4) throw std::invalid_argument("dual_enumerate: trees with more than 4 periods are rejected");
  if (!(grid_step > 0.0) || grid_step > 1.0) throw std::invalid_argument("dual_enumerate: grid step must lie in (0, 1]");
  const int n = static_cast<int>(std::lround(1.0 / grid_step));
  if (std::abs(n * grid_step - 1.0) > 1e-9) throw std::invalid_argument("dual_enumerate: 1 / grid_step must be an integer");
  if (terminal_values.size() != fam.size()) throw std::invalid_argument("dual_enumerate: one value per node is required");

  std::vector<double> V(fam.size(), 0.0);
  for (NodeIndex v = fam.size(); v-- > 0;) {
    const TreeNode& node = fam.node(v);
    if (node.children.empty()) {
      V[v] = terminal_values[v];
      continue;
    }
    const auto U = pricing_support(fam, v);
    const int k = static_cast<int>(U.size());
    if (binomial(n + k, k) > 2e7)
      throw std::invalid_argument("dual_enumerate: node '" + node.id + "' has too many grid points");
    const Index d = fam.dimension();
    Matrix M(d, k);
    for (int c = 0; c < k; ++c) M.col(c) = fam.node(U[static_cast<std::size_t>(c)]).S - node.S;
    const double scale = M.cwiseAbs().maxCoeff();
    if (scale > 0.0) M /= scale;

    // Projector onto {M'q = 0, 1'q = 1'p} restricted to the face `mask`.
    struct Face {
      Matrix P;
      Matrix R;
      bool consistent = true;
    };
    std::vector<Face> faces(static_cast<std::size_t>(1) << k);
    for (unsigned mask = 1; mask < faces.size(); ++mask) {
      std::vector<int> idx;
      for (int c = 0; c < k; ++c)
        if (mask & (1u << c)) idx.push_back(c);
      const Index m = static_cast<Index>(idx.size());
      Matrix A(d + 1, m), B = Matrix::Zero(d + 1, m);
      for (Index j = 0; j < m; ++j) {
        A.col(j).head(d) = M.col(idx[static_cast<std::size_t>(j)]);
        A(d, j) = 1.0;
        B(d, j) = 1.0;
      }
      Matrix C = Matrix::Zero(d + 1, m);
      C.topRows(d) = A.topRows(d);
      const Matrix Ap = A.completeOrthogonalDecomposition().pseudoInverse();
      Matrix Pf = Matrix::Identity(m, m) - Ap * C;
      Face face;
      face.P = Matrix::Zero(k, k);
      for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) face.P(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]) = Pf(a, b);
      Matrix Rf = A * Pf - B;
      face.R = Matrix::Zero(d + 1, k);
      for (Index j = 0; j < m; ++j) face.R.col(idx[static_cast<std::size_t>(j)]) = Rf.col(j);
      face.consistent = face.R.cwiseAbs().maxCoeff() <= 1e-12;
      faces[mask] = std::move(face);
    }

    Vector z(k);
    for (int c = 0; c < k; ++c) z(c) = V[U[static_cast<std::size_t>(c)]];
    const unsigned full = static_cast<unsigned>(faces.size() - 1);
    double best = 0.0;
    Vector p = Vector::Zero(k);
    auto consider = [&](const Face& face) {
      if (!face.consistent && (face.R * p).cwiseAbs().maxCoeff() > 1e-12) return;
      const Vector q = face.P * p;
      if (q.minCoeff() < -1e-12) return;
      best = std::max(best, q.dot(z));
    };
    std::function<void(int, int, unsigned)> walk = [&](int c, int left, unsigned mask) {
      if (c == k) {
        if (mask == 0) return;
        consider(faces[mask]);
        if (mask != full) consider(faces[full]);
        return;
      }
      for (int units = 0; units <= left; ++units) {
        p(c) = units * grid_step;
        walk(c + 1, left - units, units > 0 ? mask | (1u << c) : mask);
      }
      p(c) = 0.0;
    };
    walk(0, n, 0);
    V[v] = best;
  }
  return V[0];
}

double dual_enumerate(const TreeFamily& fam, const Claim& claim, double grid_step) {
  return dual_enumerate(fam, terminal_payoff(fam, claim), grid_step);
}

HedgeStrategy extract_strategy_envelope(const TreeFamily& fam, const std::vector<double>& Z) {
  if (Z.size() != fam.size()) throw std::invalid_argument("extract_strategy_envelope: one value per node is required");
  HedgeStrategy out;
  out.H.assign(fam.size(), Vector::Zero(fam.dimension()));
  out.residual.resize(fam.size());
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const TreeNode& node = fam.node(v);
    if (node.children.empty()) continue;
    const auto U = pricing_support(fam, v);
    Matrix dS(fam.dimension(), static_cast<Index>(U.size()));
    for (std::size_t j = 0; j < U.size(); ++j) dS.col(static_cast<Index>(j)) = fam.node(U[j]).S - node.S;
    const auto zc = z_of(Z, U);
    if (fam.dimension() == 1) {
      std::vector<double> d1(U.size());
      for (std::size_t j = 0; j < U.size(); ++j) d1[j] = dS(0, static_cast<Index>(j));
      out.H[v](0) = scalar_hedge(Z[v], d1, zc);
    } else {
      out.H[v] = vector_hedge(Z[v], dS, zc);
    }
    out.residual[v].resize(static_cast<Index>(node.children.size()));
    for (std::size_t c = 0; c < node.children.size(); ++c) {
      const NodeIndex ch = node.children[c];
      out.residual[v](static_cast<Index>(c)) = Z[v] + out.H[v].dot(fam.node(ch).S - node.S) - Z[ch];
    }
  }
  return out;
}

CovariationStrategy extract_strategy_covariation(const TreeFamily& fam, const std::vector<double>& Z,
                                                 const KilledMeasure& Q) {
  if (Z.size() != fam.size()) throw std::invalid_argument("extract_strategy_covariation: one value per node is required");
  Q.validate(fam, 1e-9);
  const Index d = fam.dimension();
  CovariationStrategy out;
  out.strategy.H.assign(fam.size(), Vector::Zero(d));
  out.strategy.residual.resize(fam.size());
  out.estimates.assign(fam.size(), CovariationEstimate{Matrix::Zero(d, d), Vector::Zero(d), 0.0});
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const TreeNode& node = fam.node(v);
    if (node.children.empty() || Q.alive_mass(fam, v) <= 0.0) continue;
    const double mass = Q.weights[v].sum();
    if (mass <= 0.0) continue;
    Vector mean_s = Vector::Zero(d);
    double mean_z = 0.0;
    for (std::size_t c = 0; c < node.children.size(); ++c) {
      const double w = Q.weights[v](static_cast<Index>(c)) / mass;
      mean_s += w * (fam.node(node.children[c]).S - node.S);
      mean_z += w * (Z[node.children[c]] - Z[v]);
    }
    auto& est = out.estimates[v];
    for (std::size_t c = 0; c < node.children.size(); ++c) {
      const double w = Q.weights[v](static_cast<Index>(c)) / mass;
      const Vector ds = fam.node(node.children[c]).S - node.S - mean_s;
      const double dz = Z[node.children[c]] - Z[v] - mean_z;
      est.cS += w * ds * ds.transpose();
      est.cSZ += w * dz * ds;
    }
    est.cS = 0.5 * (est.cS + est.cS.transpose());
    est.dA = est.cS.trace();
    out.strategy.H[v] = pinv(est.cS) * est.cSZ;
  }
  return out;
}

SlackReport supermartingale_check(const TreeFamily& fam, const std::vector<double>& Z, const KilledMeasure& Q,
                                  double tol) {
  if (Z.size() != fam.size()) throw std::invalid_argument("supermartingale_check: one value per node is required");
  SlackReport r;
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto& ch = fam.node(v).children;
    if (ch.empty() || Q.alive_mass(fam, v) <= 0.0) continue;
    double e = 0.0;
    for (std::size_t c = 0; c < ch.size(); ++c) e += Q.weights[v](static_cast<Index>(c)) * Z[ch[c]];
    const double excess = e - Z[v];
    if (excess > r.worst) {
      r.worst = excess;
      r.worst_node = v;
    }
    if (excess > tol * std::max(1.0, std::abs(Z[v]))) r.ok = false;
  }
  return r;
}

double dpp_check(const TreeFamily& fam, const std::vector<double>& terminal_values, int t) {
  if (t < 0 || t > fam.horizon()) throw std::invalid_argument("dpp_check: split time outside the tree horizon");
  const double one_pass = sublinear_price_tree(fam, terminal_values).root();
  const TreeFamily head = truncate(fam, t);
  std::vector<double> inner(head.size(), 0.0);
  for (NodeIndex w = 0; w < head.size(); ++w) {
    const NodeIndex v = head.node(w).origin;
    if (fam.node(v).time != t) continue;
    if (fam.is_terminal(v)) {
      inner[w] = terminal_values[v];
      continue;
    }
    if (!reachable(fam, v)) continue;
    const TreeFamily sub = condition(fam, v);
    std::vector<double> f(sub.size(), 0.0);
    for (NodeIndex u = 0; u < sub.size(); ++u) f[u] = terminal_values[sub.node(u).origin];
    inner[w] = sublinear_price_tree(sub, f).root();
  }
  for (NodeIndex w = 0; w < head.size(); ++w)
    if (head.is_terminal(w) && fam.node(head.node(w).origin).time != t) inner[w] = terminal_values[head.node(w).origin];
  const double two_stage = sublinear_price_tree(head, inner).root();
  return std::abs(one_pass - two_stage);
}

double dpp_check(const TreeFamily& fam, const Claim& claim, int t) {
  return dpp_check(fam, terminal_payoff(fam, claim), t);
}

TreeVerification verify_superhedge(const TreeFamily& fam, double x, const HedgeStrategy& H,
                                   const std::vector<double>& terminal_values, double tol,
                                   const std::vector<double>* Z) {
  if (H.H.size() != fam.size() || terminal_values.size() != fam.size())
    throw std::invalid_argument("verify_superhedge: strategy and claim must be node indexed");
  TreeVerification r;
  std::vector<double> wealth(fam.size(), 0.0);
  wealth[0] = x;
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const TreeNode& node = fam.node(v);
    for (NodeIndex c : node.children) {
      wealth[c] = wealth[v] + H.H[v].dot(fam.node(c).S - node.S);
      if (Z && reachable(fam, c)) {
        const double before = (*Z)[v] - (*Z)[0] - (wealth[v] - x);
        const double after = (*Z)[c] - (*Z)[0] - (wealth[c] - x);
        const double increase = after - before;
        if (increase > r.worst_residual_increase) r.worst_residual_increase = increase;
        if (increase > tol) r.residual_monotone = false;
      }
    }
  }
  for (NodeIndex u : fam.terminal_nodes()) {
    if (!reachable(fam, u)) continue;
    ++r.terminal_checked;
    const double slack = wealth[u] - terminal_values[u];
    if (slack < r.min_slack) {
      r.min_slack = slack;
      r.worst_node = u;
    }
    if (slack < -tol) ++r.violations;
  }
  return r;
}

}  // namespace robusthedge
