#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace testsupport {

using robusthedge::Index;
using robusthedge::kNoNode;
using robusthedge::TreeNode;

namespace {

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

int uniform_int(std::mt19937_64& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

Vector random_vector(std::mt19937_64& rng, int d, double scale) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = uniform(rng, -scale, scale);
  return v;
}

}  // namespace

TreeFamily random_family(std::mt19937_64& rng, const FamilyOptions& opt) {
  const int d = opt.dimension;
  const int periods = uniform_int(rng, 1, opt.max_periods);
  const int models = uniform_int(rng, 1, opt.max_models);
  const int min_children = opt.feasible ? std::max(2, d + 1) : 1;
  if (min_children > opt.max_children) throw std::invalid_argument("random_family: max_children too small");
  const double scale = 10.0;

  std::vector<TreeNode> nodes;
  nodes.push_back(TreeNode{"r", 0, Vector::Constant(d, 100.0), kNoNode, {}, kNoNode});
  std::vector<ModelLaw> laws(static_cast<std::size_t>(models));
  for (int m = 0; m < models; ++m) laws[static_cast<std::size_t>(m)].name = "M" + std::to_string(m + 1);

  for (NodeIndex v = 0; v < nodes.size(); ++v) {
    if (nodes[v].time == periods) continue;
    const int k = uniform_int(rng, min_children, opt.max_children);
    std::vector<Vector> inc;
    std::vector<bool> core(static_cast<std::size_t>(k), false);
    if (opt.feasible) {
      // d+1 increments with 0 = sum w_i x_i, w > 0.
      std::vector<double> w(static_cast<std::size_t>(d + 1));
      for (auto& x : w) x = uniform(rng, 0.2, 1.0);
      Vector acc = Vector::Zero(d);
      for (int i = 0; i < d; ++i) {
        Vector x = random_vector(rng, d, scale);
        if (d == 1 && std::abs(x(0)) < 1.0) x(0) = x(0) < 0 ? -1.0 : 1.0;
        acc += w[static_cast<std::size_t>(i)] * x;
        inc.push_back(x);
      }
      inc.push_back(-acc / w[static_cast<std::size_t>(d)]);
      for (int c = d + 1; c < k; ++c) inc.push_back(random_vector(rng, d, scale));
      for (int c = 0; c <= d; ++c) core[static_cast<std::size_t>(c)] = true;
    } else {
      const double u = uniform(rng, 0.0, 1.0);
      for (int c = 0; c < k; ++c) {
        Vector x = random_vector(rng, d, scale);
        if (u < 0.25) x(0) = std::abs(x(0)) + 0.5;              // all up in the first asset
        else if (u < 0.4) x(0) = -std::abs(x(0)) - 0.5;         // all down
        else if (u < 0.45) x.setZero();                         // flat asset
        inc.push_back(x);
      }
    }
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    for (int c = 0; c < k; ++c) {
      TreeNode n;
      n.id = nodes[v].id + "." + std::to_string(c);
      n.time = nodes[v].time + 1;
      n.S = nodes[v].S + inc[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)])];
      n.parent = v;
      nodes[v].children.push_back(nodes.size());
      nodes.push_back(std::move(n));
    }
    for (auto& law : laws) {
      if (law.transitions.size() < nodes.size()) law.transitions.resize(nodes.size());
      Vector p = Vector::Zero(k);
      bool any = false;
      for (int c = 0; c < k; ++c) {
        const bool is_core = core[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)])];
        const bool charge = opt.feasible ? (is_core || uniform(rng, 0.0, 1.0) >= opt.null_edge)
                                         : uniform(rng, 0.0, 1.0) >= opt.null_edge;
        if (charge) {
          p(c) = uniform(rng, 0.05, 1.0);
          any = true;
        }
      }
      if (!any) p(uniform_int(rng, 0, k - 1)) = 1.0;
      law.transitions[v] = p / p.sum();
    }
  }
  for (auto& law : laws) {
    law.transitions.resize(nodes.size());
    for (NodeIndex v = 0; v < nodes.size(); ++v)
      if (nodes[v].children.empty()) law.transitions[v] = Vector(0);
  }
  return TreeFamily(std::move(nodes), std::move(laws));
}

std::vector<double> random_claim(std::mt19937_64& rng, const TreeFamily& fam) {
  std::vector<double> f(fam.size(), 0.0);
  const int type = uniform_int(rng, 0, 3);
  const double basket0 = fam.node(0).S.sum();
  const double K = basket0 + uniform(rng, -8.0, 8.0);
  for (NodeIndex u : fam.terminal_nodes()) {
    const double x = fam.node(u).S.sum();
    switch (type) {
      case 0: f[u] = std::max(x - K, 0.0); break;
      case 1: f[u] = std::max(K - x, 0.0); break;
      case 2: f[u] = std::abs(x - K); break;
      default: f[u] = uniform(rng, 0.0, 10.0); break;
    }
  }
  // Keep claims non-degenerate: at least one positive supported value.
  bool positive = false;
  for (NodeIndex u : fam.terminal_nodes()) positive = positive || f[u] > 0.0;
  if (!positive)
    for (NodeIndex u : fam.terminal_nodes()) f[u] = uniform(rng, 0.0, 10.0);
  return f;
}

ModelLaw random_law_like(std::mt19937_64& rng, const TreeFamily& fam, std::size_t k) {
  ModelLaw law{"random", {}};
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const Vector& base = fam.model(k).transitions[v];
    Vector p = Vector::Zero(base.size());
    for (Index c = 0; c < base.size(); ++c)
      if (base(c) > 0.0) p(c) = uniform(rng, 0.05, 1.0);
    if (p.size() > 0) p /= p.sum();
    law.transitions.push_back(p);
  }
  return law;
}

Deflator random_deflator(std::mt19937_64& rng, const TreeFamily& fam, const ModelLaw& P, bool martingale) {
  std::vector<double> Y(fam.size(), 1.0);
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto& ch = fam.node(v).children;
    if (ch.empty()) continue;
    std::vector<double> raw(ch.size());
    double mean = 0.0;
    for (std::size_t c = 0; c < ch.size(); ++c) {
      raw[c] = uniform(rng, 0.2, 2.0);
      mean += P.transitions[v](static_cast<Index>(c)) * raw[c];
    }
    const double shrink = martingale ? 1.0 : uniform(rng, 0.5, 1.0);
    for (std::size_t c = 0; c < ch.size(); ++c) Y[ch[c]] = Y[v] * shrink * raw[c] / mean;
  }
  return Deflator(fam, std::move(Y));
}

double normal_cdf_quadrature(double x) {
  const double a = std::abs(x);
  const int n = 20000;
  const double h = a / n;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = phi(0.0) + phi(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * phi(i * h);
  const double half = s * h / 3.0;
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

double bs_call_oracle(double S, double K, double sigma, double T) {
  const double sd = sigma * std::sqrt(T);
  const double d1 = std::log(S / K) / sd + 0.5 * sd;
  return S * normal_cdf_quadrature(d1) - K * normal_cdf_quadrature(d1 - sd);
}

Decision grid_feasibility(const std::vector<Vector>& dS, double step) {
  const std::size_t k = dS.size();
  if (k == 0 || k > 3) throw std::invalid_argument("grid_feasibility: 1 to 3 children supported");
  const Index d = dS[0].size();
  if (d > 2) throw std::invalid_argument("grid_feasibility: dimension at most 2");
  double maxd = 0.0;
  for (const auto& x : dS) maxd = std::max(maxd, x.cwiseAbs().maxCoeff());
  if (maxd == 0.0) return Decision::kFeasible;
  std::vector<Vector> g;
  for (const auto& x : dS) g.push_back(x / maxd);

  // Images of boundary grid points of {q >= step, sum q = 1}.
  std::vector<Vector> img;
  auto push = [&](const std::vector<double>& q) {
    Vector y = Vector::Zero(d);
    for (std::size_t c = 0; c < k; ++c) y += q[c] * g[c];
    img.push_back(y);
  };
  if (k == 1) {
    push({1.0});
  } else if (k == 2) {
    push({step, 1.0 - step});
    push({1.0 - step, step});
  } else {
    const int n = static_cast<int>(std::lround(1.0 / step));
    for (int fixed = 0; fixed < 3; ++fixed) {
      const int a = (fixed + 1) % 3, b = (fixed + 2) % 3;
      for (int i = 0; i <= n; ++i) {
        std::vector<double> q(3);
        const double s = static_cast<double>(i) / n;
        q[static_cast<std::size_t>(fixed)] = step;
        q[static_cast<std::size_t>(a)] = step + (1.0 - 3.0 * step) * s;
        q[static_cast<std::size_t>(b)] = step + (1.0 - 3.0 * step) * (1.0 - s);
        push(q);
      }
    }
  }

  bool inner = false;
  if (d == 1) {
    double lo = img[0](0), hi = img[0](0);
    for (const auto& y : img) {
      lo = std::min(lo, y(0));
      hi = std::max(hi, y(0));
    }
    inner = lo <= 0.0 && hi >= 0.0;
  } else {
    std::vector<double> ang;
    for (const auto& y : img) {
      if (y.norm() <= 1e-15) {
        inner = true;
        break;
      }
      ang.push_back(std::atan2(y(1), y(0)));
    }
    if (!inner) {
      std::sort(ang.begin(), ang.end());
      double gap = ang.front() + 2.0 * M_PI - ang.back();
      for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
      inner = gap < M_PI - 1e-9;
    }
  }
  if (inner) return Decision::kFeasible;

  // Distance from 0 to conv(g).
  double dist = 0.0;
  if (d == 1) {
    double lo = g[0](0), hi = g[0](0);
    for (const auto& y : g) {
      lo = std::min(lo, y(0));
      hi = std::max(hi, y(0));
    }
    dist = lo > 0 ? lo : (hi < 0 ? -hi : 0.0);
  } else {
    auto seg = [](const Vector& a, const Vector& b) {
      const Vector ab = b - a;
      const double L = ab.squaredNorm();
      const double t = L > 0 ? std::clamp(-a.dot(ab) / L, 0.0, 1.0) : 0.0;
      return (a + t * ab).norm();
    };
    dist = robusthedge::kInfinity;
    for (std::size_t i = 0; i < k; ++i) {
      dist = std::min(dist, g[i].norm());
      for (std::size_t j = i + 1; j < k; ++j) dist = std::min(dist, seg(g[i], g[j]));
    }
    if (k == 3) {
      // Inside the triangle: all cross products share a sign.
      auto cross = [](const Vector& a, const Vector& b) { return a(0) * b(1) - a(1) * b(0); };
      const double c0 = cross(g[1] - g[0], -g[0]), c1 = cross(g[2] - g[1], -g[1]), c2 = cross(g[0] - g[2], -g[2]);
      if ((c0 >= 0 && c1 >= 0 && c2 >= 0) || (c0 <= 0 && c1 <= 0 && c2 <= 0)) dist = 0.0;
    }
  }
  return dist > step ? Decision::kInfeasible : Decision::kAmbiguous;
}

std::string family_digest(const TreeFamily& fam) {
  return std::to_string(fam.size()) + " nodes, " + std::to_string(fam.horizon()) + " periods, " +
         std::to_string(fam.model_count()) + " models, d=" + std::to_string(fam.dimension());
}

}  // namespace testsupport
