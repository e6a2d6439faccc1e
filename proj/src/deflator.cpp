#include "robusthedge/deflator.hpp"

#include "robusthedge/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

namespace robusthedge {

namespace {

std::vector<double> reach_under(const TreeFamily& fam, const ModelLaw& P) {
  validate_law(fam, P);
  std::vector<double> reach(fam.size(), 0.0);
  reach[0] = 1.0;
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto& ch = fam.node(v).children;
    for (std::size_t c = 0; c < ch.size(); ++c) reach[ch[c]] = reach[v] * P.transitions[v](static_cast<Index>(c));
  }
  return reach;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

Deflator::Deflator(const TreeFamily& fam, std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() != fam.size()) throw std::invalid_argument("Deflator: one value per node is required");
  for (NodeIndex v = 0; v < values_.size(); ++v)
    if (!(values_[v] > 0.0) || !std::isfinite(values_[v]))
      throw std::invalid_argument("Deflator: value at node '" + fam.node(v).id + "' must be strictly positive");
  const double root = values_.front();
  for (double& y : values_) y /= root;
}

Deflator Deflator::factored(const TreeFamily& fam, std::vector<double> martingale_part, std::vector<double> decreasing) {
  if (martingale_part.size() != fam.size() || decreasing.size() != fam.size())
    throw std::invalid_argument("Deflator: factorization needs one value per node");
  const Deflator mart(fam, std::move(martingale_part));
  if (decreasing.front() != 1.0) throw std::invalid_argument("Deflator: decreasing part must equal 1 at the root");
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    if (!(decreasing[v] > 0.0) || decreasing[v] > 1.0)
      throw std::invalid_argument("Deflator: decreasing part at node '" + fam.node(v).id + "' must lie in (0, 1]");
    const NodeIndex p = fam.node(v).parent;
    if (p != kNoNode && decreasing[v] > decreasing[p])
      throw std::invalid_argument("Deflator: decreasing part increases along the edge into '" + fam.node(v).id + "'");
  }
  Deflator out;
  out.values_.resize(fam.size());
  for (NodeIndex v = 0; v < fam.size(); ++v) out.values_[v] = mart.values_[v] * decreasing[v];
  out.martingale_ = mart.values_;
  out.decreasing_ = std::move(decreasing);
  return out;
}

void KilledMeasure::validate(const TreeFamily& fam, double tol) const {
  if (weights.size() != fam.size() || cemetery.size() != fam.size())
    throw std::invalid_argument("KilledMeasure: one entry per node is required");
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto k = static_cast<Index>(fam.node(v).children.size());
    if (weights[v].size() != k) throw std::invalid_argument("KilledMeasure: weight count mismatch at '" + fam.node(v).id + "'");
    if (k == 0) continue;
    if (weights[v].minCoeff() < 0.0 || cemetery[v] < 0.0)
      throw std::invalid_argument("KilledMeasure: negative weight at '" + fam.node(v).id + "'");
    if (std::abs(weights[v].sum() + cemetery[v] - 1.0) > tol)
      throw std::invalid_argument("KilledMeasure: weights at '" + fam.node(v).id + "' do not sum to 1");
  }
}

double KilledMeasure::alive_mass(const TreeFamily& fam, NodeIndex v) const {
  double m = 1.0;
  for (NodeIndex u = v; fam.node(u).parent != kNoNode; u = fam.node(u).parent) {
    const NodeIndex p = fam.node(u).parent;
    const auto& ch = fam.node(p).children;
    const auto c = static_cast<Index>(std::find(ch.begin(), ch.end(), u) - ch.begin());
    m *= weights[p](c);
  }
  return m;
}

SlackReport is_supermartingale_deflator(const TreeFamily& fam, const ModelLaw& P, const Deflator& Y) {
  const auto reach = reach_under(fam, P);
  SlackReport r;
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto& ch = fam.node(v).children;
    if (ch.empty() || reach[v] <= 0.0) continue;
    double e = 0.0;
    for (std::size_t c = 0; c < ch.size(); ++c) e += P.transitions[v](static_cast<Index>(c)) * Y[ch[c]];
    const double excess = e - Y[v];
    if (excess > r.worst) {
      r.worst = excess;
      r.worst_node = v;
    }
  }
  r.ok = r.worst <= 1e-12;
  return r;
}

KilledMeasure follmer_extend(const TreeFamily& fam, const ModelLaw& P, const Deflator& Y) {
  validate_law(fam, P);
  KilledMeasure Q;
  Q.weights.resize(fam.size());
  Q.cemetery.assign(fam.size(), 0.0);
  for (NodeIndex v = 0; v < fam.size(); ++v) {
    const auto& ch = fam.node(v).children;
    Vector q(static_cast<Index>(ch.size()));
    for (std::size_t c = 0; c < ch.size(); ++c)
      q(static_cast<Index>(c)) = P.transitions[v](static_cast<Index>(c)) * Y[ch[c]] / Y[v];
    if (!ch.empty()) {
      const double rest = 1.0 - q.sum();
      if (rest < -1e-12)
        throw std::domain_error("follmer_extend: deflator is not a supermartingale at node '" + fam.node(v).id + "'");
      Q.cemetery[v] = std::max(0.0, rest);
    }
    Q.weights[v] = std::move(q);
  }
  return Q;
}

double density_identity_residual(const TreeFamily& fam, const ModelLaw& P, const Deflator& Y, const KilledMeasure& Q,
                                 int t, const std::vector<NodeIndex>& A) {
  const auto reach = reach_under(fam, P);
  double q_side = 0.0, p_side = 0.0;
  for (NodeIndex v : A) {
    if (v >= fam.size() || fam.node(v).time != t)
      throw std::invalid_argument("density_identity_residual: event contains a node outside time " + std::to_string(t));
    q_side += Q.alive_mass(fam, v);
    p_side += reach[v] * Y[v];
  }
  return std::abs(q_side - p_side);
}

std::vector<Path> sample_killed_paths(const TreeFamily& fam, const KilledMeasure& Q, std::size_t n, std::uint64_t seed) {
  Q.validate(fam, 1e-9);
  const int T = fam.horizon();
  std::vector<double> grid(static_cast<std::size_t>(T) + 1);
  for (int i = 0; i <= T; ++i) grid[static_cast<std::size_t>(i)] = i;
  std::vector<Path> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = stream_rng(seed, i);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Path::Point> values;
    NodeIndex v = 0;
    values.emplace_back(fam.node(0).S);
    bool dead = false;
    for (int step = 0; step < T; ++step) {
      if (!dead) {
        double u = unif(rng), acc = 0.0;
        NodeIndex next = kNoNode;
        const auto& ch = fam.node(v).children;
        for (std::size_t c = 0; c < ch.size(); ++c) {
          acc += Q.weights[v](static_cast<Index>(c));
          if (u < acc) {
            next = ch[c];
            break;
          }
        }
        if (next == kNoNode) {
          dead = true;
        } else {
          v = next;
        }
      }
      if (dead)
        values.emplace_back(std::nullopt);
      else
        values.emplace_back(fam.node(v).S);
    }
    out.emplace_back(grid, std::move(values));
  }
  return out;
}

std::vector<Path> simulate_absorbed_brownian(double x0, double horizon, int steps, std::size_t n, std::uint64_t seed) {
  if (!(x0 > 0.0) || !(horizon > 0.0) || steps < 1)
    throw std::invalid_argument("simulate_absorbed_brownian: need x0 > 0, horizon > 0, steps >= 1");
  const double dt = horizon / steps, sq = std::sqrt(dt);
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = horizon * static_cast<double>(i) / steps;
  std::vector<std::vector<Path::Point>> values(n);
  constexpr std::size_t kBlock = 256;
  parallel_blocks((n + kBlock - 1) / kBlock, [&](std::size_t b) {
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      auto rng = stream_rng(seed, i);
      std::normal_distribution<double> normal;
      auto& vals = values[i];
      vals.reserve(grid.size());
      double x = x0;
      bool dead = false;
      vals.emplace_back(Vector::Constant(1, x));
      for (int k = 0; k < steps; ++k) {
        if (!dead) {
          x += sq * normal(rng);
          dead = x <= 0.0;
        }
        if (dead)
          vals.emplace_back(std::nullopt);
        else
          vals.emplace_back(Vector::Constant(1, x));
      }
    }
  });
  std::vector<Path> out;
  out.reserve(n);
  for (auto& v : values) out.emplace_back(grid, std::move(v));
  return out;
}

AnnouncementReport announce_lifetime(const std::vector<Path>& paths, const std::vector<double>& levels) {
  if (levels.empty()) throw std::invalid_argument("announce_lifetime: no levels");
  for (std::size_t n = 0; n < levels.size(); ++n) {
    if (!(levels[n] > 0.0)) throw std::invalid_argument("announce_lifetime: levels must be positive");
    if (n > 0 && !(levels[n] < levels[n - 1]))
      throw std::invalid_argument("announce_lifetime: levels must be strictly decreasing");
  }
  AnnouncementReport r;
  for (const Path& p : paths) {
    const double zeta = lifetime_time(p);
    const bool killed = !std::isinf(zeta);
    if (killed) ++r.killed_paths;
    std::vector<std::optional<double>> taus;
    for (double eps : levels) {
      std::optional<double> tau;
      for (std::size_t i = 0; i < p.size() && p.alive_at(i); ++i) {
        const double x = p.value(i)(0);
        if (x >= 0.0 && x < eps) {
          tau = p.grid()[i];
          break;
        }
      }
      if (killed && (!tau || *tau >= zeta)) ++r.not_before_lifetime;
      taus.push_back(tau);
    }
    for (std::size_t n = 1; n < taus.size(); ++n) {
      const bool bad = (taus[n] && !taus[n - 1]) || (taus[n] && taus[n - 1] && *taus[n] < *taus[n - 1]);
      if (bad) ++r.non_monotone;
    }
    if (killed && taus.back()) r.max_final_gap = std::max(r.max_final_gap, zeta - *taus.back());
    r.times.push_back(std::move(taus));
  }
  return r;
}

BesselReport inverse_bessel_demo(double horizon, std::size_t n, std::uint64_t seed) {
  if (!(horizon > 0.0)) throw std::invalid_argument("inverse_bessel_demo: horizon must be positive");
  if (n < 1) throw std::invalid_argument("inverse_bessel_demo: need at least one sample");
  constexpr std::size_t kBlock = std::size_t{1} << 15;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> sum(blocks, 0.0), sum_sq(blocks, 0.0);
  const double sd = std::sqrt(horizon);
  parallel_blocks(blocks, [&](std::size_t b) {
    auto rng = stream_rng(seed, b);
    std::normal_distribution<double> normal;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      const double x = 1.0 + sd * normal(rng);
      const double y = sd * normal(rng);
      const double z = sd * normal(rng);
      const double inv_r = 1.0 / std::sqrt(x * x + y * y + z * z);
      s += inv_r;
      s2 += inv_r * inv_r;
    }
    sum[b] = s;
    sum_sq[b] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    s += sum[b];
    s2 += sum_sq[b];
  }
  const double N = static_cast<double>(n);
  BesselReport r;
  r.horizon = horizon;
  r.samples = n;
  r.estimate = s / N;
  const double var = n > 1 ? std::max(0.0, (s2 - N * r.estimate * r.estimate) / (N - 1.0)) : 0.0;
  r.standard_error = std::sqrt(var / N);
  const double phi = normal_cdf(1.0 / sd);
  r.oracle = 2.0 * phi - 1.0;
  r.z_score = r.standard_error > 0.0 ? (r.estimate - r.oracle) / r.standard_error : 0.0;
  r.cemetery_mass = 1.0 - r.estimate;
  r.cemetery_oracle = 2.0 * (1.0 - phi);
  return r;
}

std::string bessel_report_csv(const BesselReport& r) {
  std::ostringstream os;
  char buf[256];
  os << "quantity,estimate,oracle,standard_error,z_score,horizon,samples\n";
  std::snprintf(buf, sizeof buf, "expected_deflator,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", r.estimate, r.oracle,
                r.standard_error, r.z_score, r.horizon, r.samples);
  os << buf;
  const double z_mass = r.standard_error > 0.0 ? (r.cemetery_mass - r.cemetery_oracle) / r.standard_error : 0.0;
  std::snprintf(buf, sizeof buf, "cemetery_mass,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", r.cemetery_mass,
                r.cemetery_oracle, r.standard_error, z_mass, r.horizon, r.samples);
  os << buf;
  return os.str();
}

}  // namespace robusthedge
