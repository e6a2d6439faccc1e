#include "robusthedge/superhedge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace robusthedge {

namespace {

struct VolInterval {
  double lo2;
  double hi2;
};

VolInterval volatility_interval(const UncertaintySpec& spec) {
  if (spec.dimension() != 1) throw std::invalid_argument("bsb_solve: the PDE engine is one-dimensional");
  if (!spec.relative_volatility)
    throw std::invalid_argument("bsb_solve: needs a spec with relative volatility");
  if (spec.sigma2_set.empty()) return {spec.sigma2_lo(0), spec.sigma2_hi(0)};
  VolInterval v{kInfinity, -kInfinity};
  for (const Matrix& m : spec.sigma2_set) {
    v.lo2 = std::min(v.lo2, m(0, 0));
    v.hi2 = std::max(v.hi2, m(0, 0));
  }
  return v;
}

// Solves a tridiagonal system in place (Thomas algorithm).
void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c, std::vector<double>& r) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    r[i] -= m * r[i - 1];
  }
  r[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) r[i] = (r[i] - c[i] * r[i + 1]) / b[i];
}

double interp(const std::vector<double>& xs, double x, std::size_t& j) {
  if (x <= xs.front()) {
    j = 0;
    return 0.0;
  }
  if (x >= xs.back()) {
    j = xs.size() - 2;
    return 1.0;
  }
  const double h = xs[1] - xs[0];
  j = std::min(static_cast<std::size_t>((x - xs.front()) / h), xs.size() - 2);
  return (x - xs[j]) / h;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double black_scholes_call(double S, double K, double sigma, double T) {
  if (!(S > 0.0) || !(K > 0.0)) throw std::invalid_argument("black_scholes_call: S and K must be positive");
  if (T <= 0.0 || sigma <= 0.0) return std::max(S - K, 0.0);
  const double sd = sigma * std::sqrt(T);
  const double d1 = (std::log(S / K) + 0.5 * sd * sd) / sd;
  return S * norm_cdf(d1) - K * norm_cdf(d1 - sd);
}

BsbSurface bsb_solve(const UncertaintySpec& spec, const Claim& claim, const BsbGrid& grid, Stepper stepper) {
  spec.validate();
  claim.validate();
  if (claim.type == "table") throw std::invalid_argument("bsb_solve: table claims are tree-only");
  const auto vol = volatility_interval(spec);
  if (!(vol.lo2 > 0.0)) throw std::invalid_argument("bsb_solve: sigma_lo must be strictly positive");
  if (grid.nt < 1 || grid.ns < 2) throw std::invalid_argument("bsb_solve: grid needs nt >= 1 and ns >= 2");
  if (!(grid.smax > spec.S0(0))) throw std::invalid_argument("bsb_solve: smax must exceed S0");

  const int nt = grid.nt, ns = grid.ns;
  const double T = spec.horizon, dt = T / nt, ds = grid.smax / ns;
  if (stepper == Stepper::kExplicit && dt > ds * ds / (vol.hi2 * grid.smax * grid.smax))
    throw std::domain_error("bsb_solve: explicit stepper is unstable on this grid (dt > ds^2 / (sigma_hi^2 smax^2))");

  BsbSurface out;
  out.t.resize(static_cast<std::size_t>(nt) + 1);
  out.s.resize(static_cast<std::size_t>(ns) + 1);
  for (int n = 0; n <= nt; ++n) out.t[static_cast<std::size_t>(n)] = n * dt;
  out.t.back() = T;
  for (int j = 0; j <= ns; ++j) out.s[static_cast<std::size_t>(j)] = j * ds;
  out.value.resize(nt + 1, ns + 1);
  out.delta.resize(nt + 1, ns + 1);

  std::vector<double> v(static_cast<std::size_t>(ns) + 1);
  for (int j = 0; j <= ns; ++j) v[static_cast<std::size_t>(j)] = claim.of_scalar(out.s[static_cast<std::size_t>(j)]);
  const double v0 = v[0];
  for (int j = 0; j <= ns; ++j) out.value(nt, j) = v[static_cast<std::size_t>(j)];

  std::vector<double> sigma2(static_cast<std::size_t>(ns) + 1);
  auto select = [&](const std::vector<double>& w) {
    for (int j = 1; j < ns; ++j) {
      const auto u = static_cast<std::size_t>(j);
      sigma2[u] = (w[u + 1] - 2.0 * w[u] + w[u - 1]) >= 0.0 ? vol.hi2 : vol.lo2;
    }
  };
  auto coefficient = [&](int j) {
    const double s = out.s[static_cast<std::size_t>(j)];
    return 0.5 * sigma2[static_cast<std::size_t>(j)] * s * s * dt / (ds * ds);
  };
  // Interior unknowns 1..ns-1; the linear condition at smax leaves row ns-1
  // without diffusion, and v(ns) is recovered by extrapolation.
  auto implicit_step = [&](const std::vector<double>& prev) {
    const std::size_t m = static_cast<std::size_t>(ns) - 1;
    std::vector<double> a(m, 0.0), b(m, 1.0), c(m, 0.0), r(m);
    for (std::size_t i = 0; i < m; ++i) {
      const int j = static_cast<int>(i) + 1;
      r[i] = prev[i + 1];
      if (j == ns - 1) continue;
      const double k = coefficient(j);
      a[i] = -k;
      b[i] = 1.0 + 2.0 * k;
      c[i] = -k;
      if (j == 1) {
        r[i] += k * v0;
        a[i] = 0.0;
      }
    }
    thomas(a, b, c, r);
    std::vector<double> next(prev.size());
    next[0] = v0;
    for (std::size_t i = 0; i < m; ++i) next[i + 1] = r[i];
    next[static_cast<std::size_t>(ns)] = 2.0 * next[static_cast<std::size_t>(ns) - 1] - next[static_cast<std::size_t>(ns) - 2];
    return next;
  };

  for (int n = nt - 1; n >= 0; --n) {
    select(v);
    std::vector<double> next;
    if (stepper == Stepper::kImplicit) {
      next = implicit_step(v);
      select(next);
      next = implicit_step(v);
    } else {
      next.resize(v.size());
      next[0] = v0;
      for (int j = 1; j < ns; ++j) {
        const auto u = static_cast<std::size_t>(j);
        next[u] = v[u] + coefficient(j) * (v[u + 1] - 2.0 * v[u] + v[u - 1]);
      }
      next[static_cast<std::size_t>(ns)] = 2.0 * next[static_cast<std::size_t>(ns) - 1] - next[static_cast<std::size_t>(ns) - 2];
    }
    for (int j = 1; j < ns; ++j)
      if (sigma2[static_cast<std::size_t>(j)] == vol.hi2) ++out.hi_selections;
    v = std::move(next);
    for (int j = 0; j <= ns; ++j) out.value(n, j) = v[static_cast<std::size_t>(j)];
  }

  for (int n = 0; n <= nt; ++n) {
    out.delta(n, 0) = (out.value(n, 1) - out.value(n, 0)) / ds;
    out.delta(n, ns) = (out.value(n, ns) - out.value(n, ns - 1)) / ds;
    for (int j = 1; j < ns; ++j) out.delta(n, j) = (out.value(n, j + 1) - out.value(n, j - 1)) / (2.0 * ds);
  }
  return out;
}

double BsbSurface::price_at(double S) const { return value_at(0.0, S); }

double BsbSurface::value_at(double time, double S) const {
  std::size_t i = 0, j = 0;
  const double a = interp(t, time, i), b = interp(s, S, j);
  return (1 - a) * ((1 - b) * value(i, j) + b * value(i, j + 1)) + a * ((1 - b) * value(i + 1, j) + b * value(i + 1, j + 1));
}

double BsbSurface::delta_at(double time, double S) const {
  std::size_t i = 0, j = 0;
  const double a = interp(t, time, i), b = interp(s, S, j);
  return (1 - a) * ((1 - b) * delta(i, j) + b * delta(i, j + 1)) + a * ((1 - b) * delta(i + 1, j) + b * delta(i + 1, j + 1));
}

std::string surface_to_csv(const BsbSurface& surface) {
  std::string out = "t,s,value,delta\n";
  char buf[128];
  for (std::size_t n = 0; n < surface.t.size(); ++n) {
    for (std::size_t j = 0; j < surface.s.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", surface.t[n], surface.s[j],
                    surface.value(static_cast<Index>(n), static_cast<Index>(j)),
                    surface.delta(static_cast<Index>(n), static_cast<Index>(j)));
      out += buf;
    }
  }
  return out;
}

}  // namespace robusthedge
