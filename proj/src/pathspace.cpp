#include "robusthedge/pathspace.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace robusthedge {

Path::Path(std::vector<double> grid, std::vector<Point> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.empty()) throw std::invalid_argument("Path: empty grid");
  if (grid_.size() != values_.size()) throw std::invalid_argument("Path: grid and values differ in length");
  if (grid_.front() != 0.0) throw std::invalid_argument("Path: grid must start at 0");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    if (!(grid_[i] > grid_[i - 1]) || !std::isfinite(grid_[i]))
      throw std::invalid_argument("Path: grid must be strictly increasing and finite");
  if (!values_.front()) throw std::invalid_argument("Path: initial value cannot be the cemetery");
  const Index d = values_.front()->size();
  bool dead = false;
  for (const auto& v : values_) {
    if (!v) {
      dead = true;
      continue;
    }
    if (dead) throw std::invalid_argument("Path: cemetery must be absorbing");
    if (v->size() != d) throw std::invalid_argument("Path: inconsistent dimension");
    if (!v->allFinite()) throw std::invalid_argument("Path: non-finite component");
  }
}

Path Path::alive(std::vector<double> grid, const std::vector<Vector>& points) {
  std::vector<Point> values(points.begin(), points.end());
  return Path(std::move(grid), std::move(values));
}

const Vector& Path::value(std::size_t i) const {
  if (!values_.at(i)) throw std::logic_error("Path: value requested at a cemetery entry");
  return *values_[i];
}

Path::Point Path::at_time(double t) const {
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  if (it == grid_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - grid_.begin()) - 1];
}

bool Path::operator==(const Path& other) const {
  if (grid_ != other.grid_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].has_value() != other.values_[i].has_value()) return false;
    if (values_[i] && *values_[i] != *other.values_[i]) return false;
  }
  return true;
}

Lifetime lifetime(const Path& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!p.alive_at(i)) return Lifetime::at(i);
  return Lifetime::infinite();
}

double lifetime_time(const Path& p) {
  const Lifetime z = lifetime(p);
  return z.is_infinite() ? kInfinity : p.grid()[z.index()];
}

Path kill_at(const Path& p, double t) {
  if (t < 0.0) throw std::invalid_argument("kill_at: negative time");
  std::vector<Path::Point> values = p.values();
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.grid()[i] >= t) values[i].reset();
  if (!values.front()) throw std::invalid_argument("kill_at: killing at time 0 leaves no alive segment");
  return Path(p.grid(), std::move(values));
}

Path concat(const Path& prefix, double t, const Path& suffix) {
  const auto& g = prefix.grid();
  auto it = std::find(g.begin(), g.end(), t);
  if (it == g.end()) throw std::invalid_argument("concat: t is not a grid point of the prefix");
  const auto k = static_cast<std::size_t>(it - g.begin());
  if (!prefix.alive_at(k)) throw std::invalid_argument("concat: prefix is dead at t");
  if (suffix.dimension() != prefix.dimension()) throw std::invalid_argument("concat: dimension mismatch");
  if (!suffix.value(0).isZero(0.0)) throw std::invalid_argument("concat: suffix must start at the origin");

  std::vector<double> grid(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<Path::Point> values(prefix.values().begin(), prefix.values().begin() + static_cast<std::ptrdiff_t>(k));
  const Vector& anchor = prefix.value(k);
  for (std::size_t j = 0; j < suffix.size(); ++j) {
    grid.push_back(t + suffix.grid()[j]);
    if (suffix.alive_at(j))
      values.emplace_back(Vector(anchor + suffix.value(j)));
    else
      values.emplace_back(std::nullopt);
  }
  return Path(std::move(grid), std::move(values));
}

namespace {

struct Segment {
  double start;  // in the time-changed clock u
  Vector value;
};

// Piecewise-constant representation of p o e_zeta on [0, inf).
std::vector<Segment> time_changed(const Path& p) {
  const double z = lifetime_time(p);
  std::vector<Segment> out;
  for (std::size_t i = 0; i < p.size() && p.alive_at(i); ++i)
    out.push_back({inverse_time_change(z, p.grid()[i]), p.value(i)});
  return out;
}

}  // namespace

double distance(const Path& p, const Path& q) {
  if (p.dimension() != q.dimension()) throw std::invalid_argument("distance: dimension mismatch");
  const double zp = lifetime_time(p);
  const double zq = lifetime_time(q);
  const double inv_p = std::isinf(zp) ? 0.0 : 1.0 / zp;
  const double inv_q = std::isinf(zq) ? 0.0 : 1.0 / zq;
  const double lifetime_term = std::abs(inv_p - inv_q);

  const auto a = time_changed(p);
  const auto b = time_changed(q);
  std::vector<double> breaks;
  for (const auto& s : a) breaks.push_back(s.start);
  for (const auto& s : b) breaks.push_back(s.start);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // sup_{s<=u} |x_s - y_s| is a step function of u; integrate min(1, .) e^{-u} du.
  std::size_t ia = 0, ib = 0;
  double running_max = 0.0, integral = 0.0;
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const double u = breaks[k];
    while (ia + 1 < a.size() && a[ia + 1].start <= u) ++ia;
    while (ib + 1 < b.size() && b[ib + 1].start <= u) ++ib;
    running_max = std::max(running_max, (a[ia].value - b[ib].value).norm());
    const double weight = k + 1 < breaks.size() ? std::exp(-u) - std::exp(-breaks[k + 1]) : std::exp(-u);
    integral += std::min(1.0, running_max) * weight;
  }
  return lifetime_term + integral;
}

std::string path_to_csv(const Path& p, bool header) {
  std::ostringstream os;
  const Index d = p.dimension();
  char buf[64];
  if (header) {
    os << "time";
    for (Index j = 0; j < d; ++j) os << ",x_" << (j + 1);
    os << ",alive\n";
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p.grid()[i]);
    os << buf;
    for (Index j = 0; j < d; ++j) {
      os << ',';
      if (p.alive_at(i)) {
        std::snprintf(buf, sizeof buf, "%.17g", p.value(i)(j));
        os << buf;
      }
    }
    os << ',' << (p.alive_at(i) ? 1 : 0) << '\n';
  }
  return os.str();
}

Path path_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<double> grid;
  std::vector<Path::Point> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("time", 0) == 0) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() < 3) throw std::invalid_argument("path_from_csv: malformed row '" + line + "'");
    grid.push_back(std::stod(cells.front()));
    const bool alive = cells.back() == "1";
    if (!alive && cells.back() != "0") throw std::invalid_argument("path_from_csv: alive flag must be 0 or 1");
    if (alive) {
      Vector v(static_cast<Index>(cells.size() - 2));
      for (std::size_t j = 1; j + 1 < cells.size(); ++j) v(static_cast<Index>(j - 1)) = std::stod(cells[j]);
      values.emplace_back(std::move(v));
    } else {
      values.emplace_back(std::nullopt);
    }
  }
  return Path(std::move(grid), std::move(values));
}

}  // namespace robusthedge
