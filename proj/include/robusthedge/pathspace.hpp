#pragma once

#include "robusthedge/types.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace robusthedge {

/// Grid index of the first cemetery entry, or infinite.
class Lifetime {
 public:
  static Lifetime infinite() { return Lifetime(); }
  static Lifetime at(std::size_t index) { return Lifetime(index); }

  bool is_infinite() const { return !index_.has_value(); }
  std::size_t index() const {
    if (!index_) throw std::logic_error("Lifetime: infinite lifetime has no index");
    return *index_;
  }
  bool operator==(const Lifetime&) const = default;

 private:
  Lifetime() = default;
  explicit Lifetime(std::size_t i) : index_(i) {}
  std::optional<std::size_t> index_;
};

/// Piecewise-constant trajectory in R^d extended by a cemetery state.
///
/// A disengaged optional encodes the cemetery. The grid is strictly
/// increasing and starts at 0; the first value is alive; cemetery entries are
/// absorbing. All of this is checked at construction.
class Path {
 public:
  using Point = std::optional<Vector>;

  Path(std::vector<double> grid, std::vector<Point> values);

  /// Never-dying path from plain points.
  static Path alive(std::vector<double> grid, const std::vector<Vector>& points);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Point>& values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  Index dimension() const { return values_.front()->size(); }
  bool alive_at(std::size_t i) const { return values_[i].has_value(); }
  const Vector& value(std::size_t i) const;

  /// Value of the step function at time t (cemetery after the lifetime,
  /// last value after the final grid point).
  Point at_time(double t) const;

  bool operator==(const Path& other) const;

 private:
  std::vector<double> grid_;
  std::vector<Point> values_;
};

Lifetime lifetime(const Path& p);

/// Grid time of the first cemetery entry, +infinity for a path that never dies.
double lifetime_time(const Path& p);

/// Kills the path at every grid point >= t.
Path kill_at(const Path& p, double t);

/// prefix before t, then prefix(t) + suffix(s - t); x + cemetery = cemetery.
/// `t` must be a grid point of `prefix` where it is alive, and `suffix` must
/// start at the origin.
Path concat(const Path& prefix, double t, const Path& suffix);

/// Maps [0, inf) onto [0, z): identity for z = inf, z(1 - e^{-t}) otherwise.
template <typename Scalar>
Scalar time_change(Scalar z, Scalar t) {
  if (!(z > Scalar(0))) throw std::invalid_argument("time_change: lifetime parameter must be positive");
  if (t < Scalar(0)) throw std::invalid_argument("time_change: time must be nonnegative");
  if (std::isinf(z)) return t;
  return -z * std::expm1(-t);
}

/// Inverse of time_change on [0, z).
template <typename Scalar>
Scalar inverse_time_change(Scalar z, Scalar u) {
  if (!(z > Scalar(0))) throw std::invalid_argument("inverse_time_change: lifetime parameter must be positive");
  if (u < Scalar(0) || (!std::isinf(z) && u >= z))
    throw std::invalid_argument("inverse_time_change: argument outside [0, z)");
  if (std::isinf(z)) return u;
  return -std::log1p(-u / z);
}

/// Lifetime distance |1/zeta - 1/zeta'| plus an e^{-u}-weighted locally
/// uniform distance between the time-changed alive segments.
double distance(const Path& p, const Path& q);

/// CSV rows `time,x_1..x_d,alive`; cemetery rows leave the components blank.
std::string path_to_csv(const Path& p, bool header = true);
Path path_from_csv(const std::string& text);

}  // namespace robusthedge
