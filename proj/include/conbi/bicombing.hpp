#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "conbi/metric.hpp"

namespace conbi {

/// Default denominator m of the parameter grid t = j/m (divisible by 2, 3, 4, 5, 8).
inline constexpr int kDefaultGrid = 120;

inline double grid_value(int j, int m) { return static_cast<double>(j) / static_cast<double>(m); }

/// Properties a construction claims. Claims are checked by the defect checkers, never trusted.
struct BicombingFlags {
  bool conical = false;
  bool reversible = false;
  bool consistent = false;
};

/// An evaluable geodesic bicombing sigma(x, y, t) on a space.
///
/// Endpoints are returned exactly: t <= 0 yields x and t >= 1 yields y without
/// calling the underlying construction.
template <class Space>
class Bicombing {
 public:
  using SpaceType = Space;
  using Point = typename Space::Point;
  using Eval = std::function<Point(const Point&, const Point&, double)>;

  Bicombing(std::string name, Space space, Eval eval, BicombingFlags claimed = {}, int grid = kDefaultGrid)
      : name_(std::move(name)),
        space_(std::make_shared<const Space>(std::move(space))),
        eval_(std::move(eval)),
        claimed_(claimed),
        grid_(grid) {}

  Point operator()(const Point& x, const Point& y, double t) const {
    if (t <= 0.0) return x;
    if (t >= 1.0) return y;
    return eval_(x, y, t);
  }

  Point midpoint(const Point& x, const Point& y) const { return (*this)(x, y, 0.5); }

  const std::string& name() const { return name_; }
  const Space& space() const { return *space_; }
  const BicombingFlags& claimed() const { return claimed_; }
  int grid() const { return grid_; }

  Bicombing renamed(std::string name) const {
    Bicombing copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

 private:
  std::string name_;
  std::shared_ptr<const Space> space_;
  Eval eval_;
  BicombingFlags claimed_;
  int grid_;
};

template <class S>
concept CoordinateSpace = std::is_same_v<S, LinfSpace> || std::is_same_v<S, HalfPlane>;

/// sigma(x, y, t) = (1 - t) x + t y on a convex coordinate space.
template <CoordinateSpace Space>
Bicombing<Space> linear_bicombing(const Space& space, int grid = kDefaultGrid) {
  return Bicombing<Space>(
      "linear", space, [](const Vec& x, const Vec& y, double t) -> Vec { return (1.0 - t) * x + t * y; },
      BicombingFlags{true, true, true}, grid);
}

}  // namespace conbi
