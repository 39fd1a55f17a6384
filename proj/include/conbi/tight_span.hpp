#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "conbi/bicombing.hpp"
#include "conbi/error.hpp"
#include "conbi/metric.hpp"
#include "conbi/sampling.hpp"

namespace conbi {

inline constexpr double kRetractTolerance = 1e-10;
inline constexpr long kRetractBudget = 100000;

/// e(x) = d(x, .).
inline Vec embed(const TightSpan& ts, std::size_t x) {
  if (x >= static_cast<std::size_t>(ts.base_size())) throw InputError("embed: index out of range");
  return ts.d().row(static_cast<Eigen::Index>(x)).transpose();
}

inline Vec star(const TightSpan& ts, const Vec& f) { return ts.star(f); }

/// ||f - f*|| <= eps and f in Delta(X) up to eps.
inline bool is_extremal(const TightSpan& ts, const Vec& f, double eps = 1e-8) {
  return f.size() == ts.base_size() && f.allFinite() && ts.residual(f) <= eps && ts.delta_slack(f) >= -eps;
}

struct RetractResult {
  Vec value;
  double residual = 0.0;
  long iterations = 0;
  bool converged = false;
  /// Every iterate was pointwise below its predecessor and nonnegative (up to 1e-12).
  bool monotone = true;
};

/// 1-Lipschitz retraction of R^X onto E(X).
///
/// g0 = f v f* lies in Delta(X); then g <- (g + g*)/2 decreases pointwise to an
/// extremal function. Points of E(X) are returned unchanged.
inline RetractResult retract_report(const TightSpan& ts, const Vec& f, double eps = kRetractTolerance,
                                    long budget = kRetractBudget) {
  if (f.size() != ts.base_size()) throw InputError("retract: wrong vector length");
  RetractResult out;
  Vec g = f.cwiseMax(ts.star(f));
  Vec gs = ts.star(g);
  out.residual = sup_distance(g, gs);
  while (out.residual > eps) {
    if (out.iterations >= budget) {
      out.value = g;
      return out;
    }
    Vec next = 0.5 * (g + gs);
    if ((next - g).maxCoeff() > 1e-12 || next.minCoeff() < -1e-12) out.monotone = false;
    g = next;
    gs = ts.star(g);
    out.residual = sup_distance(g, gs);
    ++out.iterations;
  }
  out.value = g;
  out.converged = true;
  return out;
}

/// As retract_report, but throws BudgetExceeded instead of returning an unconverged iterate.
inline Vec retract(const TightSpan& ts, const Vec& f, double eps = kRetractTolerance, long budget = kRetractBudget) {
  auto r = retract_report(ts, f, eps, budget);
  if (!r.converged) {
    throw BudgetExceeded("retract: residual " + std::to_string(r.residual) + " after " + std::to_string(r.iterations) +
                         " iterations");
  }
  return r.value;
}

/// sigma(f, g, t) = retract((1 - t) f + t g).
///
/// Grid values are evaluated with the endpoints in canonical order, so
/// sigma(f, g, t) and sigma(g, f, 1 - t) agree bit for bit.
inline Bicombing<TightSpan> ex_bicombing(const TightSpan& ts, double eps = kRetractTolerance, int grid = kDefaultGrid) {
  return Bicombing<TightSpan>(
      "ex", ts,
      [ts, eps, grid](const Vec& f, const Vec& g, double t) -> Vec {
        if (point_equal(f, g)) return f;
        const double j = std::round(t * grid);
        if (std::abs(t * grid - j) <= 1e-9 && point_less(g, f)) {
          const double s = (grid - j) / grid;
          return retract(ts, (1.0 - s) * g + s * f, eps);
        }
        if (std::abs(t * grid - j) <= 1e-9) t = j / grid;
        return retract(ts, (1.0 - t) * f + t * g, eps);
      },
      BicombingFlags{true, true, false}, grid);
}

/// g(y) = min_x f(x) + ||y - e(x)||, the largest 1-Lipschitz extension of f to E(X).
inline double lipschitz_extend_real(const TightSpan& ts, const std::vector<double>& f, const Vec& y,
                                    double tol = 1e-12) {
  const int n = ts.base_size();
  if (static_cast<int>(f.size()) != n) throw InputError("lipschitz_extend_real: wrong function length");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (f[i] - f[j] > ts.d()(i, j) + tol) {
        throw PreconditionError("function is not 1-Lipschitz at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) best = std::min(best, f[i] + sup_distance(y, embed(ts, static_cast<std::size_t>(i))));
  return best;
}

/// A point of E(X) obtained by retracting a random vector near the embedded points.
inline Vec random_tightspan_point(Rng& rng, const TightSpan& ts) {
  const double diam = ts.d().maxCoeff();
  Vec f(ts.base_size());
  for (int i = 0; i < ts.base_size(); ++i) f[i] = uniform_real(rng, 0.0, diam);
  return retract(ts, f);
}

struct BallIntersection {
  Vec point;
  double max_violation = 0.0;  // max over balls of ||point - center|| - radius
  double residual = 0.0;
  /// min over coordinates of upper - lower corner; negative means the balls do not pairwise meet.
  double box_gap = 0.0;
  long iterations = 0;
  bool success = false;
};

/// Common point in E(X) of the closed balls B(center_s, radius_s).
///
/// The upper corner U = min_s (center_s + radius_s) lies in Delta(X) when the
/// balls pairwise intersect, and U* is the lower corner of the box. The
/// averaged-star iteration from U stays in the box, so its limit is a point of
/// E(X) inside every ball. The result is verified against every ball.
inline BallIntersection ball_intersection(const TightSpan& ts, const std::vector<Vec>& centers,
                                          const std::vector<double>& radii, double eps = kRetractTolerance,
                                          long budget = kRetractBudget) {
  if (centers.empty() || centers.size() != radii.size()) throw InputError("ball_intersection: bad ball list");
  const int n = ts.base_size();
  Vec upper = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec lower = Vec::Constant(n, -std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < centers.size(); ++s) {
    upper = upper.cwiseMin((centers[s].array() + radii[s]).matrix());
    lower = lower.cwiseMax((centers[s].array() - radii[s]).matrix());
  }
  BallIntersection out;
  out.box_gap = (upper - lower).minCoeff();
  auto r = retract_report(ts, upper, eps, budget);
  out.point = r.value;
  out.residual = r.residual;
  out.iterations = r.iterations;
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < centers.size(); ++s) {
    out.max_violation = std::max(out.max_violation, sup_distance(out.point, centers[s]) - radii[s]);
  }
  out.success = r.converged;
  return out;
}

}  // namespace conbi
