#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "conbi/bicombing.hpp"
#include "conbi/error.hpp"
#include "conbi/metric.hpp"
#include "conbi/sampling.hpp"
#include "conbi/wasserstein.hpp"

namespace conbi {

inline constexpr double kDefectTolerance = 1e-9;

/// Largest violation of an inequality over a sample set, with the sample attaining it.
struct DefectReport {
  std::string property;
  double max_violation = 0.0;  // max(0, largest lhs - rhs)
  double max_raw = -std::numeric_limits<double>::infinity();
  std::size_t witness_index = 0;
  std::vector<std::vector<double>> witness_points;
  std::vector<double> witness_params;
  std::size_t samples = 0;
  double tolerance = kDefectTolerance;

  bool passed() const { return max_violation <= tolerance; }
};

/// Points plus scalar parameters (grid values of t, s, lambda ...) for one evaluation.
template <class P>
struct Sample {
  std::vector<P> points;
  std::vector<double> params;
};

/// Evaluates `term` on each sample and keeps the maximum.
template <class P, class Term>
DefectReport sweep(std::string property, const std::vector<Sample<P>>& samples, double tol, Term&& term) {
  DefectReport r;
  r.property = std::move(property);
  r.tolerance = tol;
  r.samples = samples.size();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double v = term(samples[k]);
    if (v > r.max_raw || k == 0) {
      r.max_raw = v;
      r.witness_index = k;
    }
  }
  if (!samples.empty()) {
    const auto& w = samples[r.witness_index];
    for (const auto& p : w.points) r.witness_points.push_back(coords(p));
    r.witness_params = w.params;
    r.max_violation = std::max(0.0, r.max_raw);
  }
  return r;
}

/// `count` samples of `npoints` points and `nparams` grid parameters j/m.
template <class P, class Gen>
std::vector<Sample<P>> make_samples(Rng& rng, std::size_t count, std::size_t npoints, std::size_t nparams, int grid,
                                    Gen&& point) {
  std::vector<Sample<P>> out(count);
  for (auto& s : out) {
    for (std::size_t i = 0; i < npoints; ++i) s.points.push_back(point());
    for (std::size_t i = 0; i < nparams; ++i) s.params.push_back(grid_value(random_grid_index(rng, grid), grid));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-sample terms (lhs - rhs of each inequality)

/// points {x, y, x', y'}, params {t}.
template <class Space>
double conical_term(const Bicombing<Space>& s, const Sample<typename Space::Point>& q) {
  const auto& sp = s.space();
  const auto& p = q.points;
  const double t = q.params[0];
  return sp.distance(s(p[0], p[1], t), s(p[2], p[3], t)) -
         ((1.0 - t) * sp.distance(p[0], p[2]) + t * sp.distance(p[1], p[3]));
}

/// points {x, y}, params {s, t}; |d(sigma(s), sigma(t)) - |s - t| d(x, y)|.
template <class Space>
double geodesic_term(const Bicombing<Space>& s, const Sample<typename Space::Point>& q) {
  const auto& sp = s.space();
  const auto& p = q.points;
  const double a = q.params[0], b = q.params[1];
  return std::abs(sp.distance(s(p[0], p[1], a), s(p[0], p[1], b)) - std::abs(a - b) * sp.distance(p[0], p[1]));
}

/// points {x, y}, params {t}.
template <class Space>
double reversibility_term(const Bicombing<Space>& s, const Sample<typename Space::Point>& q) {
  const auto& p = q.points;
  const double t = q.params[0];
  return s.space().distance(s(p[0], p[1], t), s(p[1], p[0], 1.0 - t));
}

/// points {x, y}, params {s, t, lambda}; d(sigma_xy((1-l)s + l t), sigma_pq(l)) with p, q on sigma_xy.
template <class Space>
double consistency_term(const Bicombing<Space>& s, const Sample<typename Space::Point>& q) {
  const auto& p = q.points;
  const double a = q.params[0], b = q.params[1], lam = q.params[2];
  const auto u = s(p[0], p[1], a);
  const auto v = s(p[0], p[1], b);
  return s.space().distance(s(p[0], p[1], (1.0 - lam) * a + lam * b), s(u, v, lam));
}

/// points {x, y, z}, params {s, t}; midpoint convexity of d(z, sigma_xy(.)).
template <class Space>
double straightness_term(const Bicombing<Space>& s, const Sample<typename Space::Point>& q) {
  const auto& sp = s.space();
  const auto& p = q.points;
  const double a = q.params[0], b = q.params[1];
  return sp.distance(p[2], s(p[0], p[1], 0.5 * (a + b))) -
         0.5 * (sp.distance(p[2], s(p[0], p[1], a)) + sp.distance(p[2], s(p[0], p[1], b)));
}

/// points {x, y, x', y'}, params {s, t}; midpoint convexity of d(sigma_xy(.), sigma_x'y'(.)).
template <class Space>
double convexity_term(const Bicombing<Space>& s, const Sample<typename Space::Point>& q) {
  const auto& sp = s.space();
  const auto& p = q.points;
  const double a = q.params[0], b = q.params[1], m = 0.5 * (a + b);
  return sp.distance(s(p[0], p[1], m), s(p[2], p[3], m)) -
         0.5 * (sp.distance(s(p[0], p[1], a), s(p[2], p[3], a)) + sp.distance(s(p[0], p[1], b), s(p[2], p[3], b)));
}

/// points {x1, x2, y1, y2}, params {t}; d(sigma_x1x2(t), sigma_y1y2(t)) - W1 of the two-point measures.
template <class Space>
double strengthened_term(const Bicombing<Space>& s, const Sample<typename Space::Point>& q) {
  const auto& sp = s.space();
  const auto& p = q.points;
  const double t = q.params[0];
  const double w = w1_two_point(sp, p[0], p[1], t, p[2], p[3], t).value;
  return sp.distance(s(p[0], p[1], t), s(p[2], p[3], t)) - w;
}

// ---------------------------------------------------------------------------
// Defect checkers

template <class Space>
DefectReport conical_defect(const Bicombing<Space>& s, const std::vector<Sample<typename Space::Point>>& samples,
                            double tol = kDefectTolerance) {
  return sweep("conical", samples, tol, [&](const auto& q) { return conical_term(s, q); });
}

template <class Space>
DefectReport geodesic_defect(const Bicombing<Space>& s, const std::vector<Sample<typename Space::Point>>& samples,
                             double tol = kDefectTolerance) {
  return sweep("geodesic", samples, tol, [&](const auto& q) { return geodesic_term(s, q); });
}

template <class Space>
DefectReport reversibility_defect(const Bicombing<Space>& s,
                                  const std::vector<Sample<typename Space::Point>>& samples,
                                  double tol = kDefectTolerance) {
  return sweep("reversibility", samples, tol, [&](const auto& q) { return reversibility_term(s, q); });
}

template <class Space>
DefectReport consistency_defect(const Bicombing<Space>& s, const std::vector<Sample<typename Space::Point>>& samples,
                                double tol = kDefectTolerance) {
  return sweep("consistency", samples, tol, [&](const auto& q) { return consistency_term(s, q); });
}

template <class Space>
DefectReport straightness_defect(const Bicombing<Space>& s,
                                 const std::vector<Sample<typename Space::Point>>& samples,
                                 double tol = kDefectTolerance) {
  return sweep("straightness", samples, tol, [&](const auto& q) { return straightness_term(s, q); });
}

/// With equal_length_only, samples whose two pairs differ in length by more than 1e-12 are skipped.
template <class Space>
DefectReport convexity_defect(const Bicombing<Space>& s, const std::vector<Sample<typename Space::Point>>& samples,
                              bool equal_length_only, double tol = kDefectTolerance) {
  if (!equal_length_only) {
    return sweep("convexity", samples, tol, [&](const auto& q) { return convexity_term(s, q); });
  }
  std::vector<Sample<typename Space::Point>> kept;
  for (const auto& q : samples) {
    const auto& p = q.points;
    if (std::abs(s.space().distance(p[0], p[1]) - s.space().distance(p[2], p[3])) <= 1e-12) kept.push_back(q);
  }
  return sweep("convexity (equal length)", kept, tol, [&](const auto& q) { return convexity_term(s, q); });
}

/// Refuses with PreconditionError unless the bicombing is reversible on the same samples.
template <class Space>
DefectReport strengthened_defect(const Bicombing<Space>& s, const std::vector<Sample<typename Space::Point>>& samples,
                                 double tol = kDefectTolerance) {
  std::vector<Sample<typename Space::Point>> rev;
  for (const auto& q : samples) rev.push_back({{q.points[0], q.points[1]}, q.params});
  const auto r = reversibility_defect(s, rev, tol);
  if (!r.passed()) {
    throw PreconditionError("strengthened inequality needs a reversible bicombing; reversibility defect " +
                            std::to_string(r.max_violation));
  }
  return sweep("strengthened", samples, tol, [&](const auto& q) { return strengthened_term(s, q); });
}

// ---------------------------------------------------------------------------
// Weighted supremum distance between bicombings

struct DoEstimate {
  double value = 0.0;  // max over the enumerated terms: a lower bound, or exact when `exact`
  double upper = 0.0;  // value plus the modulus allowance for t between grid points
  bool exact = false;
  int witness_k = 0;
  std::size_t witness_pair = 0;
  double witness_t = 0.0;
};

/// Smallest k >= 0 with r <= 2^k.
inline int ball_level(double r) {
  int k = 0;
  while (std::ldexp(1.0, k) < r) ++k;
  return k;
}

/// D_o(sigma, tau) = sup 3^-k d(sigma_xy(t), tau_xy(t)) over k, x, y in B_{2^k}(o), t.
///
/// For a pair the k-supremum is attained at the smallest admissible k, so each
/// pair contributes one term per grid t. Pairs needing k > k_max are skipped.
/// `complete` declares that `pairs` enumerates every pair of the space (finite
/// spaces, grid bicombings); otherwise the value is a lower bound and `upper`
/// adds d(x, y)/m per pair, valid because both geodesics are d(x,y)-Lipschitz in t.
template <class Space>
DoEstimate d_o(const Bicombing<Space>& sigma, const Bicombing<Space>& tau, const typename Space::Point& o,
               const std::vector<std::pair<typename Space::Point, typename Space::Point>>& pairs, int k_max = 8,
               bool complete = false) {
  const auto& sp = sigma.space();
  const int m = sigma.grid();
  DoEstimate out;
  out.exact = complete;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [x, y] = pairs[i];
    const int k = ball_level(std::max(sp.distance(o, x), sp.distance(o, y)));
    if (k > k_max) continue;
    const double w = std::pow(3.0, -k);
    for (int j = 0; j <= m; ++j) {
      const double t = grid_value(j, m);
      const double v = w * sp.distance(sigma(x, y, t), tau(x, y, t));
      if (v > out.value) {
        out.value = v;
        out.witness_k = k;
        out.witness_pair = i;
        out.witness_t = t;
      }
    }
    out.upper = std::max(out.upper, out.value);
    if (!complete) out.upper = std::max(out.upper, out.value + w * sp.distance(x, y) / m);
  }
  if (complete) out.upper = out.value;
  return out;
}

// ---------------------------------------------------------------------------
// Operators on bicombings

template <class Space>
void require_same_space(const Bicombing<Space>& a, const Bicombing<Space>& b) {
  if (a.grid() != b.grid()) throw InputError("bicombings use different grids");
}

/// (x, y, s) -> phi(sigma_xy(s), tau_xy(s), t).
template <class Space>
Bicombing<Space> interpolate(const Bicombing<Space>& sigma, const Bicombing<Space>& tau, double t,
                             const Bicombing<Space>& phi) {
  require_same_space(sigma, tau);
  require_same_space(sigma, phi);
  const BicombingFlags f{sigma.claimed().conical && tau.claimed().conical && phi.claimed().conical,
                         sigma.claimed().reversible && tau.claimed().reversible, false};
  return Bicombing<Space>(
      "interp(" + sigma.name() + "," + tau.name() + "," + std::to_string(t) + ")", sigma.space(),
      [sigma, tau, phi, t](const auto& x, const auto& y, double s) { return phi(sigma(x, y, s), tau(x, y, s), t); }, f,
      sigma.grid());
}

/// r(tau)(x, y, t) = base(tau_xy(t), tau_yx(1 - t), 1/2).
template <class Space>
Bicombing<Space> reversal_step(const Bicombing<Space>& tau, const Bicombing<Space>& base) {
  require_same_space(tau, base);
  return Bicombing<Space>(
      "r(" + tau.name() + ")", tau.space(),
      [tau, base](const auto& x, const auto& y, double t) { return base(tau(x, y, t), tau(y, x, 1.0 - t), 0.5); },
      BicombingFlags{tau.claimed().conical && base.claimed().conical, false, false}, tau.grid());
}

template <class Space>
struct ReversalTrace {
  Bicombing<Space> result;
  std::vector<double> defects;  // reversibility defect before each step and after the last
  bool converged = false;
};

/// Applies reversal_step until the sampled reversibility defect is <= eps or the budget is spent.
template <class Space>
ReversalTrace<Space> iterate_reversal(const Bicombing<Space>& tau, const Bicombing<Space>& base, double eps,
                                      int budget, const std::vector<Sample<typename Space::Point>>& samples) {
  ReversalTrace<Space> out{tau, {}, false};
  for (int step = 0;; ++step) {
    const double d = reversibility_defect(out.result, samples, eps).max_violation;
    out.defects.push_back(d);
    if (d <= eps) {
      out.converged = true;
      return out;
    }
    if (step >= budget) return out;
    out.result = reversal_step(out.result, base);
  }
}

template <class P>
struct Isometry {
  std::string name;
  std::function<P(const P&)> forward;
  std::function<P(const P&)> inverse;
};

template <class P>
Isometry<P> identity_isometry() {
  return {"id", [](const P& p) { return p; }, [](const P& p) { return p; }};
}

/// (x, y, t) -> f^-1(tau(f(x), f(y), t)).
template <class Space>
Bicombing<Space> conjugate(const Bicombing<Space>& tau, const Isometry<typename Space::Point>& f) {
  return Bicombing<Space>(
      f.name + "*" + tau.name(), tau.space(),
      [tau, f](const auto& x, const auto& y, double t) { return f.inverse(tau(f.forward(x), f.forward(y), t)); },
      tau.claimed(), tau.grid());
}

/// points {x, y}, params {t}; d(f(sigma(x, y, t)), sigma(f x, f y, t)).
template <class Space>
DefectReport equivariance_defect(const Bicombing<Space>& s, const Isometry<typename Space::Point>& f,
                                 const std::vector<Sample<typename Space::Point>>& samples,
                                 double tol = kDefectTolerance) {
  return sweep("equivariance under " + f.name, samples, tol, [&](const auto& q) {
    const auto& p = q.points;
    const double t = q.params[0];
    return s.space().distance(f.forward(s(p[0], p[1], t)), s(f.forward(p[0]), f.forward(p[1]), t));
  });
}

/// Checks d(f p, f q) = d(p, q) and f^-1 f = id on the sampled points.
template <class Space>
DefectReport isometry_defect(const Space& space, const Isometry<typename Space::Point>& f,
                             const std::vector<Sample<typename Space::Point>>& samples, double tol = 1e-12) {
  return sweep("isometry " + f.name, samples, tol, [&](const auto& q) {
    const auto& p = q.points;
    const double a = std::abs(space.distance(f.forward(p[0]), f.forward(p[1])) - space.distance(p[0], p[1]));
    const double b = space.distance(f.inverse(f.forward(p[0])), p[0]);
    return std::max(a, b);
  });
}

/// interpolate(tau, f tau, 1/2, phi) for an involution f; equivariant under f when phi's midpoint is symmetric.
template <class Space>
Bicombing<Space> symmetrize_involution(const Bicombing<Space>& tau, const Isometry<typename Space::Point>& f,
                                       const Bicombing<Space>& phi,
                                       const std::vector<Sample<typename Space::Point>>& samples,
                                       double tol = 1e-12) {
  for (const auto& q : samples) {
    for (const auto& p : q.points) {
      if (tau.space().distance(f.forward(f.forward(p)), p) > tol) {
        throw PreconditionError("symmetrize_involution: " + f.name + " is not an involution on the samples");
      }
    }
  }
  return interpolate(tau, conjugate(tau, f), 0.5, phi).renamed("sym_" + f.name + "(" + tau.name() + ")");
}

// ---------------------------------------------------------------------------
// Test inputs

/// Linear segments with a vertical bulge kappa t(1-t) (|dx| - |dy|)_+ sign(dx) on linf^2.
///
/// Geodesic for kappa <= 1/2, but the bulge flips sign when the endpoints are
/// swapped, so it is not reversible. It is not equivariant under (s, t) -> (-s, t).
template <CoordinateSpace Space>
Bicombing<Space> twisted_bicombing(const Space& space, double kappa = 0.5, int grid = kDefaultGrid) {
  return Bicombing<Space>(
      "twisted", space,
      [kappa](const Vec& x, const Vec& y, double t) -> Vec {
        Vec p = (1.0 - t) * x + t * y;
        const double d1 = y[0] - x[0], d2 = y[1] - x[1];
        const double c = std::max(0.0, std::abs(d1) - std::abs(d2)) * (d1 > 0 ? 1.0 : (d1 < 0 ? -1.0 : 0.0));
        p[1] += kappa * t * (1.0 - t) * c;
        return p;
      },
      BicombingFlags{false, false, false}, grid);
}

/// Displaces the midpoint of one ordered pair by `offset` in the last coordinate.
template <CoordinateSpace Space>
Bicombing<Space> corrupted_bicombing(const Bicombing<Space>& base, const Vec& x0, const Vec& y0, double offset) {
  return Bicombing<Space>(
      base.name() + "+corrupt", base.space(),
      [base, x0, y0, offset](const Vec& x, const Vec& y, double t) -> Vec {
        Vec p = base(x, y, t);
        if (t == 0.5 && point_equal(x, x0) && point_equal(y, y0)) p[p.size() - 1] += offset;
        return p;
      },
      BicombingFlags{}, base.grid());
}

}  // namespace conbi
