#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "conbi/bicombing.hpp"
#include "conbi/metric.hpp"
#include "conbi/moduli.hpp"
#include "conbi/rational.hpp"
#include "conbi/simplex.hpp"
#include "conbi/wasserstein.hpp"

namespace conbi {

namespace detail {

// p2 + sum_j w_j ||p - x_j||.
inline double height_cost(double p1, double p2, const std::vector<Vec>& atoms, const std::vector<double>& w) {
  double c = p2;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    c += w[j] * std::max(std::abs(p1 - atoms[j][0]), std::abs(p2 - atoms[j][1]));
  }
  return c;
}

}  // namespace detail

/// Half-plane barycenter for atoms with real weights.
///
/// The first coordinate is the weighted mean of the first coordinates: the
/// objective p1 + sum w_j ||p - x_j|| is bounded below by it and approaches it
/// as p1 -> -inf. The second coordinate minimises a convex piecewise-linear
/// function over H whose breaks lie on the diagonals through the atoms and on
/// the boundary line, so the minimum is attained at one of their crossings.
inline Vec beta_h_weighted(const std::vector<Vec>& atoms, const std::vector<double>& w) {
  if (atoms.empty() || atoms.size() != w.size()) throw InputError("beta_h: bad measure");
  double mean1 = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) mean1 += w[j] * atoms[j][0];

  // Diagonals p1 - p2 = a_j - b_j and p1 + p2 = a_j + b_j.
  std::vector<double> minus, plus;
  for (const auto& x : atoms) {
    minus.push_back(x[0] - x[1]);
    plus.push_back(x[0] + x[1]);
  }
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](double p1, double p2) {
    if (p2 < 0.0) return;
    best = std::min(best, detail::height_cost(p1, p2, atoms, w));
  };
  for (double m : minus) {
    for (double p : plus) consider(0.5 * (m + p), 0.5 * (p - m));
    consider(m, 0.0);
  }
  for (double p : plus) consider(p, 0.0);
  return make_vec({mean1, best});
}

/// beta_H(mu) on the half-plane.
inline Vec beta_h(const DiscreteMeasure<Vec>& mu) {
  HalfPlane h;
  std::vector<double> w;
  for (const auto& p : mu.support()) {
    if (!h.contains(p)) throw InputError("beta_h: atom outside the half-plane");
  }
  for (const auto& q : mu.weights()) w.push_back(to_double(q));
  return beta_h_weighted(mu.support(), w);
}

struct HalfplaneLpResult {
  Rational value;
  std::vector<Rational> minimizer;  // (p1, p2)
};

/// Exact LP form of inf_{p in H} p_i + sum_j w_j ||p - x_j||, i = 0 or 1.
///
/// Variables: p1 = u - v (free), p2 >= 0, slack s_j >= |p - x_j| componentwise.
inline HalfplaneLpResult beta_h_lp(const DiscreteMeasure<Vec>& mu, int coordinate) {
  const std::size_t k = mu.size();
  const std::size_t nv = 3 + k;
  LinearProgram<Rational> lp;
  lp.c.assign(nv, Rational(0));
  if (coordinate == 0) {
    lp.c[0] = 1;
    lp.c[1] = -1;
  } else {
    lp.c[2] = 1;
  }
  for (std::size_t j = 0; j < k; ++j) {
    lp.c[3 + j] = mu.weight(j);
    const Rational a = exact_rational(mu.atom(j)[0]);
    const Rational b = exact_rational(mu.atom(j)[1]);
    auto row = [&](Rational cu, Rational cv, Rational cp2) {
      std::vector<Rational> r(nv, Rational(0));
      r[0] = cu;
      r[1] = cv;
      r[2] = cp2;
      r[3 + j] = -1;
      return r;
    };
    // +-(p1 - a) <= s_j, +-(p2 - b) <= s_j.
    lp.add_row(row(1, -1, 0), Relation::less_equal, a);
    lp.add_row(row(-1, 1, 0), Relation::less_equal, Rational(-a));
    lp.add_row(row(0, 0, 1), Relation::less_equal, b);
    lp.add_row(row(0, 0, -1), Relation::less_equal, Rational(-b));
  }
  auto res = solve_lp(lp);
  if (res.status != LpStatus::optimal) throw Error("half-plane LP did not reach an optimum");
  return {res.value, {Rational(res.x[0] - res.x[1]), res.x[2]}};
}

/// beta_H through two exact LPs; reference route for the closed form.
inline Vec beta_h_exact(const DiscreteMeasure<Vec>& mu) {
  return make_vec({to_double(beta_h_lp(mu, 0).value), to_double(beta_h_lp(mu, 1).value)});
}

/// sigma_H(p, q, t) = beta_H((1 - t) delta_p + t delta_q).
inline Bicombing<HalfPlane> sigma_h(int grid = kDefaultGrid) {
  return Bicombing<HalfPlane>(
      "sigma_h", HalfPlane{},
      [](const Vec& p, const Vec& q, double t) -> Vec { return beta_h_weighted({p, q}, {1.0 - t, t}); },
      BicombingFlags{true, true, false}, grid);
}

inline Bicombing<HalfPlane> linear_halfplane(int grid = kDefaultGrid) { return linear_bicombing(HalfPlane{}, grid); }

/// (s, t) -> (-s, t).
inline Isometry<Vec> halfplane_reflection() {
  auto f = [](const Vec& p) -> Vec { return make_vec({-p[0], p[1]}); };
  return {"reflection", f, f};
}

/// (s, t) -> (s + a, t).
inline Isometry<Vec> halfplane_shift(double a) {
  return {"shift(" + std::to_string(a) + ")", [a](const Vec& p) -> Vec { return make_vec({p[0] + a, p[1]}); },
          [a](const Vec& p) -> Vec { return make_vec({p[0] - a, p[1]}); }};
}

/// The two witness points (-1, 0), (1, 0).
inline std::pair<Vec, Vec> halfplane_witness_pair() { return {make_vec({-1, 0}), make_vec({1, 0})}; }

struct DistinctnessCertificate {
  Vec sigma_h_midpoint;
  Vec linear_midpoint;
  double distance = 0.0;
  double d_o_lower_bound = 0.0;
  DefectReport report;
};

/// Evaluates sigma_H and the linear bicombing at the witness pair and bounds D_o from below (o = origin).
inline DistinctnessCertificate distinctness_certificate(const Bicombing<HalfPlane>& a,
                                                        const Bicombing<HalfPlane>& b) {
  const auto [p, q] = halfplane_witness_pair();
  DistinctnessCertificate c;
  c.sigma_h_midpoint = a(p, q, 0.5);
  c.linear_midpoint = b(p, q, 0.5);
  c.distance = sup_distance(c.sigma_h_midpoint, c.linear_midpoint);
  auto est = d_o(a, b, make_vec({0, 0}), {{p, q}}, 0);
  c.d_o_lower_bound = est.value;
  c.report.property = "distinct at witness";
  c.report.max_raw = c.distance;
  c.report.max_violation = c.distance;
  c.report.witness_points = {coords(p), coords(q)};
  c.report.witness_params = {0.5};
  c.report.samples = 1;
  c.report.tolerance = 0.0;
  return c;
}

inline DistinctnessCertificate distinctness_certificate(int grid = kDefaultGrid) {
  return distinctness_certificate(sigma_h(grid), linear_halfplane(grid));
}

/// Phi(linear, sigma_H, t_j) with phi = linear for the given t_j.
inline std::vector<Bicombing<HalfPlane>> interpolation_family(const std::vector<double>& ts, int grid = kDefaultGrid) {
  if (ts.size() < 2) throw InputError("interpolation_family needs at least two parameters");
  const auto lin = linear_halfplane(grid);
  const auto sh = sigma_h(grid);
  std::vector<Bicombing<HalfPlane>> out;
  for (double t : ts) out.push_back(interpolate(lin, sh, t, lin));
  return out;
}

/// k evenly spaced members t_j = j/(k-1).
inline std::vector<Bicombing<HalfPlane>> interpolation_family(int k, int grid = kDefaultGrid) {
  if (k < 2) throw InputError("interpolation_family needs k >= 2");
  std::vector<double> ts;
  for (int j = 0; j < k; ++j) ts.push_back(static_cast<double>(j) / (k - 1));
  return interpolation_family(ts, grid);
}

}  // namespace conbi
