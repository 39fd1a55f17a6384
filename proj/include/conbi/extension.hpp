#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conbi/barycenter.hpp"
#include "conbi/bicombing.hpp"
#include "conbi/error.hpp"
#include "conbi/metric.hpp"
#include "conbi/moduli.hpp"
#include "conbi/tight_span.hpp"
#include "conbi/wasserstein.hpp"

namespace conbi {

using SpanMeasure = DiscreteMeasure<Vec>;

/// W1 over E(X) with the sup metric; the two-point formula when both measures have at most two atoms.
inline double span_w1(const TightSpan& ts, const SpanMeasure& mu, const SpanMeasure& nu) {
  if (mu.size() <= 2 && nu.size() <= 2) {
    const Vec& x1 = mu.atom(0);
    const Vec& x2 = mu.atom(mu.size() - 1);
    const Vec& y1 = nu.atom(0);
    const Vec& y2 = nu.atom(nu.size() - 1);
    const double s = mu.size() == 2 ? to_double(mu.weight(1)) : 0.0;
    const double t = nu.size() == 2 ? to_double(nu.weight(1)) : 0.0;
    return w1_two_point(ts, x1, x2, s, y1, y2, t).value;
  }
  return w1_general(ts, mu, nu).value;
}

namespace detail {

struct MeasureLess {
  bool operator()(const SpanMeasure& a, const SpanMeasure& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (point_less(a.atom(i), b.atom(i))) return true;
      if (point_less(b.atom(i), a.atom(i))) return false;
      if (a.weight(i) != b.weight(i)) return a.weight(i) < b.weight(i);
    }
    return false;
  }
};

}  // namespace detail

/// Measures over E(X) with assigned barycenters, kept 1-Lipschitz for W1.
class ConstraintStore {
 public:
  struct Entry {
    SpanMeasure measure;
    Vec value;
  };

  ConstraintStore(TightSpan ts, double eps) : ts_(std::move(ts)), eps_(eps) {}

  const TightSpan& space() const { return ts_; }
  double eps() const { return eps_; }
  std::size_t size() const { return entries_.size(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::optional<std::size_t> find(const SpanMeasure& mu) const {
    auto it = index_.find(mu);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// W1 between the stored measure i and every earlier one.
  const std::vector<double>& w1_row(std::size_t i) const { return w1_[i]; }

  /// Appends without checks; returns the index (the existing one for a repeated measure).
  std::size_t append(const SpanMeasure& mu, const Vec& value) {
    if (auto i = find(mu)) return *i;
    std::vector<double> row;
    row.reserve(entries_.size());
    for (const auto& e : entries_) row.push_back(span_w1(ts_, e.measure, mu));
    w1_.push_back(std::move(row));
    index_.emplace(mu, entries_.size());
    entries_.push_back({mu, value});
    return entries_.size() - 1;
  }

  /// max over pairs of ||v_i - v_j|| - W1(mu_i, mu_j); the witness pair is returned through i, j.
  double lipschitz_defect(std::size_t* wi = nullptr, std::size_t* wj = nullptr) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double v = sup_distance(entries_[i].value, entries_[j].value) - w1_[i][j];
        if (v > worst) {
          worst = v;
          if (wi) *wi = i;
          if (wj) *wj = j;
        }
      }
    }
    return entries_.size() < 2 ? 0.0 : worst;
  }

 private:
  TightSpan ts_;
  double eps_;
  std::vector<Entry> entries_;
  std::vector<std::vector<double>> w1_;
  std::map<SpanMeasure, std::size_t, detail::MeasureLess> index_;
};

/// sigma with its values on base-point pairs precomputed for every grid t.
inline Bicombing<TightSpan> tabulate_on_base(const Bicombing<TightSpan>& sigma) {
  const TightSpan& ts = sigma.space();
  const int n = ts.base_size();
  const int m = sigma.grid();
  std::vector<Vec> base;
  for (int i = 0; i < n; ++i) base.push_back(embed(ts, static_cast<std::size_t>(i)));
  auto table = std::make_shared<std::vector<Vec>>(static_cast<std::size_t>(n * n * (m + 1)));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      for (int j = 0; j <= m; ++j) (*table)[(x * n + y) * (m + 1) + j] = sigma(base[x], base[y], grid_value(j, m));
    }
  }
  auto index_of = [base](const Vec& p) -> int {
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (point_equal(base[i], p)) return static_cast<int>(i);
    }
    return -1;
  };
  return Bicombing<TightSpan>(
      sigma.name() + "|e(X)", ts,
      [sigma, table, index_of, n, m](const Vec& f, const Vec& g, double t) -> Vec {
        const int x = index_of(f), y = index_of(g);
        const double j = std::round(t * m);
        if (x >= 0 && y >= 0 && std::abs(t * m - j) <= 1e-9) {
          return (*table)[(x * n + y) * (m + 1) + static_cast<int>(j)];
        }
        return sigma(f, g, t);
      },
      sigma.claimed(), m);
}

struct StoreBuild {
  std::optional<ConstraintStore> store;  // empty when a gate failed
  DefectReport reversibility;
  DefectReport strengthened;
  double lipschitz_defect = 0.0;
};

/// Seeds the store with e#((1 - t) delta_x + t delta_y) -> sigma(e(x), e(y), t) for base points x, y and grid t.
///
/// sigma is a bicombing on the embedded base points with values in E(X). The
/// gates are the reversibility and strengthened-inequality defects over every
/// base quadruple and grid t; a failing gate leaves the store empty.
inline StoreBuild build_store(const Bicombing<TightSpan>& sigma, double eps = 1e-8) {
  const TightSpan& ts = sigma.space();
  const int n = ts.base_size();
  const int m = sigma.grid();
  const auto tab = tabulate_on_base(sigma);
  std::vector<Vec> base;
  for (int i = 0; i < n; ++i) base.push_back(embed(ts, static_cast<std::size_t>(i)));

  std::vector<Sample<Vec>> quads;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
          for (int j = 0; j <= m; ++j) quads.push_back({{base[a], base[b], base[c], base[d]}, {grid_value(j, m)}});
        }
      }
    }
  }
  StoreBuild out;
  std::vector<Sample<Vec>> pairs;
  for (const auto& q : quads) {
    if (point_equal(q.points[2], q.points[0]) && point_equal(q.points[3], q.points[1])) {
      pairs.push_back({{q.points[0], q.points[1]}, q.params});
    }
  }
  out.reversibility = reversibility_defect(tab, pairs, eps);
  if (!out.reversibility.passed()) return out;
  out.strengthened = sweep("strengthened", quads, eps, [&](const auto& q) { return strengthened_term(tab, q); });
  if (!out.strengthened.passed()) return out;

  ConstraintStore store(ts, eps);
  for (int x = 0; x < n; ++x) store.append(SpanMeasure::dirac(base[x]), base[x]);
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      for (int j = 1; j < m; ++j) {
        store.append(SpanMeasure::two_point(base[x], base[y], Rational(j, m)), tab(base[x], base[y], grid_value(j, m)));
      }
    }
  }
  out.lipschitz_defect = store.lipschitz_defect();
  out.store = std::move(store);
  return out;
}

struct Extension {
  Vec value;
  bool success = false;
  bool stored = false;          // the measure was already in the store
  double max_violation = 0.0;   // max over stored s of ||value - v_s|| - W1(nu, mu_s)
  double residual = 0.0;        // extremality residual of the value
  double box_gap = 0.0;
  std::size_t witness = 0;      // entry attaining max_violation
};

/// Assigns a barycenter to nu inside every ball B(v_s, W1(nu, mu_s)) and appends it on success.
///
/// The candidate is checked against every stored constraint and for
/// extremality; on failure the store is left unchanged.
inline Extension extend_point(ConstraintStore& store, const SpanMeasure& nu, double eps, long budget = kRetractBudget) {
  const TightSpan& ts = store.space();
  require_support(ts, nu);
  Extension out;
  if (auto i = store.find(nu)) {
    out.value = store.entry(*i).value;
    out.success = out.stored = true;
    return out;
  }
  std::vector<Vec> centers;
  std::vector<double> radii;
  for (const auto& e : store.entries()) {
    centers.push_back(e.value);
    radii.push_back(span_w1(ts, nu, e.measure));
  }
  auto b = ball_intersection(ts, centers, radii, kRetractTolerance, budget);
  out.value = b.point;
  out.box_gap = b.box_gap;
  out.residual = ts.residual(b.point);
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < centers.size(); ++s) {
    const double v = sup_distance(b.point, centers[s]) - radii[s];
    if (v > out.max_violation) {
      out.max_violation = v;
      out.witness = s;
    }
  }
  out.success = b.success && out.max_violation <= eps && is_extremal(ts, b.point, eps);
  if (out.success) store.append(nu, b.point);
  return out;
}

/// sigma_bar(f, g, t) = extended barycenter of (1 - t) delta_f + t delta_g, grid t.
///
/// The store is shared and grows with every new query; failures throw BudgetExceeded.
inline Bicombing<TightSpan> extended_bicombing(std::shared_ptr<ConstraintStore> store, int grid = kDefaultGrid,
                                               long budget = kRetractBudget) {
  auto mutex = std::make_shared<std::mutex>();
  return Bicombing<TightSpan>(
      "extension", store->space(),
      [store, mutex, grid, budget](const Vec& f, const Vec& g, double t) -> Vec {
        if (point_equal(f, g)) return f;
        const auto nu = SpanMeasure::two_point(f, g, grid_rational(t, grid));
        std::lock_guard<std::mutex> lock(*mutex);
        auto r = extend_point(*store, nu, store->eps(), budget);
        if (!r.success) {
          throw BudgetExceeded("extension failed: constraint violation " + std::to_string(r.max_violation) +
                               ", residual " + std::to_string(r.residual));
        }
        return r.value;
      },
      BicombingFlags{true, true, false}, grid);
}

/// Restriction check: sigma_bar(e(x), e(y), t) equals sigma(e(x), e(y), t) exactly on every grid t.
inline DefectReport restriction_defect(const Bicombing<TightSpan>& extended, const Bicombing<TightSpan>& sigma) {
  const TightSpan& ts = sigma.space();
  const int n = ts.base_size();
  const int m = sigma.grid();
  std::vector<Sample<Vec>> samples;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      for (int j = 0; j <= m; ++j) {
        samples.push_back({{embed(ts, static_cast<std::size_t>(x)), embed(ts, static_cast<std::size_t>(y))},
                           {grid_value(j, m)}});
      }
    }
  }
  return sweep("restriction", samples, 0.0, [&](const auto& q) {
    const auto& p = q.points;
    const double t = q.params[0];
    return sup_distance(extended(p[0], p[1], t), sigma(p[0], p[1], t));
  });
}

/// Conical, geodesic and reversibility defects of the extension on E(X) samples,
/// the exact restriction check, and the store Lipschitz invariant.
///
/// `quads`: points {f, g, f', g'}, params {t}; `pairs`: points {f, g}, params {s, t}.
inline std::vector<DefectReport> certify_extension(std::shared_ptr<ConstraintStore> store,
                                                   const Bicombing<TightSpan>& sigma,
                                                   const std::vector<Sample<Vec>>& quads,
                                                   const std::vector<Sample<Vec>>& pairs, double tol = 1e-6) {
  const auto ext = extended_bicombing(store, sigma.grid());
  std::vector<DefectReport> out;
  out.push_back(restriction_defect(ext, tabulate_on_base(sigma)));
  out.push_back(conical_defect(ext, quads, tol));
  out.push_back(geodesic_defect(ext, pairs, tol));
  std::vector<Sample<Vec>> rev;
  for (const auto& q : pairs) rev.push_back({q.points, {q.params[0]}});
  out.push_back(reversibility_defect(ext, rev, tol));
  DefectReport lip;
  lip.property = "store 1-Lipschitz";
  lip.tolerance = tol;
  lip.samples = store->size() * (store->size() - 1) / 2;
  std::size_t i = 0, j = 0;
  lip.max_raw = store->lipschitz_defect(&i, &j);
  lip.max_violation = std::max(0.0, lip.max_raw);
  if (store->size() >= 2) {
    lip.witness_index = i;
    lip.witness_points = {coords(store->entry(i).value), coords(store->entry(j).value)};
  }
  out.push_back(lip);
  return out;
}

}  // namespace conbi
