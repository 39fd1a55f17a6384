#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "conbi/bicombing.hpp"
#include "conbi/error.hpp"
#include "conbi/metric.hpp"
#include "conbi/rational.hpp"
#include "conbi/wasserstein.hpp"

namespace conbi {

/// Distinct points with positive multiplicities, kept in canonical order.
template <class P>
class Multiset {
 public:
  Multiset() = default;

  explicit Multiset(const std::vector<P>& points) {
    for (const auto& p : points) add(p, 1);
  }

  void add(const P& p, int count) {
    auto it = std::lower_bound(items_.begin(), items_.end(), p,
                               [](const auto& e, const P& q) { return point_less(e.first, q); });
    if (it != items_.end() && point_equal(it->first, p)) {
      it->second += count;
    } else {
      items_.insert(it, {p, count});
    }
    size_ += count;
  }

  /// Copy with one instance of the i-th distinct point removed.
  Multiset without(std::size_t i) const {
    Multiset m = *this;
    if (--m.items_[i].second == 0) m.items_.erase(m.items_.begin() + static_cast<long>(i));
    --m.size_;
    return m;
  }

  int size() const { return size_; }
  std::size_t distinct() const { return items_.size(); }
  const std::vector<std::pair<P, int>>& items() const { return items_; }

  /// Points with repetition, in canonical order.
  std::vector<P> expand() const {
    std::vector<P> out;
    for (const auto& [p, c] : items_) out.insert(out.end(), static_cast<std::size_t>(c), p);
    return out;
  }

  friend bool operator<(const Multiset& a, const Multiset& b) {
    if (a.items_.size() != b.items_.size()) return a.items_.size() < b.items_.size();
    for (std::size_t i = 0; i < a.items_.size(); ++i) {
      if (point_less(a.items_[i].first, b.items_[i].first)) return true;
      if (point_less(b.items_[i].first, a.items_[i].first)) return false;
      if (a.items_[i].second != b.items_[i].second) return a.items_[i].second < b.items_[i].second;
    }
    return false;
  }

 private:
  std::vector<std::pair<P, int>> items_;
  int size_ = 0;
};

struct BarycenterConfig {
  double eps = 1e-10;
  long inner_budget = 10000;  // derived-sequence iterations per evaluation
  int outer_budget = 3;       // largest replication factor k
  int max_size = 6;           // largest multiset size evaluated
};

/// n-point barycenters b_n from the midpoint of a reversible bicombing.
///
/// b_1(x) = x, b_2(x, y) = midpoint. For m >= 3 the tuple is replaced by the
/// b_{m-1} values of its m leave-one-out sub-multisets until its diameter is
/// at most eps. Results are memoised on canonical multisets.
template <class Space>
class BarycenterEngine {
 public:
  using Point = typename Space::Point;

  BarycenterEngine(Bicombing<Space> sigma, BarycenterConfig cfg = {})
      : sigma_(std::move(sigma)), cfg_(cfg), state_(std::make_shared<State>()) {}

  const BarycenterConfig& config() const { return cfg_; }
  const Bicombing<Space>& bicombing() const { return sigma_; }

  Point operator()(const Multiset<Point>& ms) const {
    if (ms.size() < 1) throw InputError("barycenter of an empty multiset");
    if (ms.size() > cfg_.max_size) {
      throw PreconditionError("multiset size " + std::to_string(ms.size()) + " exceeds limit " +
                              std::to_string(cfg_.max_size));
    }
    if (ms.distinct() == 1) return ms.items()[0].first;
    if (ms.size() == 2) return sigma_.midpoint(ms.items()[0].first, ms.items()[1].first);
    {
      std::lock_guard<std::mutex> lock(state_->mutex);
      auto it = state_->memo.find(ms);
      if (it != state_->memo.end()) return it->second;
    }
    Point result = derived_sequence(ms);
    std::lock_guard<std::mutex> lock(state_->mutex);
    state_->memo.emplace(ms, result);
    return result;
  }

  Point operator()(const std::vector<Point>& points) const { return (*this)(Multiset<Point>(points)); }

  std::size_t memo_size() const {
    std::lock_guard<std::mutex> lock(state_->mutex);
    return state_->memo.size();
  }

 private:
  struct State {
    std::mutex mutex;
    std::map<Multiset<Point>, Point> memo;
  };

  double diameter(const std::vector<Point>& pts) const {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, sigma_.space().distance(pts[i], pts[j]));
    }
    return d;
  }

  // The tuple keeps the multiplicity pattern of the input, so only one
  // sub-multiset per distinct entry has to be evaluated.
  Point derived_sequence(const Multiset<Point>& ms) const {
    std::vector<Point> values;
    std::vector<int> counts;
    for (const auto& [p, c] : ms.items()) {
      values.push_back(p);
      counts.push_back(c);
    }
    double diam = diameter(values);
    for (long it = 0; diam > cfg_.eps; ++it) {
      if (it >= cfg_.inner_budget) {
        throw BudgetExceeded("barycenter derived sequence: diameter " + std::to_string(diam) + " after " +
                             std::to_string(it) + " iterations");
      }
      std::vector<Point> next;
      for (std::size_t i = 0; i < values.size(); ++i) {
        Multiset<Point> sub;
        for (std::size_t j = 0; j < values.size(); ++j) {
          const int c = counts[j] - (i == j ? 1 : 0);
          if (c > 0) sub.add(values[j], c);
        }
        next.push_back((*this)(sub));
      }
      values = std::move(next);
      diam = diameter(values);
    }
    return values.front();
  }

  Bicombing<Space> sigma_;
  BarycenterConfig cfg_;
  std::shared_ptr<State> state_;
};

/// b_n evaluated directly on a multiset.
template <class Space>
typename Space::Point b_n(const Multiset<typename Space::Point>& ms, const Bicombing<Space>& sigma,
                          const BarycenterConfig& cfg = {}) {
  return BarycenterEngine<Space>(sigma, cfg)(ms);
}

template <class P>
struct BetaResult {
  P point;
  std::vector<double> increments;  // distance between outputs at successive replication factors
  int levels = 0;                  // replication factors evaluated
  bool converged = false;          // last increment <= eps (or the measure is a Dirac)
};

/// b_{nk}(Q^k(x)) for k = 1, 2, ... where mu = (1/n) sum delta_{x_i}.
template <class Space>
BetaResult<typename Space::Point> beta_rational(const DiscreteMeasure<typename Space::Point>& mu,
                                                const BarycenterEngine<Space>& engine) {
  using P = typename Space::Point;
  const auto& cfg = engine.config();
  if (mu.is_dirac()) return {mu.atom(0), {}, 1, true};
  const long n = mu.common_denominator();
  if (n > cfg.max_size) {
    throw PreconditionError("weight denominator " + std::to_string(n) + " exceeds the multiset limit " +
                            std::to_string(cfg.max_size));
  }
  BetaResult<P> out;
  for (int k = 1; k <= cfg.outer_budget && n * k <= cfg.max_size; ++k) {
    Multiset<P> ms;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const Rational c = mu.weight(i) * n * k;
      ms.add(mu.atom(i), static_cast<int>(boost::multiprecision::numerator(c).convert_to<long>()));
    }
    P next = engine(ms);
    if (out.levels > 0) out.increments.push_back(engine.bicombing().space().distance(out.point, next));
    out.point = next;
    ++out.levels;
  }
  out.converged = !out.increments.empty() && out.increments.back() <= cfg.eps;
  return out;
}

/// Grid value j/m as an exact rational when t is within 1e-12 of one.
inline Rational grid_rational(double t, int m) {
  const double j = std::round(t * m);
  if (std::abs(t - j / m) <= 1e-12) return Rational(static_cast<long>(j), m);
  return exact_rational(t);
}

template <class P>
using BarycenterMap = std::function<P(const DiscreteMeasure<P>&)>;

/// sigma(x, y, t) = beta((1 - t) delta_x + t delta_y).
template <class Space>
Bicombing<Space> sigma_beta(const Space& space, BarycenterMap<typename Space::Point> beta, std::string name,
                            int grid = kDefaultGrid) {
  using P = typename Space::Point;
  return Bicombing<Space>(
      "sigma_beta(" + name + ")", space,
      [beta, grid](const P& x, const P& y, double t) -> P {
        return beta(DiscreteMeasure<P>::two_point(x, y, grid_rational(t, grid)));
      },
      BicombingFlags{true, true, false}, grid);
}

/// beta_rational as a barycenter map; throws if the limit did not settle.
template <class Space>
BarycenterMap<typename Space::Point> rational_barycenter_map(BarycenterEngine<Space> engine) {
  return [engine](const DiscreteMeasure<typename Space::Point>& mu) { return beta_rational(mu, engine).point; };
}

/// Iterated closure of `seed` under sigma(p, q, t) for t in `ts`, `depth` rounds.
template <class Space>
std::vector<typename Space::Point> approx_sigma_convex_hull(const std::vector<typename Space::Point>& seed,
                                                            const Bicombing<Space>& sigma, int depth,
                                                            const std::vector<double>& ts = {0.25, 0.5, 0.75},
                                                            std::size_t max_points = 20000) {
  using P = typename Space::Point;
  if (depth < 0) throw InputError("hull depth must be nonnegative");
  std::vector<P> pts;
  auto insert = [&](const P& p) {
    for (const auto& q : pts) {
      if (sigma.space().distance(p, q) <= kPointTolerance) return;
    }
    if (pts.size() >= max_points) throw BudgetExceeded("convex hull approximation exceeds point budget");
    pts.push_back(p);
  };
  for (const auto& p : seed) insert(p);
  for (int r = 0; r < depth; ++r) {
    const std::vector<P> current = pts;
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::size_t j = 0; j < current.size(); ++j) {
        if (i == j) continue;
        for (double t : ts) insert(sigma(current[i], current[j], t));
      }
    }
  }
  return pts;
}

/// Distance from q to the nearest point of a finite set.
template <class Space>
double distance_to_set(const Space& space, const typename Space::Point& q,
                       const std::vector<typename Space::Point>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : set) best = std::min(best, space.distance(q, p));
  return best;
}

}  // namespace conbi
