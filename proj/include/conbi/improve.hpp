#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "conbi/bicombing.hpp"
#include "conbi/error.hpp"
#include "conbi/metric.hpp"
#include "conbi/moduli.hpp"
#include "conbi/sampling.hpp"

namespace conbi {

namespace detail {

// Piece index i and local parameter lambda with t = (i + lambda)/n, snapped to the
// grid when t is (numerically) a multiple of 1/m.
inline std::pair<int, double> piece(double t, int n, int m) {
  if (m % n == 0) {
    const double j = std::round(t * m);
    if (std::abs(t * m - j) <= 1e-9) {
      const long per = m / n;
      long jj = static_cast<long>(j);
      long i = std::min<long>(jj / per, n - 1);
      return {static_cast<int>(i), static_cast<double>(jj - i * per) / static_cast<double>(per)};
    }
  }
  const double u = t * n;
  int i = static_cast<int>(std::floor(u + 1e-12));
  i = std::clamp(i, 0, n - 1);
  return {i, std::clamp(u - i, 0.0, 1.0)};
}

}  // namespace detail

/// Smallest i >= 1 with d <= i/n; 0 when d = 0. Values within 1e-9 of a break snap down.
inline int scale_index(double d, int n) {
  if (d <= 0.0) return 0;
  const double u = d * n;
  const double r = std::round(u);
  if (r >= 1.0 && std::abs(u - r) <= 1e-9 * std::max(1.0, u)) return static_cast<int>(r);
  return std::max(1, static_cast<int>(std::ceil(u)));
}

/// c(n; tau): breakpoints sigma(tau_xy((i-1)/n), tau_xy((i+1)/n), 1/2), joined by sigma.
template <class Space>
Bicombing<Space> subdivide(const Bicombing<Space>& sigma, const Bicombing<Space>& tau, int n) {
  require_same_space(sigma, tau);
  if (n < 1) throw InputError("subdivide: n must be positive");
  if (sigma.grid() % n != 0) {
    throw InputError("subdivide: grid " + std::to_string(sigma.grid()) + " is not divisible by " + std::to_string(n));
  }
  using P = typename Space::Point;
  const int m = sigma.grid();
  auto breakpoint = [sigma, tau, n](const P& x, const P& y, int i) -> P {
    if (i <= 0) return x;
    if (i >= n) return y;
    return sigma.midpoint(tau(x, y, static_cast<double>(i - 1) / n), tau(x, y, static_cast<double>(i + 1) / n));
  };
  return Bicombing<Space>(
      "c(" + std::to_string(n) + ";" + tau.name() + ")", sigma.space(),
      [sigma, breakpoint, n, m](const P& x, const P& y, double t) -> P {
        const auto [i, lam] = detail::piece(t, n, m);
        return sigma(breakpoint(x, y, i), breakpoint(x, y, i + 1), lam);
      },
      BicombingFlags{sigma.claimed().conical && tau.claimed().conical, false, false}, m);
}

/// Points p_0 = x, ..., p_n = y with p_i = sigma(p_{i-1}, p_{i+1}, 1/2).
template <class P>
struct Chain {
  P x;
  P y;
  int n = 1;
  std::vector<P> points;  // all n + 1 points
  double residual = 0.0;  // max_i d(p_i, sigma(p_{i-1}, p_{i+1}, 1/2))
  long iterations = 0;
};

template <class P>
struct ChainOptions {
  double eps = 1e-11;
  long budget = 0;                        // 0: 50 n^2 log10(1/eps)
  std::optional<std::vector<P>> initial;  // interior points; default is the sigma subdivision
};

inline long default_chain_budget(int n, double eps) {
  return std::max(10L, static_cast<long>(std::ceil(50.0 * n * n * std::log10(1.0 / eps))));
}

/// Jacobi midpoint relaxation x_k^(i) = sigma(x_{k-1}^(i-1), x_{k-1}^(i+1), 1/2) until the update is <= eps.
template <class Space>
Chain<typename Space::Point> chain_fixed_point(const Bicombing<Space>& sigma, const typename Space::Point& x,
                                               const typename Space::Point& y, int n,
                                               const ChainOptions<typename Space::Point>& opt = {}) {
  using P = typename Space::Point;
  if (n < 1) throw InputError("chain_fixed_point: n must be positive");
  Chain<P> c{x, y, n, {}, 0.0, 0};
  c.points.push_back(x);
  if (opt.initial) {
    if (static_cast<int>(opt.initial->size()) != n - 1) throw InputError("chain_fixed_point: wrong initial length");
    c.points.insert(c.points.end(), opt.initial->begin(), opt.initial->end());
  } else {
    for (int i = 1; i < n; ++i) c.points.push_back(sigma(x, y, static_cast<double>(i) / n));
  }
  c.points.push_back(y);
  if (n == 1) return c;
  const long budget = opt.budget > 0 ? opt.budget : default_chain_budget(n, opt.eps);
  const auto& sp = sigma.space();
  std::vector<P> next = c.points;
  for (;;) {
    c.residual = 0.0;
    for (int i = 1; i < n; ++i) {
      next[i] = sigma.midpoint(c.points[i - 1], c.points[i + 1]);
      c.residual = std::max(c.residual, sp.distance(next[i], c.points[i]));
    }
    if (c.residual <= opt.eps) return c;
    if (c.iterations >= budget) {
      throw BudgetExceeded("chain relaxation: residual " + std::to_string(c.residual) + " after " +
                           std::to_string(c.iterations) + " iterations (n = " + std::to_string(n) + ")");
    }
    std::swap(c.points, next);
    ++c.iterations;
  }
}

/// Interior points sigma(x, y, u) at random grid values u, in random order.
template <class Space>
std::vector<typename Space::Point> random_chain_init(const Bicombing<Space>& sigma, const typename Space::Point& x,
                                                     const typename Space::Point& y, int n, Rng& rng) {
  std::vector<typename Space::Point> out;
  for (int i = 1; i < n; ++i) out.push_back(sigma(x, y, grid_value(random_grid_index(rng, sigma.grid()), sigma.grid())));
  return out;
}

/// max_{i,j} |d(p_i, p_j) - |i - j|/n d(x, y)|.
template <class Space>
double chain_spacing_defect(const Space& space, const Chain<typename Space::Point>& c) {
  const double d = space.distance(c.x, c.y);
  double worst = 0.0;
  for (int i = 0; i <= c.n; ++i) {
    for (int j = i + 1; j <= c.n; ++j) {
      worst = std::max(worst, std::abs(space.distance(c.points[i], c.points[j]) - (j - i) * d / c.n));
    }
  }
  return worst;
}

/// Chains keyed by (x, y, n), evicted first-in first-out.
template <class Space>
class ChainCache {
 public:
  using P = typename Space::Point;

  ChainCache(Bicombing<Space> sigma, double eps = 1e-11, std::size_t capacity = 20000)
      : sigma_(std::move(sigma)), eps_(eps), capacity_(capacity) {}

  const Bicombing<Space>& sigma() const { return sigma_; }

  Chain<P> get(const P& x, const P& y, int n) {
    const Key key{x, y, n};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    ChainOptions<P> opt;
    opt.eps = eps_;
    Chain<P> c = chain_fixed_point(sigma_, x, y, n, opt);
    std::lock_guard<std::mutex> lock(mutex_);
    if (map_.emplace(key, c).second) {
      order_.push_back(key);
      while (order_.size() > capacity_) {
        map_.erase(order_.front());
        order_.pop_front();
      }
    }
    return c;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
  }

 private:
  struct Key {
    P x;
    P y;
    int n;
  };
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const {
      if (a.n != b.n) return a.n < b.n;
      if (point_less(a.x, b.x)) return true;
      if (point_less(b.x, a.x)) return false;
      return point_less(a.y, b.y);
    }
  };

  Bicombing<Space> sigma_;
  double eps_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::map<Key, Chain<P>, KeyLess> map_;
  std::deque<Key> order_;
};

/// sigma^(n)(x, y, (i + lambda)/n) = sigma(p_i, p_{i+1}, lambda) on the chain fixed point.
template <class Space>
Bicombing<Space> sigma_n(std::shared_ptr<ChainCache<Space>> cache, int n) {
  if (n < 1) throw InputError("sigma_n: n must be positive");
  const auto& sigma = cache->sigma();
  if (n == 1) return sigma.renamed(sigma.name() + "^(1)");
  using P = typename Space::Point;
  const int m = sigma.grid();
  return Bicombing<Space>(
      sigma.name() + "^(" + std::to_string(n) + ")", sigma.space(),
      [cache, n, m](const P& x, const P& y, double t) -> P {
        if (point_equal(x, y)) return x;
        const auto c = cache->get(x, y, n);
        const auto [i, lam] = detail::piece(t, n, m);
        return cache->sigma()(c.points[i], c.points[i + 1], lam);
      },
      BicombingFlags{sigma.claimed().conical, sigma.claimed().reversible, false}, m);
}

template <class Space>
Bicombing<Space> sigma_n(const Bicombing<Space>& sigma, int n) {
  return sigma_n(std::make_shared<ChainCache<Space>>(sigma), n);
}

/// points {x, y}, params {lambda}; all 0 <= i <= n - k:
/// d(sigma^(n)_xy((i + lambda k)/n), sigma^(k)(p_i, p_{i+k}, lambda)).
template <class Space>
DefectReport composition_defect(std::shared_ptr<ChainCache<Space>> cache, int n, int k,
                                const std::vector<Sample<typename Space::Point>>& samples, double tol = 1e-7) {
  if (k < 1 || k > n) throw InputError("composition_defect: need 1 <= k <= n");
  const auto sn = sigma_n(cache, n);
  const auto sk = sigma_n(cache, k);
  const auto& sp = cache->sigma().space();
  auto r = sweep("composition n=" + std::to_string(n) + " k=" + std::to_string(k), samples, tol, [&](const auto& q) {
    const auto& p = q.points;
    const double lam = q.params[0];
    if (point_equal(p[0], p[1])) return 0.0;
    const auto c = cache->get(p[0], p[1], n);
    double worst = 0.0;
    for (int i = 0; i + k <= n; ++i) {
      const double t = (i + lam * k) / n;
      worst = std::max(worst, sp.distance(sn(p[0], p[1], t), sk(c.points[i], c.points[i + k], lam)));
    }
    return worst;
  });
  return r;
}

/// s^(n)(x, y, t) = sigma^(i)(x, y, t) with d(x, y) in ((i-1)/n, i/n]; constant when x = y.
///
/// Not continuous in (x, y) in general.
template <class Space>
Bicombing<Space> s_n(std::shared_ptr<ChainCache<Space>> cache, int n) {
  if (n < 1) throw InputError("s_n: n must be positive");
  using P = typename Space::Point;
  const auto& sigma = cache->sigma();
  return Bicombing<Space>(
      "s^(" + std::to_string(n) + ")[" + sigma.name() + "]", sigma.space(),
      [cache, n](const P& x, const P& y, double t) -> P {
        const int i = scale_index(cache->sigma().space().distance(x, y), n);
        if (i == 0) return x;
        return sigma_n(cache, i)(x, y, t);
      },
      BicombingFlags{false, sigma.claimed().reversible, false}, sigma.grid());
}

template <class Space>
Bicombing<Space> s_n(const Bicombing<Space>& sigma, int n) {
  return s_n(std::make_shared<ChainCache<Space>>(sigma), n);
}

/// Consistency defect of s^(n) against the bound 2/n (+ slack).
template <class Space>
DefectReport consistency_bound_check(std::shared_ptr<ChainCache<Space>> cache, int n,
                                     const std::vector<Sample<typename Space::Point>>& samples, double slack = 1e-7) {
  auto r = consistency_defect(s_n(cache, n), samples, 2.0 / n + slack);
  r.property = "consistency of s^(" + std::to_string(n) + ") (bound 2/n)";
  return r;
}

/// D_o(sigma^(n), sigma^(n+1)) on the given pairs against the bound 1/(n+1) (+ slack).
///
/// The reported violation is the D_o lower bound itself; the witness holds the
/// pair and the params {t, k}.
template <class Space>
DefectReport cauchy_check(std::shared_ptr<ChainCache<Space>> cache, int n, const typename Space::Point& o,
                          const std::vector<std::pair<typename Space::Point, typename Space::Point>>& pairs,
                          int k_max = 8, double slack = 1e-6) {
  const auto est = d_o(sigma_n(cache, n), sigma_n(cache, n + 1), o, pairs, k_max, false);
  DefectReport r;
  r.property = "D_o(sigma^(" + std::to_string(n) + "), sigma^(" + std::to_string(n + 1) + ")) (bound 1/(n+1))";
  r.tolerance = 1.0 / (n + 1) + slack;
  r.samples = pairs.size();
  r.max_raw = est.value;
  r.max_violation = est.value;
  if (!pairs.empty()) {
    r.witness_index = est.witness_pair;
    r.witness_points = {coords(pairs[est.witness_pair].first), coords(pairs[est.witness_pair].second)};
    r.witness_params = {est.witness_t, static_cast<double>(est.witness_k)};
  }
  return r;
}

}  // namespace conbi
