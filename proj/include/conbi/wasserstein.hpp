#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "conbi/metric.hpp"
#include "conbi/rational.hpp"
#include "conbi/simplex.hpp"
#include "conbi/transport.hpp"

namespace conbi {

/// Converts between the two scalar types used by the library.
template <class To, class From>
To scalar_cast(const From& v) {
  if constexpr (std::is_same_v<To, From>) {
    return v;
  } else if constexpr (std::is_same_v<To, double>) {
    return to_double(Rational(v));
  } else {
    return exact_rational(static_cast<double>(v));
  }
}

/// Finitely supported probability measure with exact weights.
///
/// Always canonical: atoms sorted, duplicates merged, zero weights dropped.
template <class P>
class DiscreteMeasure {
 public:
  using Point = P;

  DiscreteMeasure() = default;

  DiscreteMeasure(std::vector<P> support, std::vector<Rational> weights) {
    if (support.size() != weights.size()) throw InputError("support and weights differ in length");
    if (support.empty()) throw InputError("measure has empty support");
    Rational total = 0;
    for (const auto& w : weights) {
      if (w < 0) throw InputError("negative weight " + to_string(w));
      total += w;
    }
    if (total != 1) throw InputError("weights sum to " + to_string(total) + ", not 1");
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return point_less(support[a], support[b]); });
    for (std::size_t k : order) {
      if (weights[k] == 0) continue;
      if (!support_.empty() && point_equal(support_.back(), support[k])) {
        weights_.back() += weights[k];
      } else {
        support_.push_back(support[k]);
        weights_.push_back(weights[k]);
      }
    }
  }

  static DiscreteMeasure dirac(const P& p) { return DiscreteMeasure({p}, {Rational(1)}); }

  /// (1 - t) delta_x + t delta_y.
  static DiscreteMeasure two_point(const P& x, const P& y, const Rational& t) {
    if (t < 0 || t > 1) throw InputError("mixing weight outside [0,1]");
    return DiscreteMeasure({x, y}, {Rational(1 - t), t});
  }

  /// Uniform measure (1/n) sum delta_{x_i}, repetitions allowed.
  static DiscreteMeasure uniform(const std::vector<P>& points) {
    const auto n = static_cast<long>(points.size());
    return DiscreteMeasure(points, std::vector<Rational>(points.size(), Rational(1, n)));
  }

  std::size_t size() const { return support_.size(); }
  const std::vector<P>& support() const { return support_; }
  const std::vector<Rational>& weights() const { return weights_; }
  const P& atom(std::size_t i) const { return support_[i]; }
  const Rational& weight(std::size_t i) const { return weights_[i]; }
  bool is_dirac() const { return support_.size() == 1; }

  /// Least common denominator of the weights.
  long common_denominator() const {
    boost::multiprecision::mpz_int l = 1;
    for (const auto& w : weights_) l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(w));
    return l.convert_to<long>();
  }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!point_equal(a.support_[i], b.support_[i]) || a.weights_[i] != b.weights_[i]) return false;
    }
    return true;
  }

 private:
  std::vector<P> support_;
  std::vector<Rational> weights_;
};

template <class Space>
using MeasureOn = DiscreteMeasure<typename Space::Point>;

template <class Space>
void require_support(const Space& space, const MeasureOn<Space>& mu) {
  for (const auto& p : mu.support()) {
    if (!space.contains(p)) throw InputError(std::string("measure atom outside the ") + space.kind() + " space");
  }
}

// ---------------------------------------------------------------------------
// Two-point measures

template <class T>
struct TwoPointW1 {
  T value{};
  T lambda{};  // optimal mass moved x2 -> y2
};

/// W1((1-s) delta_x1 + s delta_x2, (1-t) delta_y1 + t delta_y2).
///
/// Every coupling is determined by the mass lambda sent x2 -> y2, which ranges
/// over [max(s+t-1, 0), min(s, t)]; the cost is affine in lambda so one of the
/// two ends is optimal. With rational s, t on a finite space the result is exact.
template <class Space, class T>
TwoPointW1<T> w1_two_point(const Space& space, const typename Space::Point& x1, const typename Space::Point& x2, T s,
                           const typename Space::Point& y1, const typename Space::Point& y2, T t) {
  if (s < 0 || s > 1 || t < 0 || t > 1) throw InputError("two-point weights must lie in [0,1]");
  const T d11 = scalar_cast<T>(space.exact_distance(x1, y1));
  const T d21 = scalar_cast<T>(space.exact_distance(x2, y1));
  const T d12 = scalar_cast<T>(space.exact_distance(x1, y2));
  const T d22 = scalar_cast<T>(space.exact_distance(x2, y2));
  auto cost = [&](const T& lam) -> T { return (1 - (s + t) + lam) * d11 + (s - lam) * d21 + (t - lam) * d12 + lam * d22; };
  const T lo = s + t - 1 > 0 ? T(s + t - 1) : T(0);
  const T hi = s < t ? s : t;
  const T c_lo = cost(lo), c_hi = cost(hi);
  if (c_hi < c_lo) return {c_hi, hi};
  return {c_lo, lo};
}

// ---------------------------------------------------------------------------
// Uniform measures

template <class T>
struct UniformW1 {
  T value{};
  std::vector<std::size_t> perm;
};

/// (1/n) min over permutations of sum d(x_i, y_perm(i)), by an exact assignment solver.
template <class Space>
UniformW1<typename Space::Exact> w1_uniform(const Space& space, const std::vector<typename Space::Point>& xs,
                                            const std::vector<typename Space::Point>& ys) {
  using E = typename Space::Exact;
  if (xs.size() != ys.size()) throw InputError("w1_uniform: length mismatch");
  if (xs.empty()) throw InputError("w1_uniform: empty point lists");
  const std::size_t n = xs.size();
  std::vector<std::vector<E>> cost(n, std::vector<E>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i][j] = space.exact_distance(xs[i], ys[j]);
  }
  auto a = solve_assignment(cost);
  return {E(a.total / E(static_cast<long>(n))), std::move(a.perm)};
}

// ---------------------------------------------------------------------------
// General measures

template <class T>
struct TransportResult {
  T value{};
  std::vector<std::vector<Rational>> plan;  // rows: atoms of mu, columns: atoms of nu
};

template <class Space, class Distance>
TransportResult<typename Space::Exact> w1_general_with(const MeasureOn<Space>& mu, const MeasureOn<Space>& nu,
                                                       Distance&& distance) {
  using E = typename Space::Exact;
  std::vector<std::vector<E>> cost(mu.size(), std::vector<E>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) cost[i][j] = distance(mu.atom(i), nu.atom(j));
  }
  auto sol = solve_transport(mu.weights(), nu.weights(), cost);
  return {sol.value, std::move(sol.plan)};
}

/// Exact optimal transport between two finitely supported measures.
template <class Space>
TransportResult<typename Space::Exact> w1_general(const Space& space, const MeasureOn<Space>& mu,
                                                  const MeasureOn<Space>& nu) {
  return w1_general_with<Space>(mu, nu, [&](const auto& p, const auto& q) { return space.exact_distance(p, q); });
}

/// Cost of a given plan; used to audit solver output.
template <class Space>
typename Space::Exact plan_cost(const Space& space, const MeasureOn<Space>& mu, const MeasureOn<Space>& nu,
                                const std::vector<std::vector<Rational>>& plan) {
  using E = typename Space::Exact;
  E total(0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      if (plan[i][j] != 0) total += scalar_cast<E>(plan[i][j]) * space.exact_distance(mu.atom(i), nu.atom(j));
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Kantorovich dual

struct DualCertificate {
  Rational value;
  std::vector<Rational> potential;  // indexed by the points of the finite space
};

/// max sum f (mu - nu) over 1-Lipschitz f >= 0, solved as an exact LP.
inline DualCertificate kantorovich_dual(const FiniteSpace& space, const DiscreteMeasure<std::size_t>& mu,
                                        const DiscreteMeasure<std::size_t>& nu) {
  require_support(space, mu);
  require_support(space, nu);
  const std::size_t n = space.size();
  LinearProgram<Rational> lp;
  lp.c.assign(n, Rational(0));
  for (std::size_t i = 0; i < mu.size(); ++i) lp.c[mu.atom(i)] -= mu.weight(i);
  for (std::size_t i = 0; i < nu.size(); ++i) lp.c[nu.atom(i)] += nu.weight(i);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<Rational> row(n, Rational(0));
      row[i] = 1;
      row[j] = -1;
      lp.add_row(std::move(row), Relation::less_equal, space.exact_distance(i, j));
    }
  }
  auto res = solve_lp(lp);
  if (res.status != LpStatus::optimal) throw Error("Kantorovich dual LP did not reach an optimum");
  return {Rational(-res.value), std::move(res.x)};
}

/// Checks |f(x) - f(y)| <= d(x, y) exactly on every pair.
inline bool is_one_lipschitz(const FiniteSpace& space, const std::vector<Rational>& f) {
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = 0; j < space.size(); ++j) {
      if (f[i] - f[j] > space.exact_distance(i, j)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Push-forward

/// Image measure under a point map; atoms with equal images are merged.
template <class P, class Map>
auto pushforward(const DiscreteMeasure<P>& mu, Map&& map) {
  using Q = std::decay_t<decltype(map(mu.atom(0)))>;
  std::vector<Q> image;
  image.reserve(mu.size());
  for (const auto& p : mu.support()) image.push_back(map(p));
  return DiscreteMeasure<Q>(std::move(image), mu.weights());
}

}  // namespace conbi
