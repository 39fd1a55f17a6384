#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include "conbi/metric.hpp"
#include "conbi/sampling.hpp"
#include "conbi/wasserstein.hpp"

namespace conbi {

/// W1(mu, delta_x) = sum_i w_i d(x_i, x); the product coupling is the only one.
template <class Space>
typename Space::Exact w1_to_dirac(const Space& space, const MeasureOn<Space>& mu, const typename Space::Point& x) {
  using E = typename Space::Exact;
  E total(0);
  for (std::size_t i = 0; i < mu.size(); ++i) total += scalar_cast<E>(mu.weight(i)) * space.exact_distance(mu.atom(i), x);
  return total;
}

template <class P>
struct DossCheck {
  bool member = true;
  std::optional<P> violating;
  double max_excess = 0.0;  // max over witnesses of d(z, w) - W1(mu, delta_w)
  std::size_t witnesses = 0;
};

/// Tests d(z, w) <= W1(mu, delta_w) + tol at every witness w.
template <class Space>
DossCheck<typename Space::Point> doss_membership(const Space& space, const typename Space::Point& z,
                                                 const MeasureOn<Space>& mu,
                                                 const std::vector<typename Space::Point>& witnesses,
                                                 double tol = 1e-9) {
  using E = typename Space::Exact;
  DossCheck<typename Space::Point> out;
  out.max_excess = -std::numeric_limits<double>::infinity();
  for (const auto& w : witnesses) {
    const E excess = space.exact_distance(z, w) - w1_to_dirac(space, mu, w);
    const double ex = scalar_cast<double>(excess);
    ++out.witnesses;
    if (ex > out.max_excess) out.max_excess = ex;
    const bool violated = std::is_same_v<E, Rational> ? excess > 0 : ex > tol;
    if (violated && out.member) {
      out.member = false;
      out.violating = w;
    }
  }
  return out;
}

/// Exact Doss set of mu on a finite space: every point checked against every witness.
inline std::vector<std::size_t> doss_set_finite(const FiniteSpace& space, const DiscreteMeasure<std::size_t>& mu) {
  require_support(space, mu);
  std::vector<Rational> bound(space.size());
  for (std::size_t w = 0; w < space.size(); ++w) bound[w] = w1_to_dirac(space, mu, w);
  std::vector<std::size_t> out;
  for (std::size_t z = 0; z < space.size(); ++z) {
    bool ok = true;
    for (std::size_t w = 0; w < space.size() && ok; ++w) ok = space.exact_distance(z, w) <= bound[w];
    if (ok) out.push_back(z);
  }
  return out;
}

struct WitnessSearchOptions {
  double box = 4.0;                            // half-width of the sampled cube around the origin
  int grid_steps = 8;                          // grid points per axis (dim <= 3)
  std::size_t random_probes = 2000;
  std::vector<double> magnitudes{10, 100, 1000};
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

struct WitnessSearchResult {
  std::optional<Vec> witness;
  double excess = 0.0;  // d(z, w) - [(1-t) d(x, w) + t d(y, w)] at the witness
  std::size_t probes = 0;
};

/// Looks for w in linf^n with d(z, w) > (1 - t) d(x, w) + t d(y, w) + tol.
///
/// Probes, in order: x, y, z; far points c +- M e_i (and +-M on each diagonal
/// for n <= 4) around c in {z, (1-t)x + ty, 0}; a grid over the box; random
/// points in the box. Returns the first witness found. No witness means none
/// within budget, not membership.
inline WitnessSearchResult banach_witness_search(const Vec& x, const Vec& y, double t, const Vec& z,
                                                 const WitnessSearchOptions& opt = {}) {
  const int n = static_cast<int>(x.size());
  if (y.size() != n || z.size() != n) throw InputError("banach_witness_search: dimension mismatch");
  WitnessSearchResult out;
  auto probe = [&](const Vec& w) {
    ++out.probes;
    const double ex = sup_distance(z, w) - ((1.0 - t) * sup_distance(x, w) + t * sup_distance(y, w));
    if (ex > opt.tol) {
      out.witness = w;
      out.excess = ex;
      return true;
    }
    return false;
  };
  if (probe(x) || probe(y) || probe(z)) return out;

  const Vec lin = (1.0 - t) * x + t * y;
  const Vec origin = Vec::Zero(n);
  for (const Vec* c : {&z, &lin, &origin}) {
    for (double m : opt.magnitudes) {
      for (int i = 0; i < n; ++i) {
        for (double sign : {-1.0, 1.0}) {
          Vec w = *c;
          w[i] += sign * m;
          if (probe(w)) return out;
        }
      }
      if (n <= 4) {
        for (int mask = 0; mask < (1 << n); ++mask) {
          Vec w = *c;
          for (int i = 0; i < n; ++i) w[i] += ((mask >> i) & 1 ? 1.0 : -1.0) * m;
          if (probe(w)) return out;
        }
      }
    }
  }

  if (n <= 3) {
    long total = 1;
    for (int i = 0; i < n; ++i) total *= opt.grid_steps + 1;
    for (long idx = 0; idx < total; ++idx) {
      Vec w(n);
      long r = idx;
      for (int i = 0; i < n; ++i) {
        w[i] = -opt.box + 2.0 * opt.box * static_cast<double>(r % (opt.grid_steps + 1)) / opt.grid_steps;
        r /= opt.grid_steps + 1;
      }
      if (probe(w)) return out;
    }
  }

  Rng rng(opt.seed);
  for (std::size_t k = 0; k < opt.random_probes; ++k) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = uniform_real(rng, -opt.box, opt.box);
    if (probe(w)) return out;
  }
  return out;
}

}  // namespace conbi
