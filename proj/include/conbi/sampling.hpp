#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "conbi/metric.hpp"
#include "conbi/rational.hpp"
#include "conbi/wasserstein.hpp"

namespace conbi {

using Rng = std::mt19937_64;

/// Uniform double in [lo, hi).
inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline long uniform_int(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

/// Random metric on n points: integer edge lengths in [1, max_len] over
/// denominator `den`, closed under shortest paths.
inline FiniteMetric random_finite_metric(Rng& rng, std::size_t n, long max_len = 10, long den = 4) {
  std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = Rational(uniform_int(rng, 1, max_len), den);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return FiniteMetric::validate(std::move(d));
}

/// Point with coordinates on the dyadic grid 2^-8 within [-box, box].
inline Vec random_vec(Rng& rng, int dim, double box) {
  Vec v(dim);
  const long steps = static_cast<long>(box * 256.0);
  for (int i = 0; i < dim; ++i) v[i] = static_cast<double>(uniform_int(rng, -steps, steps)) / 256.0;
  return v;
}

inline Vec random_halfplane_point(Rng& rng, double box) {
  Vec v = random_vec(rng, 2, box);
  v[1] = std::abs(v[1]);
  return v;
}

/// Random rational weights with common denominator `den` (every weight >= 1/den).
inline std::vector<Rational> random_weights(Rng& rng, std::size_t k, long den) {
  if (den < static_cast<long>(k)) den = static_cast<long>(k);
  std::vector<long> counts(k, 1);
  for (long r = static_cast<long>(k); r < den; ++r) ++counts[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(k) - 1))];
  std::vector<Rational> w;
  for (long c : counts) w.emplace_back(c, den);
  return w;
}

template <class P, class Gen>
DiscreteMeasure<P> random_measure(Rng& rng, std::size_t atoms, long den, Gen&& point) {
  std::vector<P> support;
  for (std::size_t i = 0; i < atoms; ++i) support.push_back(point());
  return DiscreteMeasure<P>(std::move(support), random_weights(rng, atoms, den));
}

inline DiscreteMeasure<std::size_t> random_finite_measure(Rng& rng, std::size_t space_size, std::size_t atoms, long den) {
  return random_measure<std::size_t>(rng, atoms, den, [&] {
    return static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(space_size) - 1));
  });
}

/// Grid parameter j/m with j uniform in [0, m].
inline int random_grid_index(Rng& rng, int m) { return static_cast<int>(uniform_int(rng, 0, m)); }

}  // namespace conbi
