#include <gtest/gtest.h>

#include "conbi/halfplane.hpp"
#include "conbi/improve.hpp"
#include "conbi/sampling.hpp"
#include "conbi/tight_span.hpp"

using namespace conbi;

namespace {

const LinfSpace kPlane{2};

std::vector<Sample<Vec>> halfplane_samples(Rng& rng, std::size_t count, std::size_t npoints, std::size_t nparams,
                                           double box = 1.0) {
  return make_samples<Vec>(rng, count, npoints, nparams, kDefaultGrid,
                           [&] { return random_halfplane_point(rng, box); });
}

std::vector<Vec> linear_interior(const Vec& x, const Vec& y, int n) {
  std::vector<Vec> out;
  for (int i = 1; i < n; ++i) out.push_back((1.0 - static_cast<double>(i) / n) * x + (static_cast<double>(i) / n) * y);
  return out;
}

template <class Space>
double grid_gap(const Bicombing<Space>& a, const Bicombing<Space>& b, const Vec& x, const Vec& y) {
  double worst = 0.0;
  for (int j = 0; j <= a.grid(); ++j) {
    const double t = grid_value(j, a.grid());
    worst = std::max(worst, sup_distance(a(x, y, t), b(x, y, t)));
  }
  return worst;
}

}  // namespace

TEST(ScaleIndex, SelectionRule) {
  EXPECT_EQ(scale_index(0.3, 10), 3);
  EXPECT_EQ(scale_index(0.0, 10), 0);
  EXPECT_EQ(scale_index(0.05, 10), 1);
  EXPECT_EQ(scale_index(0.31, 10), 4);
  EXPECT_EQ(scale_index(1.0, 1), 1);
  EXPECT_EQ(scale_index(1.5, 2), 3);
}

TEST(Subdivide, OneIsSigma) {
  Rng rng(1);
  const auto sh = sigma_h();
  const auto c1 = subdivide(sh, linear_halfplane(), 1);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_halfplane_point(rng, 3), y = random_halfplane_point(rng, 3);
    EXPECT_EQ(grid_gap(c1, sh, x, y), 0.0);
  }
}

TEST(Subdivide, LinearStaysLinear) {
  Rng rng(2);
  const auto lin = linear_bicombing(kPlane);
  for (int n : {2, 3, 4, 5, 8}) {
    const auto c = subdivide(lin, lin, n);
    for (int k = 0; k < 10; ++k) {
      const Vec x = random_vec(rng, 2, 5), y = random_vec(rng, 2, 5);
      EXPECT_LE(grid_gap(c, lin, x, y), 1e-12);
    }
  }
}

TEST(Subdivide, HalfplaneIsConicalGeodesic) {
  Rng rng(3);
  const auto c3 = subdivide(sigma_h(), linear_halfplane(), 3);
  EXPECT_LE(conical_defect(c3, halfplane_samples(rng, 1000, 4, 1, 3.0)).max_violation, 1e-8);
  EXPECT_LE(geodesic_defect(c3, halfplane_samples(rng, 300, 2, 2, 3.0)).max_violation, 1e-8);
}

TEST(Subdivide, GridMustBeDivisible) {
  EXPECT_THROW(subdivide(sigma_h(), linear_halfplane(), 7), InputError);
  EXPECT_THROW(subdivide(sigma_h(), linear_halfplane(), 0), InputError);
}

TEST(ChainFixedPoint, LinearGivesUniformPoints) {
  Rng rng(4);
  const auto lin = linear_bicombing(kPlane);
  for (int n : {1, 2, 5, 8}) {
    const Vec x = random_vec(rng, 2, 5), y = random_vec(rng, 2, 5);
    const auto c = chain_fixed_point(lin, x, y, n);
    ASSERT_EQ(c.points.size(), static_cast<std::size_t>(n + 1));
    EXPECT_TRUE(point_equal(c.points.front(), x));
    EXPECT_TRUE(point_equal(c.points.back(), y));
    for (int i = 0; i <= n; ++i) {
      const double s = static_cast<double>(i) / n;
      EXPECT_LE(sup_distance(c.points[i], (1 - s) * x + s * y), 1e-9);
    }
    EXPECT_LE(c.residual, 1e-11);
  }
}

TEST(ChainFixedPoint, TwoPiecesTakeOneStep) {
  const auto sh = sigma_h();
  const auto [p, q] = halfplane_witness_pair();
  ChainOptions<Vec> opt;
  opt.initial = linear_interior(p, q, 2);
  const auto c = chain_fixed_point(sh, p, q, 2, opt);
  EXPECT_EQ(c.iterations, 1);
  EXPECT_TRUE(approx_equal(c.points[1], sh.midpoint(p, q), 0.0));
  EXPECT_EQ(chain_fixed_point(sh, p, q, 2).iterations, 0);
}

TEST(ChainFixedPoint, InitialisationsAgree) {
  Rng rng(5);
  TightSpan ts(random_finite_metric(rng, 4));
  const auto ex = ex_bicombing(ts);
  const auto sh = sigma_h();
  for (int k = 0; k < 5; ++k) {
    const Vec x = random_tightspan_point(rng, ts), y = random_tightspan_point(rng, ts);
    const auto a = chain_fixed_point(ex, x, y, 4);
    ChainOptions<Vec> opt;
    opt.initial = random_chain_init(ex, x, y, 4, rng);
    const auto b = chain_fixed_point(ex, x, y, 4, opt);
    for (int i = 0; i <= 4; ++i) EXPECT_LE(sup_distance(a.points[i], b.points[i]), 1e-7);
    EXPECT_LE(chain_spacing_defect(ts, a), 1e-8);
  }
  for (int n : {3, 5, 8}) {
    const Vec x = random_halfplane_point(rng, 2), y = random_halfplane_point(rng, 2);
    const auto a = chain_fixed_point(sh, x, y, n);
    ChainOptions<Vec> opt;
    opt.initial = random_chain_init(sh, x, y, n, rng);
    const auto b = chain_fixed_point(sh, x, y, n, opt);
    for (int i = 0; i <= n; ++i) EXPECT_LE(sup_distance(a.points[i], b.points[i]), 1e-7);
    EXPECT_LE(chain_spacing_defect(HalfPlane{}, b), 1e-8);
  }
}

TEST(ChainFixedPoint, BudgetAndArguments) {
  const auto sh = sigma_h();
  const Vec x = make_vec({-2, 0}), y = make_vec({2, 0});
  ChainOptions<Vec> opt;
  opt.initial = std::vector<Vec>(5, make_vec({0, 5}));
  opt.budget = 2;
  EXPECT_THROW(chain_fixed_point(sh, x, y, 6, opt), BudgetExceeded);
  opt.initial = std::vector<Vec>(2, x);
  EXPECT_THROW(chain_fixed_point(sh, x, y, 6, opt), InputError);
  EXPECT_THROW(chain_fixed_point(sh, x, y, 0), InputError);
  EXPECT_EQ(default_chain_budget(4, 1e-11), 8800);
}

TEST(SigmaN, FirstIsSigmaAndLinearIsFixed) {
  Rng rng(6);
  const auto sh = sigma_h();
  const auto s1 = sigma_n(sh, 1);
  const auto lin = linear_bicombing(kPlane);
  for (int k = 0; k < 10; ++k) {
    const Vec x = random_halfplane_point(rng, 2), y = random_halfplane_point(rng, 2);
    EXPECT_EQ(grid_gap(s1, sh, x, y), 0.0);
    const Vec u = random_vec(rng, 2, 5), v = random_vec(rng, 2, 5);
    for (int n : {2, 3, 6}) EXPECT_LE(grid_gap(sigma_n(lin, n), lin, u, v), 1e-9);
  }
}

TEST(SigmaN, HalfplaneIsConical) {
  Rng rng(7);
  const auto s2 = sigma_n(sigma_h(), 2);
  EXPECT_LE(conical_defect(s2, halfplane_samples(rng, 1000, 4, 1, 2.0)).max_violation, 1e-8);
  EXPECT_LE(geodesic_defect(s2, halfplane_samples(rng, 300, 2, 2, 2.0)).max_violation, 1e-8);
}

TEST(ChainCache, ReusesAndEvicts) {
  auto cache = std::make_shared<ChainCache<HalfPlane>>(sigma_h(), 1e-11, 3);
  const Vec x = make_vec({0, 0});
  for (int k = 1; k <= 5; ++k) cache->get(x, make_vec({static_cast<double>(k), 0}), 4);
  EXPECT_EQ(cache->size(), 3u);
  const auto a = cache->get(x, make_vec({5, 0}), 4);
  const auto b = cache->get(x, make_vec({5, 0}), 4);
  EXPECT_EQ(cache->size(), 3u);
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_TRUE(point_equal(a.points[i], b.points[i]));
}

TEST(CompositionDefect, IdentityAndHalfplane) {
  Rng rng(8);
  auto lin_cache = std::make_shared<ChainCache<LinfSpace>>(linear_bicombing(kPlane));
  const auto lin_samples =
      make_samples<Vec>(rng, 50, 2, 1, kDefaultGrid, [&] { return random_vec(rng, 2, 3); });
  EXPECT_LE(composition_defect(lin_cache, 6, 3, lin_samples).max_violation, 1e-9);

  auto cache = std::make_shared<ChainCache<HalfPlane>>(sigma_h());
  const auto samples = halfplane_samples(rng, 60, 2, 1, 2.0);
  EXPECT_EQ(composition_defect(cache, 4, 4, samples).max_violation, 0.0);
  for (int n = 2; n <= 8; ++n) {
    for (int k = 1; k <= n; ++k) {
      const auto r = composition_defect(cache, n, k, samples);
      EXPECT_LE(r.max_violation, 1e-7) << r.property;
    }
  }
  EXPECT_THROW(composition_defect(cache, 3, 4, samples), InputError);
}

TEST(ScaleSelected, ConstantOnDiagonalAndGeodesic) {
  Rng rng(9);
  auto cache = std::make_shared<ChainCache<HalfPlane>>(sigma_h());
  const auto s5 = s_n(cache, 5);
  const Vec x = make_vec({0.4, 0.2});
  for (int j = 0; j <= kDefaultGrid; ++j) EXPECT_TRUE(point_equal(s5(x, x, grid_value(j, kDefaultGrid)), x));
  // d <= 1/n selects sigma itself.
  const Vec y = make_vec({0.5, 0.25});
  EXPECT_EQ(grid_gap(s5, sigma_h(), x, y), 0.0);
  EXPECT_LE(geodesic_defect(s5, halfplane_samples(rng, 300, 2, 2)).max_violation, 1e-8);
}

TEST(ScaleSelected, ConsistencyWithinTwoOverN) {
  Rng rng(10);
  auto cache = std::make_shared<ChainCache<HalfPlane>>(sigma_h());
  auto lin_cache = std::make_shared<ChainCache<LinfSpace>>(linear_bicombing(kPlane));
  const auto lin_samples =
      make_samples<Vec>(rng, 100, 2, 3, kDefaultGrid, [&] { return random_vec(rng, 2, 1); });
  EXPECT_LE(consistency_bound_check(lin_cache, 5, lin_samples).max_violation, 1e-9);
  for (int n : {5, 50}) {
    const auto r = consistency_bound_check(cache, n, halfplane_samples(rng, 200, 2, 3));
    EXPECT_TRUE(r.passed()) << r.property << " " << r.max_violation;
    EXPECT_LE(r.max_violation, 2.0 / n + 1e-7);
  }
}

TEST(ScaleSelected, StraightnessInheritsBaseDefectOnShortPairs) {
  // sigma_H is not straight, and s^(n) equals sigma_H on pairs with d <= 1/n,
  // so its straightness defect there is the base defect, not zero.
  Rng rng(11);
  const auto sh = sigma_h();
  auto cache = std::make_shared<ChainCache<HalfPlane>>(sh);
  const Vec x = make_vec({0.710938, 0.292969}), y = make_vec({-0.773438, 0.046875}), z = make_vec({-0.175781, 0.332031});
  const std::vector<Sample<Vec>> witness{{{x, y, z}, {0.666667, 0.283333}}};
  EXPECT_GT(straightness_defect(sh, witness).max_violation, 0.05);
  const auto s10 = s_n(cache, 10);
  const auto short_pairs = halfplane_samples(rng, 500, 3, 2, 0.04);
  for (const auto& q : short_pairs) ASSERT_EQ(scale_index(sup_distance(q.points[0], q.points[1]), 10), 1);
  EXPECT_EQ(straightness_defect(s10, short_pairs).max_raw, straightness_defect(sh, short_pairs).max_raw);
  auto lin_cache = std::make_shared<ChainCache<LinfSpace>>(linear_bicombing(kPlane));
  const auto lin_samples = make_samples<Vec>(rng, 300, 3, 2, kDefaultGrid, [&] { return random_vec(rng, 2, 1); });
  EXPECT_LE(straightness_defect(s_n(lin_cache, 5), lin_samples).max_violation, 1e-7);
}

TEST(ScaleSelected, EqualLengthConvexityWithinTwoOverN) {
  Rng rng(12);
  auto cache = std::make_shared<ChainCache<HalfPlane>>(sigma_h());
  for (int n : {2, 5, 10}) {
    const auto s = s_n(cache, n);
    // Equal-length pairs: translate the first pair horizontally.
    std::vector<Sample<Vec>> pairs;
    for (const auto& q : halfplane_samples(rng, 200, 2, 2)) {
      const Vec shift = make_vec({uniform_real(rng, -1, 1), 0});
      pairs.push_back({{q.points[0], q.points[1], Vec(q.points[0] + shift), Vec(q.points[1] + shift)}, q.params});
    }
    const auto r = convexity_defect(s, pairs, true, 2.0 / n + 1e-7);
    EXPECT_EQ(r.samples, pairs.size());
    EXPECT_TRUE(r.passed()) << r.max_violation;
  }
}

TEST(CauchyCheck, WithinOneOverNPlusOne) {
  Rng rng(13);
  auto cache = std::make_shared<ChainCache<HalfPlane>>(sigma_h());
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 40; ++k) pairs.emplace_back(random_halfplane_point(rng, 1), random_halfplane_point(rng, 1));
  pairs.push_back(halfplane_witness_pair());
  for (int n : {3, 7}) {
    const auto r = cauchy_check(cache, n, make_vec({0, 0}), pairs);
    EXPECT_TRUE(r.passed()) << r.max_violation;
    EXPECT_NEAR(r.tolerance, 1.0 / (n + 1) + 1e-6, 1e-15);
    ASSERT_EQ(r.witness_params.size(), 2u);
  }
  auto lin_cache = std::make_shared<ChainCache<LinfSpace>>(linear_bicombing(kPlane));
  std::vector<std::pair<Vec, Vec>> lp;
  for (int k = 0; k < 20; ++k) lp.emplace_back(random_vec(rng, 2, 1), random_vec(rng, 2, 1));
  EXPECT_LE(cauchy_check(lin_cache, 3, make_vec({0, 0}), lp).max_violation, 1e-9);
}
