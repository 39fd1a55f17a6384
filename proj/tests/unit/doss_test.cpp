#include <gtest/gtest.h>

#include "conbi/doss.hpp"
#include "conbi/halfplane.hpp"
#include "conbi/sampling.hpp"
#include "conbi/tight_span.hpp"

using namespace conbi;

namespace {

FiniteSpace segment_space() {
  return FiniteSpace{validate_metric({{Rational(0), Rational(1)}, {Rational(1), Rational(0)}}, {"a", "b"})};
}

template <class Space, class Gen>
void expect_bicombing_points_are_doss(const Bicombing<Space>& s, Rng& rng, Gen&& gen, int cases, int witnesses) {
  for (int k = 0; k < cases; ++k) {
    const Vec x = gen(), y = gen();
    const int j = random_grid_index(rng, s.grid());
    const double t = grid_value(j, s.grid());
    const auto mu = DiscreteMeasure<Vec>::two_point(x, y, Rational(j, s.grid()));
    std::vector<Vec> ws;
    for (int i = 0; i < witnesses; ++i) ws.push_back(gen());
    ws.push_back(x);
    ws.push_back(y);
    const auto r = doss_membership(s.space(), s(x, y, t), mu, ws, 1e-8);
    EXPECT_TRUE(r.member) << s.name() << " excess " << r.max_excess;
  }
}

}  // namespace

TEST(W1ToDirac, ClosedFormCases) {
  const auto seg = segment_space();
  EXPECT_EQ(w1_to_dirac(seg, DiscreteMeasure<std::size_t>::dirac(1), std::size_t{0}), Rational(1));
  EXPECT_EQ(w1_to_dirac(seg, DiscreteMeasure<std::size_t>::uniform({0, 1}), std::size_t{0}), Rational(1, 2));
  const LinfSpace plane{2};
  EXPECT_EQ(w1_to_dirac(plane, DiscreteMeasure<Vec>::dirac(make_vec({0, 0})), make_vec({3, -1.5})), 3.0);
}

TEST(W1ToDirac, AgreesWithGeneralTransport) {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    FiniteSpace space{random_finite_metric(rng, 6)};
    const auto mu = random_finite_measure(rng, 6, static_cast<std::size_t>(uniform_int(rng, 1, 5)), 12);
    const std::size_t x = static_cast<std::size_t>(uniform_int(rng, 0, 5));
    EXPECT_EQ(w1_to_dirac(space, mu, x), w1_general(space, mu, DiscreteMeasure<std::size_t>::dirac(x)).value);
  }
}

TEST(DossMembership, DiracCases) {
  Rng rng(2);
  FiniteSpace space{random_finite_metric(rng, 5)};
  const auto mu = DiscreteMeasure<std::size_t>::dirac(2);
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  EXPECT_TRUE(doss_membership(space, std::size_t{2}, mu, all).member);
  auto r = doss_membership(space, std::size_t{3}, mu, std::vector<std::size_t>{3, 2});
  EXPECT_FALSE(r.member);
  ASSERT_TRUE(r.violating.has_value());
  // At w = z the bound is d(x, z) > 0 = d(z, z), so the first violation is at x.
  EXPECT_EQ(*r.violating, 2u);
}

TEST(DossMembership, LinearPointInPlane) {
  Rng rng(3);
  const LinfSpace plane{2};
  for (int k = 0; k < 200; ++k) {
    const Vec x = random_vec(rng, 2, 5), y = random_vec(rng, 2, 5);
    const int j = random_grid_index(rng, 120);
    const double t = grid_value(j, 120);
    std::vector<Vec> ws;
    for (int i = 0; i < 200; ++i) ws.push_back(random_vec(rng, 2, 20));
    const auto mu = DiscreteMeasure<Vec>::two_point(x, y, Rational(j, 120));
    EXPECT_TRUE(doss_membership(plane, Vec((1 - t) * x + t * y), mu, ws).member);
  }
}

TEST(DossSetFinite, DiracGivesItsAtom) {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 7));
    FiniteSpace space{random_finite_metric(rng, n)};
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_EQ(doss_set_finite(space, DiscreteMeasure<std::size_t>::dirac(x)), std::vector<std::size_t>{x});
    }
  }
}

TEST(DossSetFinite, TwoPointUniformIsEmpty) {
  const auto seg = segment_space();
  const auto mu = DiscreteMeasure<std::size_t>::uniform({0, 1});
  EXPECT_TRUE(doss_set_finite(seg, mu).empty());
  // Exhaustive: each point fails at the other one, d = 1 > 1/2.
  for (std::size_t z = 0; z < 2; ++z) {
    auto r = doss_membership(seg, z, mu, std::vector<std::size_t>{0, 1});
    EXPECT_FALSE(r.member);
    EXPECT_EQ(*r.violating, 1 - z);
  }
}

TEST(DossSetFinite, MatchesExhaustiveMembership) {
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    FiniteSpace space{random_finite_metric(rng, 5)};
    const auto mu = random_finite_measure(rng, 5, 3, 6);
    std::vector<std::size_t> all{0, 1, 2, 3, 4}, expected;
    for (std::size_t z = 0; z < 5; ++z) {
      bool ok = true;
      for (std::size_t w = 0; w < 5; ++w) ok = ok && space.exact_distance(z, w) <= w1_to_dirac(space, mu, w);
      if (ok) expected.push_back(z);
    }
    EXPECT_EQ(doss_set_finite(space, mu), expected);
  }
}

TEST(DossMembership, TightSpanSegmentMidpoint) {
  const TightSpan ts(segment_space().metric);
  const Vec ea = embed(ts, 0), eb = embed(ts, 1);
  const auto mu = DiscreteMeasure<Vec>::uniform({ea, eb});
  std::vector<Vec> grid;
  for (int j = 0; j <= 40; ++j) grid.push_back(retract(ts, ea + (eb - ea) * (j / 40.0)));
  const auto r = doss_membership(ts, Vec(0.5 * (ea + eb)), mu, grid);
  EXPECT_TRUE(r.member);
  EXPECT_NEAR(r.max_excess, 0.0, 1e-12);
  EXPECT_FALSE(doss_membership(ts, Vec(0.75 * ea + 0.25 * eb), mu, grid).member);
}

TEST(BanachWitnessSearch, PerturbedMidpointHasWitness) {
  const Vec x = make_vec({0, 0}), y = make_vec({2, 0}), z = make_vec({1, 0.1});
  auto r = banach_witness_search(x, y, 0.5, z);
  ASSERT_TRUE(r.witness.has_value());
  const Vec& w = *r.witness;
  const double excess = sup_distance(z, w) - 0.5 * (sup_distance(x, w) + sup_distance(y, w));
  EXPECT_GT(excess, 1e-9);
  EXPECT_NEAR(excess, r.excess, 1e-12);
  // The far probe (1, -M) gives M + 0.1 against M.
  const Vec far = make_vec({1, -1000});
  EXPECT_NEAR(sup_distance(z, far) - 0.5 * (sup_distance(x, far) + sup_distance(y, far)), 0.1, 1e-9);
}

TEST(BanachWitnessSearch, LinearPointHasNone) {
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    const int n = static_cast<int>(uniform_int(rng, 1, 4));
    const Vec x = random_vec(rng, n, 3), y = random_vec(rng, n, 3);
    const double t = grid_value(random_grid_index(rng, 120), 120);
    WitnessSearchOptions opt;
    opt.random_probes = 500;
    EXPECT_FALSE(banach_witness_search(x, y, t, Vec((1 - t) * x + t * y), opt).witness.has_value());
  }
}

TEST(BanachWitnessSearch, ZeroWeightForcesLeftEndpoint) {
  const Vec x = make_vec({0.5, -1}), y = make_vec({2, 3}), z = make_vec({0.5, -0.5});
  auto r = banach_witness_search(x, y, 0.0, z);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_GT(r.excess, 1e-9);
  // z itself is a witness: d(z, z) = 0 < d(x, z).
  EXPECT_NEAR(sup_distance(z, z) - sup_distance(x, z), -0.5, 1e-12);
}

TEST(BanachWitnessSearch, RandomPerturbationsAreDetected) {
  Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    const Vec x = random_vec(rng, 2, 3), y = random_vec(rng, 2, 3);
    Vec z = 0.5 * (x + y);
    z[static_cast<Eigen::Index>(uniform_int(rng, 0, 1))] += uniform_real(rng, 0.05, 0.5);
    EXPECT_TRUE(banach_witness_search(x, y, 0.5, z).witness.has_value());
  }
}

TEST(DossMembership, ConicalBicombingPointsAreDoss) {
  Rng rng(8);
  const LinfSpace plane{2};
  expect_bicombing_points_are_doss(linear_bicombing(plane), rng, [&] { return random_vec(rng, 2, 5); }, 100, 100);
  expect_bicombing_points_are_doss(sigma_h(), rng, [&] { return random_halfplane_point(rng, 3); }, 100, 100);
  TightSpan ts(random_finite_metric(rng, 4));
  expect_bicombing_points_are_doss(ex_bicombing(ts), rng, [&] { return random_tightspan_point(rng, ts); }, 50, 50);
}
