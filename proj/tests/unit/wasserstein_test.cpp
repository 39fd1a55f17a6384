#include <gtest/gtest.h>

#include "conbi/sampling.hpp"
#include "conbi/tight_span.hpp"
#include "conbi/wasserstein.hpp"
#include "oracles.hpp"

using namespace conbi;

namespace {

FiniteSpace two_points() {
  return FiniteSpace{validate_metric({{Rational(0), Rational(1)}, {Rational(1), Rational(0)}})};
}

}  // namespace

TEST(DiscreteMeasure, MergesDuplicatesAndSorts) {
  DiscreteMeasure<std::size_t> mu({2, 0, 2}, {Rational(1, 4), Rational(1, 2), Rational(1, 4)});
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_EQ(mu.atom(0), 0u);
  EXPECT_EQ(mu.weight(1), Rational(1, 2));
  EXPECT_EQ(mu.common_denominator(), 2);
}

TEST(DiscreteMeasure, RejectsBadWeights) {
  EXPECT_THROW(DiscreteMeasure<std::size_t>({0, 1}, {Rational(1, 2), Rational(1, 3)}), InputError);
  EXPECT_THROW(DiscreteMeasure<std::size_t>({0, 1}, {Rational(3, 2), Rational(-1, 2)}), InputError);
  EXPECT_THROW(DiscreteMeasure<std::size_t>({}, {}), InputError);
}

TEST(W1TwoPoint, DiracMarginalsGiveDistance) {
  LinfSpace s{2};
  Vec x = make_vec({0, 0}), y = make_vec({3, 1});
  for (double a : {0.0, 0.25, 0.7, 1.0}) {
    for (double b : {0.0, 0.5, 1.0}) EXPECT_DOUBLE_EQ(w1_two_point(s, x, x, a, y, y, b).value, 3.0);
  }
}

TEST(W1TwoPoint, SameSupportDifferentWeights) {
  auto s = two_points();
  for (int j = 0; j <= 8; ++j) {
    for (int k = j; k <= 8; ++k) {
      Rational a(j, 8), b(k, 8);
      EXPECT_EQ(w1_two_point(s, std::size_t{0}, std::size_t{1}, a, std::size_t{0}, std::size_t{1}, b).value, b - a);
    }
  }
}

TEST(W1TwoPoint, MatchesTransportOnLinf) {
  Rng rng(3);
  LinfSpace s{2};
  for (int k = 0; k < 2000; ++k) {
    Vec x1 = random_vec(rng, 2, 3), x2 = random_vec(rng, 2, 3), y1 = random_vec(rng, 2, 3), y2 = random_vec(rng, 2, 3);
    Rational a(uniform_int(rng, 0, 12), 12), b(uniform_int(rng, 0, 12), 12);
    auto mu = DiscreteMeasure<Vec>::two_point(x1, x2, a);
    auto nu = DiscreteMeasure<Vec>::two_point(y1, y2, b);
    const double two = w1_two_point(s, x1, x2, to_double(a), y1, y2, to_double(b)).value;
    EXPECT_NEAR(two, w1_general(s, mu, nu).value, 1e-9);
    EXPECT_NEAR(two, oracle::lp_transport(s, mu, nu), 1e-9);
  }
}

TEST(W1TwoPoint, ExactOnFiniteMetrics) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    FiniteSpace s{random_finite_metric(rng, 5)};
    auto pick = [&] { return static_cast<std::size_t>(uniform_int(rng, 0, 4)); };
    std::size_t x1 = pick(), x2 = pick(), y1 = pick(), y2 = pick();
    Rational a(uniform_int(rng, 0, 10), 10), b(uniform_int(rng, 0, 10), 10);
    auto mu = DiscreteMeasure<std::size_t>::two_point(x1, x2, a);
    auto nu = DiscreteMeasure<std::size_t>::two_point(y1, y2, b);
    EXPECT_EQ(w1_two_point(s, x1, x2, a, y1, y2, b).value, oracle::lp_transport(s, mu, nu));
  }
}

TEST(W1TwoPoint, RejectsWeightsOutsideUnitInterval) {
  LinfSpace s{1};
  Vec x = make_vec({0});
  EXPECT_THROW(w1_two_point(s, x, x, 1.5, x, x, 0.5), InputError);
}

TEST(W1Uniform, SinglePointAndIdentity) {
  LinfSpace s{2};
  auto one = w1_uniform(s, {make_vec({0, 0})}, {make_vec({1, 3})});
  EXPECT_EQ(one.value, 3.0);
  EXPECT_EQ(one.perm, std::vector<std::size_t>{0});
  std::vector<Vec> xs{make_vec({0, 0}), make_vec({1, 5}), make_vec({2, 2})};
  std::vector<Vec> ys{xs[2], xs[0], xs[1]};
  EXPECT_EQ(w1_uniform(s, xs, ys).value, 0.0);
  EXPECT_THROW(w1_uniform(s, xs, {xs[0]}), InputError);
}

TEST(W1Uniform, MatchesBruteForce) {
  Rng rng(9);
  LinfSpace s{2};
  for (int k = 0; k < 100; ++k) {
    std::vector<Vec> xs, ys;
    for (int i = 0; i < 5; ++i) {
      xs.push_back(random_vec(rng, 2, 4));
      ys.push_back(random_vec(rng, 2, 4));
    }
    auto r = w1_uniform(s, xs, ys);
    EXPECT_DOUBLE_EQ(r.value, oracle::brute_force_uniform(s, xs, ys));
    double via_perm = 0;
    for (int i = 0; i < 5; ++i) via_perm += s.distance(xs[i], ys[r.perm[i]]);
    EXPECT_DOUBLE_EQ(via_perm / 5, r.value);
  }
}

TEST(W1General, DiracTargetIsWeightedDistance) {
  Rng rng(13);
  FiniteSpace s{random_finite_metric(rng, 5)};
  auto mu = random_finite_measure(rng, 5, 3, 7);
  auto nu = DiscreteMeasure<std::size_t>::dirac(4);
  Rational expected = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) expected += mu.weight(i) * s.exact_distance(mu.atom(i), 4);
  EXPECT_EQ(w1_general(s, mu, nu).value, expected);
}

TEST(W1General, PlanIsFeasibleAndOptimal) {
  Rng rng(17);
  for (int k = 0; k < 200; ++k) {
    FiniteSpace s{random_finite_metric(rng, 6)};
    auto mu = random_finite_measure(rng, 6, 4, 12);
    auto nu = random_finite_measure(rng, 6, 5, 10);
    auto r = w1_general(s, mu, nu);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      Rational row = 0;
      for (std::size_t j = 0; j < nu.size(); ++j) {
        EXPECT_GE(r.plan[i][j], 0);
        row += r.plan[i][j];
      }
      EXPECT_EQ(row, mu.weight(i));
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
      Rational col = 0;
      for (std::size_t i = 0; i < mu.size(); ++i) col += r.plan[i][j];
      EXPECT_EQ(col, nu.weight(j));
    }
    EXPECT_EQ(plan_cost(s, mu, nu, r.plan), r.value);
    EXPECT_EQ(r.value, oracle::lp_transport(s, mu, nu));
  }
}

TEST(W1General, UniformMeasuresMatchAssignment) {
  Rng rng(19);
  LinfSpace s{2};
  for (int k = 0; k < 50; ++k) {
    std::vector<Vec> xs, ys;
    for (int i = 0; i < 4; ++i) {
      xs.push_back(random_vec(rng, 2, 4));
      ys.push_back(random_vec(rng, 2, 4));
    }
    auto mu = DiscreteMeasure<Vec>::uniform(xs);
    auto nu = DiscreteMeasure<Vec>::uniform(ys);
    EXPECT_NEAR(w1_general(s, mu, nu).value, w1_uniform(s, xs, ys).value, 1e-12);
  }
}

TEST(W1General, MetricAxiomsOnSamples) {
  Rng rng(23);
  FiniteSpace s{random_finite_metric(rng, 6)};
  for (int k = 0; k < 300; ++k) {
    auto a = random_finite_measure(rng, 6, 3, 6);
    auto b = random_finite_measure(rng, 6, 3, 6);
    auto c = random_finite_measure(rng, 6, 3, 6);
    const Rational ab = w1_general(s, a, b).value, ba = w1_general(s, b, a).value;
    EXPECT_EQ(ab, ba);
    EXPECT_LE(w1_general(s, a, c).value, ab + w1_general(s, b, c).value);
  }
}

TEST(KantorovichDual, EqualMeasuresGiveZero) {
  Rng rng(29);
  FiniteSpace s{random_finite_metric(rng, 4)};
  auto mu = random_finite_measure(rng, 4, 3, 5);
  auto r = kantorovich_dual(s, mu, mu);
  EXPECT_EQ(r.value, 0);
}

TEST(KantorovichDual, DiracsGiveDistance) {
  Rng rng(31);
  FiniteSpace s{random_finite_metric(rng, 5)};
  auto r = kantorovich_dual(s, DiscreteMeasure<std::size_t>::dirac(1), DiscreteMeasure<std::size_t>::dirac(3));
  EXPECT_EQ(r.value, s.exact_distance(1, 3));
  EXPECT_EQ(r.potential[1] - r.potential[3], s.exact_distance(1, 3));
}

TEST(KantorovichDual, StrongDualityAndFeasibility) {
  Rng rng(37);
  for (int k = 0; k < 60; ++k) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 2, 6));
    FiniteSpace s{random_finite_metric(rng, n)};
    auto mu = random_finite_measure(rng, n, 3, 8);
    auto nu = random_finite_measure(rng, n, 3, 9);
    auto dual = kantorovich_dual(s, mu, nu);
    EXPECT_EQ(dual.value, w1_general(s, mu, nu).value);
    EXPECT_TRUE(is_one_lipschitz(s, dual.potential));
  }
}

TEST(Pushforward, IdentityAndConstant) {
  Rng rng(41);
  auto mu = random_finite_measure(rng, 5, 4, 9);
  EXPECT_TRUE(pushforward(mu, [](std::size_t p) { return p; }) == mu);
  auto c = pushforward(mu, [](std::size_t) { return std::size_t{2}; });
  EXPECT_TRUE(c == DiscreteMeasure<std::size_t>::dirac(2));
}

TEST(Pushforward, EmbeddingPreservesW1) {
  Rng rng(43);
  for (int k = 0; k < 50; ++k) {
    FiniteSpace s{random_finite_metric(rng, 4)};
    TightSpan ts(s.metric);
    auto mu = random_finite_measure(rng, 4, 3, 6);
    auto nu = random_finite_measure(rng, 4, 3, 6);
    auto e = [&](std::size_t x) { return embed(ts, x); };
    const double lifted = w1_general(ts, pushforward(mu, e), pushforward(nu, e)).value;
    EXPECT_NEAR(lifted, to_double(w1_general(s, mu, nu).value), 1e-9);
  }
}
