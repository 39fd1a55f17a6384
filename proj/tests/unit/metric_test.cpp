#include <gtest/gtest.h>

#include "conbi/bicombing.hpp"
#include "conbi/metric.hpp"
#include "conbi/rational.hpp"
#include "conbi/sampling.hpp"

using namespace conbi;

namespace {

std::vector<std::vector<Rational>> matrix(std::initializer_list<std::initializer_list<int>> rows) {
  std::vector<std::vector<Rational>> d;
  for (auto r : rows) {
    d.emplace_back();
    for (int v : r) d.back().emplace_back(v);
  }
  return d;
}

}  // namespace

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(parse_rational("1/2"), Rational(1, 2));
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(parse_rational("-2.5e-3"), Rational(-1, 400));
  EXPECT_EQ(parse_rational(" 7 "), Rational(7));
  EXPECT_EQ(parse_rational("1.5/3"), Rational(1, 2));
  EXPECT_THROW(parse_rational("1/0"), InputError);
  EXPECT_THROW(parse_rational("abc"), InputError);
  EXPECT_THROW(parse_rational(""), InputError);
}

TEST(Rational, DoubleConversionIsExact) {
  EXPECT_EQ(exact_rational(0.375), Rational(3, 8));
  EXPECT_EQ(to_double(exact_rational(0.1)), 0.1);
}

TEST(ValidateMetric, AcceptsTwoPointMetric) {
  auto m = validate_metric(matrix({{0, 1}, {1, 0}}));
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.labels()[1], "p1");
  EXPECT_EQ(m(0, 1), 1.0);
}

TEST(ValidateMetric, ReportsAsymmetry) {
  try {
    validate_metric(matrix({{0, 1}, {2, 0}}));
    FAIL() << "expected MetricError";
  } catch (const MetricError& e) {
    EXPECT_EQ(e.axiom(), MetricAxiom::asymmetry);
    EXPECT_EQ(e.i(), 0u);
    EXPECT_EQ(e.j(), 1u);
    EXPECT_STREQ(e.what(), "asymmetry at (0,1)");
  }
}

TEST(ValidateMetric, ReportsTriangleWithIntermediatePoint) {
  try {
    validate_metric(matrix({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}));
    FAIL() << "expected MetricError";
  } catch (const MetricError& e) {
    EXPECT_EQ(e.axiom(), MetricAxiom::triangle);
    EXPECT_EQ(e.i(), 0u);
    EXPECT_EQ(e.j(), 2u);
    EXPECT_EQ(e.k(), 1u);
    EXPECT_STREQ(e.what(), "triangle violation at (0,2) via 1");
  }
}

TEST(ValidateMetric, ReportsEachAxiom) {
  auto axiom_of = [](std::vector<std::vector<Rational>> d) {
    try {
      validate_metric(std::move(d));
    } catch (const MetricError& e) {
      return e.axiom();
    }
    return MetricAxiom::not_square;
  };
  EXPECT_EQ(axiom_of(matrix({{1, 1}, {1, 0}})), MetricAxiom::nonzero_diagonal);
  EXPECT_EQ(axiom_of(matrix({{0, -1}, {-1, 0}})), MetricAxiom::negative_entry);
  EXPECT_EQ(axiom_of(matrix({{0, 0}, {0, 0}})), MetricAxiom::zero_distance);
  EXPECT_THROW(validate_metric(matrix({{0, 1}, {1}})), MetricError);
  EXPECT_THROW(validate_metric(matrix({{0, 1}, {1, 0}}), {"a"}), InputError);
}

TEST(Dist, SupNormOnLinf) {
  SpaceDescriptor s = LinfSpace{2};
  EXPECT_EQ(dist(s, make_vec({0, 0}), make_vec({1, 2})), 2.0);
}

TEST(Dist, MatrixLookupOnFiniteSpace) {
  SpaceDescriptor s = FiniteSpace{validate_metric(matrix({{0, 1}, {1, 0}}))};
  EXPECT_EQ(dist(s, std::size_t{0}, std::size_t{1}), 1.0);
}

TEST(Dist, SupNormOnTightSpan) {
  SpaceDescriptor s = TightSpan(validate_metric(matrix({{0, 1}, {1, 0}})));
  EXPECT_EQ(dist(s, make_vec({0, 1}), make_vec({1, 0})), 1.0);
}

TEST(Dist, RejectsMixedAndForeignPoints) {
  SpaceDescriptor lin = LinfSpace{2};
  EXPECT_THROW(dist(lin, std::size_t{0}, make_vec({0, 0})), InputError);
  SpaceDescriptor h = HalfPlane{};
  EXPECT_THROW(dist(h, make_vec({0, -1}), make_vec({0, 0})), InputError);
  SpaceDescriptor ts = TightSpan(validate_metric(matrix({{0, 1}, {1, 0}})));
  EXPECT_THROW(dist(ts, make_vec({5, 5}), make_vec({0, 1})), InputError);
}

TEST(Dist, SymmetryAndTriangleOnSamples) {
  Rng rng(7);
  LinfSpace s{3};
  for (int k = 0; k < 1000; ++k) {
    Vec p = random_vec(rng, 3, 5), q = random_vec(rng, 3, 5), r = random_vec(rng, 3, 5);
    EXPECT_EQ(s.distance(p, q), s.distance(q, p));
    EXPECT_LE(s.distance(p, r), s.distance(p, q) + s.distance(q, r) + 1e-12);
  }
  auto m = random_finite_metric(rng, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      for (std::size_t k = 0; k < 6; ++k) EXPECT_LE(m.exact(i, k), m.exact(i, j) + m.exact(j, k));
    }
  }
}

TEST(LinearBicombing, MidpointAndEndpoints) {
  auto sigma = linear_bicombing(LinfSpace{2});
  EXPECT_TRUE(approx_equal(sigma(make_vec({0, 0}), make_vec({2, 2}), 0.5), make_vec({1, 1})));
  Vec x = make_vec({0.3, -1.7}), y = make_vec({5, 2});
  EXPECT_TRUE(point_equal(sigma(x, y, 0.0), x));
  EXPECT_TRUE(point_equal(sigma(x, y, 1.0), y));
  EXPECT_TRUE(sigma.claimed().conical);
  EXPECT_TRUE(sigma.claimed().reversible);
}

TEST(LinearBicombing, ConicalOnRandomQuadruples) {
  Rng rng(11);
  auto sigma = linear_bicombing(LinfSpace{2});
  double worst = -1;
  for (int k = 0; k < 1000; ++k) {
    Vec x = random_vec(rng, 2, 4), y = random_vec(rng, 2, 4), xp = random_vec(rng, 2, 4), yp = random_vec(rng, 2, 4);
    const double t = grid_value(random_grid_index(rng, kDefaultGrid), kDefaultGrid);
    const double lhs = sup_distance(sigma(x, y, t), sigma(xp, yp, t));
    const double rhs = (1 - t) * sup_distance(x, xp) + t * sup_distance(y, yp);
    worst = std::max(worst, lhs - rhs);
  }
  EXPECT_LE(worst, 1e-12);
}
