#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "conbi/error.hpp"
#include "conbi/rational.hpp"

namespace conbi {

/// Largest coordinate dimension (and largest tight-span base size) supported.
inline constexpr int kMaxDim = 16;

/// Coordinate vector for linf, half-plane and tight-span points. Stack allocated.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Equality tolerance for points of coordinate spaces.
inline constexpr double kPointTolerance = 1e-12;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline double sup_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw InputError("points of different dimension");
  return (a - b).cwiseAbs().maxCoeff();
}

inline bool approx_equal(const Vec& a, const Vec& b, double tol = kPointTolerance) {
  return a.size() == b.size() && sup_distance(a, b) <= tol;
}

/// Lexicographic order; used to canonicalize supports and cache keys.
inline bool point_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}
inline bool point_less(std::size_t a, std::size_t b) { return a < b; }
inline bool point_equal(const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; }
inline bool point_equal(std::size_t a, std::size_t b) { return a == b; }

inline std::vector<double> coords(const Vec& p) { return {p.data(), p.data() + p.size()}; }
inline std::vector<double> coords(std::size_t p) { return {static_cast<double>(p)}; }

// ---------------------------------------------------------------------------
// Finite metrics

/// Which metric axiom a matrix violates.
enum class MetricAxiom { not_square, nonzero_diagonal, negative_entry, asymmetry, zero_distance, triangle };

inline const char* axiom_name(MetricAxiom a) {
  switch (a) {
    case MetricAxiom::not_square: return "not square";
    case MetricAxiom::nonzero_diagonal: return "nonzero diagonal";
    case MetricAxiom::negative_entry: return "negative entry";
    case MetricAxiom::asymmetry: return "asymmetry";
    case MetricAxiom::zero_distance: return "zero distance between distinct points";
    case MetricAxiom::triangle: return "triangle violation";
  }
  return "unknown";
}

class MetricError : public InputError {
 public:
  MetricError(MetricAxiom axiom, std::size_t i, std::size_t j, std::size_t k = 0)
      : InputError(describe(axiom, i, j, k)), axiom_(axiom), i_(i), j_(j), k_(k) {}

  MetricAxiom axiom() const { return axiom_; }
  std::size_t i() const { return i_; }
  std::size_t j() const { return j_; }
  /// Intermediate index for triangle violations.
  std::size_t k() const { return k_; }

 private:
  static std::string describe(MetricAxiom axiom, std::size_t i, std::size_t j, std::size_t k) {
    std::string msg = std::string(axiom_name(axiom)) + " at (" + std::to_string(i) + "," + std::to_string(j) + ")";
    if (axiom == MetricAxiom::triangle) msg += " via " + std::to_string(k);
    return msg;
  }

  MetricAxiom axiom_;
  std::size_t i_, j_, k_;
};

/// A validated finite metric space with exact rational distances.
class FiniteMetric {
 public:
  FiniteMetric() = default;

  /// Checks every axiom; throws MetricError naming the first violation found.
  static FiniteMetric validate(std::vector<std::vector<Rational>> d, std::vector<std::string> labels = {}) {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i].size() != n) throw MetricError(MetricAxiom::not_square, i, d[i].size());
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][i] != 0) throw MetricError(MetricAxiom::nonzero_diagonal, i, i);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][j] < 0) throw MetricError(MetricAxiom::negative_entry, i, j);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (d[i][j] != d[j][i]) throw MetricError(MetricAxiom::asymmetry, i, j);
        if (d[i][j] == 0) throw MetricError(MetricAxiom::zero_distance, i, j);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          if (d[i][j] > d[i][k] + d[k][j]) throw MetricError(MetricAxiom::triangle, i, j, k);
        }
      }
    }
    if (labels.empty()) {
      for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
    }
    if (labels.size() != n) throw InputError("label count does not match matrix size");
    FiniteMetric m;
    m.exact_ = std::move(d);
    m.labels_ = std::move(labels);
    m.approx_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        m.approx_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = to_double(m.exact_[i][j]);
      }
    }
    return m;
  }

  std::size_t size() const { return exact_.size(); }
  const Rational& exact(std::size_t i, std::size_t j) const { return exact_[i][j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return approx_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const { return approx_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::vector<Rational>>& exact_matrix() const { return exact_; }

 private:
  std::vector<std::vector<Rational>> exact_;
  std::vector<std::string> labels_;
  Eigen::MatrixXd approx_;
};

/// Free-function spelling of FiniteMetric::validate.
inline FiniteMetric validate_metric(std::vector<std::vector<Rational>> d, std::vector<std::string> labels = {}) {
  return FiniteMetric::validate(std::move(d), std::move(labels));
}

// ---------------------------------------------------------------------------
// Spaces

/// A finite metric space; points are indices.
struct FiniteSpace {
  using Point = std::size_t;
  using Exact = Rational;

  FiniteMetric metric;

  double distance(Point p, Point q) const { return metric(p, q); }
  Rational exact_distance(Point p, Point q) const { return metric.exact(p, q); }
  bool contains(Point p) const { return p < metric.size(); }
  std::size_t size() const { return metric.size(); }
  const char* kind() const { return "finite"; }
};

/// (R^n, sup norm).
struct LinfSpace {
  using Point = Vec;
  using Exact = double;

  int dim = 2;

  double distance(const Point& p, const Point& q) const { return sup_distance(p, q); }
  double exact_distance(const Point& p, const Point& q) const { return sup_distance(p, q); }
  bool contains(const Point& p) const { return p.size() == dim && p.allFinite(); }
  const char* kind() const { return "linf"; }
};

/// Upper half-plane {(s, t) : t >= 0} inside linf^2.
struct HalfPlane {
  using Point = Vec;
  using Exact = double;

  double distance(const Point& p, const Point& q) const { return sup_distance(p, q); }
  double exact_distance(const Point& p, const Point& q) const { return sup_distance(p, q); }
  bool contains(const Point& p) const { return p.size() == 2 && p.allFinite() && p[1] >= 0.0; }
  const char* kind() const { return "halfplane"; }
};

/// Tight span E(X) of a finite metric; points are extremal functions on X.
class TightSpan {
 public:
  using Point = Vec;
  using Exact = double;

  TightSpan() = default;
  explicit TightSpan(FiniteMetric metric, double membership_tol = 1e-8)
      : metric_(std::move(metric)), membership_tol_(membership_tol) {
    if (metric_.size() == 0 || metric_.size() > static_cast<std::size_t>(kMaxDim)) {
      throw InputError("tight span needs 1.." + std::to_string(kMaxDim) + " base points");
    }
  }

  const FiniteMetric& metric() const { return metric_; }
  const Eigen::MatrixXd& d() const { return metric_.matrix(); }
  int base_size() const { return static_cast<int>(metric_.size()); }
  double membership_tolerance() const { return membership_tol_; }

  double distance(const Point& p, const Point& q) const { return sup_distance(p, q); }
  double exact_distance(const Point& p, const Point& q) const { return sup_distance(p, q); }

  /// f*(x) = max_y (d(x, y) - f(y)).
  Vec star(const Vec& f) const {
    const auto n = static_cast<Eigen::Index>(base_size());
    Vec out(n);
    for (Eigen::Index x = 0; x < n; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index y = 0; y < n; ++y) best = std::max(best, d()(x, y) - f[y]);
      out[x] = best;
    }
    return out;
  }

  /// ||f - f*||_inf.
  double residual(const Vec& f) const { return sup_distance(f, star(f)); }

  /// min over x, y of f(x) + f(y) - d(x, y); nonnegative iff f lies in Delta(X).
  double delta_slack(const Vec& f) const {
    const auto n = static_cast<Eigen::Index>(base_size());
    double slack = std::numeric_limits<double>::infinity();
    for (Eigen::Index x = 0; x < n; ++x) {
      for (Eigen::Index y = x; y < n; ++y) slack = std::min(slack, f[x] + f[y] - d()(x, y));
    }
    return slack;
  }

  bool contains(const Point& p) const {
    return p.size() == base_size() && p.allFinite() && residual(p) <= membership_tol_ &&
           delta_slack(p) >= -membership_tol_;
  }
  const char* kind() const { return "tightspan"; }

 private:
  FiniteMetric metric_;
  double membership_tol_ = 1e-8;
};

/// Runtime description of any supported space (CLI and file level).
using SpaceDescriptor = std::variant<FiniteSpace, LinfSpace, HalfPlane, TightSpan>;
using AnyPoint = std::variant<std::size_t, Vec>;

/// Distance between two points of a runtime space; both must belong to it.
inline double dist(const SpaceDescriptor& space, const AnyPoint& p, const AnyPoint& q) {
  return std::visit(
      [&](const auto& s) -> double {
        using P = typename std::decay_t<decltype(s)>::Point;
        const P* a = std::get_if<P>(&p);
        const P* b = std::get_if<P>(&q);
        if (a == nullptr || b == nullptr) throw InputError(std::string("point does not belong to a ") + s.kind() + " space");
        if (!s.contains(*a) || !s.contains(*b)) throw InputError(std::string("point outside the ") + s.kind() + " space");
        return s.distance(*a, *b);
      },
      space);
}

inline const char* kind_of(const SpaceDescriptor& space) {
  return std::visit([](const auto& s) { return s.kind(); }, space);
}

}  // namespace conbi
