#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "conbi/rational.hpp"

namespace conbi {

enum class Relation { less_equal, equal, greater_equal };
enum class LpStatus { optimal, infeasible, unbounded };

/// minimize c^T x  subject to  A_i x (rel_i) b_i,  x >= 0.
template <class Scalar>
struct LinearProgram {
  std::vector<std::vector<Scalar>> a;
  std::vector<Scalar> b;
  std::vector<Relation> rel;
  std::vector<Scalar> c;

  void add_row(std::vector<Scalar> row, Relation r, Scalar rhs) {
    a.push_back(std::move(row));
    rel.push_back(r);
    b.push_back(std::move(rhs));
  }
};

template <class Scalar>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Scalar value{};
  std::vector<Scalar> x;
  int pivots = 0;
};

namespace detail {

// Sign tests: exact for rationals, absolute tolerance for doubles.
template <class Scalar>
int lp_sign(const Scalar& v) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    constexpr Scalar tol = 1e-11;
    return v > tol ? 1 : (v < -tol ? -1 : 0);
  } else {
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
  }
}

template <class Scalar>
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_(rows + 1, std::vector<Scalar>(cols + 1)) {}

  Scalar& at(std::size_t r, std::size_t c) { return t_[r][c]; }
  const Scalar& at(std::size_t r, std::size_t c) const { return t_[r][c]; }
  Scalar& rhs(std::size_t r) { return t_[r][cols_]; }
  std::vector<Scalar>& objective() { return t_[rows_]; }

  void pivot(std::size_t r, std::size_t c) {
    const Scalar p = t_[r][c];
    for (auto& v : t_[r]) v /= p;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r || lp_sign(t_[i][c]) == 0) continue;
      const Scalar f = t_[i][c];
      for (std::size_t j = 0; j <= cols_; ++j) {
        if (lp_sign(t_[r][j]) != 0) t_[i][j] -= f * t_[r][j];
      }
      if constexpr (std::is_floating_point_v<Scalar>) t_[i][c] = 0;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_, cols_;
  std::vector<std::vector<Scalar>> t_;
};

// Bland's rule simplex on the objective row; columns >= allowed_cols never enter.
template <class Scalar>
LpStatus run_simplex(Tableau<Scalar>& tab, std::vector<std::size_t>& basis, std::size_t allowed_cols, int& pivots) {
  for (;;) {
    std::size_t enter = allowed_cols;
    for (std::size_t j = 0; j < allowed_cols; ++j) {
      if (lp_sign(tab.objective()[j]) < 0) {
        enter = j;
        break;
      }
    }
    if (enter == allowed_cols) return LpStatus::optimal;
    std::size_t leave = tab.rows();
    Scalar best{};
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      if (lp_sign(tab.at(i, enter)) <= 0) continue;
      Scalar ratio = tab.rhs(i) / tab.at(i, enter);
      if (leave == tab.rows() || ratio < best || (!(best < ratio) && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == tab.rows()) return LpStatus::unbounded;
    tab.pivot(leave, enter);
    basis[leave] = enter;
    ++pivots;
  }
}

}  // namespace detail

/// Two-phase dense simplex with Bland's anti-cycling rule.
///
/// With Scalar = Rational every step is exact; with double a 1e-11 zero
/// tolerance is used.
template <class Scalar>
LpResult<Scalar> solve_lp(const LinearProgram<Scalar>& lp) {
  const std::size_t m = lp.a.size();
  const std::size_t n = lp.c.size();
  if (lp.b.size() != m || lp.rel.size() != m) throw std::invalid_argument("inconsistent LP dimensions");
  for (const auto& row : lp.a) {
    if (row.size() != n) throw std::invalid_argument("inconsistent LP row length");
  }

  // Normalize to b >= 0.
  std::vector<std::vector<Scalar>> a = lp.a;
  std::vector<Scalar> b = lp.b;
  std::vector<Relation> rel = lp.rel;
  for (std::size_t i = 0; i < m; ++i) {
    if (detail::lp_sign(b[i]) < 0) {
      for (auto& v : a[i]) v = -v;
      b[i] = -b[i];
      if (rel[i] == Relation::less_equal) {
        rel[i] = Relation::greater_equal;
      } else if (rel[i] == Relation::greater_equal) {
        rel[i] = Relation::less_equal;
      }
    }
  }

  std::size_t slack_count = 0, art_count = 0;
  for (auto r : rel) {
    if (r != Relation::equal) ++slack_count;
    if (r != Relation::less_equal) ++art_count;
  }
  const std::size_t art_begin = n + slack_count;
  const std::size_t total = art_begin + art_count;

  detail::Tableau<Scalar> tab(m, total);
  std::vector<std::size_t> basis(m);
  std::size_t slack = n, art = art_begin;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = a[i][j];
    tab.rhs(i) = b[i];
    if (rel[i] == Relation::less_equal) {
      tab.at(i, slack) = 1;
      basis[i] = slack++;
    } else {
      if (rel[i] == Relation::greater_equal) tab.at(i, slack++) = -1;
      tab.at(i, art) = 1;
      basis[i] = art++;
    }
  }

  LpResult<Scalar> result;
  if (art_count > 0) {
    auto& obj = tab.objective();
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < art_begin) continue;
      for (std::size_t j = 0; j <= total; ++j) {
        if (j < art_begin || j == total) obj[j] -= tab.at(i, j);
      }
    }
    detail::run_simplex(tab, basis, art_begin, result.pivots);
    if (detail::lp_sign(obj[total]) != 0) {
      result.status = LpStatus::infeasible;
      return result;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < art_begin) continue;
      for (std::size_t j = 0; j < art_begin; ++j) {
        if (detail::lp_sign(tab.at(i, j)) != 0) {
          tab.pivot(i, j);
          basis[i] = j;
          ++result.pivots;
          break;
        }
      }
    }
  }

  auto& obj = tab.objective();
  for (std::size_t j = 0; j <= total; ++j) obj[j] = j < n ? lp.c[j] : Scalar(0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] >= n) continue;
    const Scalar cb = lp.c[basis[i]];
    if (detail::lp_sign(cb) == 0) continue;
    for (std::size_t j = 0; j <= total; ++j) obj[j] -= cb * tab.at(i, j);
  }
  result.status = detail::run_simplex(tab, basis, art_begin, result.pivots);
  if (result.status != LpStatus::optimal) return result;

  result.x.assign(n, Scalar(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) result.x[basis[i]] = tab.rhs(i);
  }
  result.value = Scalar(0);
  for (std::size_t j = 0; j < n; ++j) result.value += lp.c[j] * result.x[j];
  return result;
}

}  // namespace conbi
