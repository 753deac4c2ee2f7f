// Copyright 2026 The mcal-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcal/errors.hpp"
#include "mcal/rational.hpp"

namespace mcal {

enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct LinearConstraint {
  std::vector<Rational> coeffs;
  Relation relation = Relation::kLessEqual;
  Rational rhs;
};

struct VariableBounds {
  std::optional<Rational> lower = Rational(0);
  std::optional<Rational> upper;
};

// minimize objective . x subject to constraints and per-variable bounds.
// Variables default to x >= 0; set lower to nullopt for a free variable.
struct LPProblem {
  std::vector<Rational> objective;
  std::vector<LinearConstraint> constraints;
  std::vector<VariableBounds> bounds;

  std::size_t num_vars() const { return objective.size(); }

  void add(std::vector<Rational> coeffs, Relation rel, Rational rhs) {
    constraints.push_back({std::move(coeffs), rel, std::move(rhs)});
  }
};

enum class LPStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::kOptimal: return "optimal";
    case LPStatus::kInfeasible: return "infeasible";
    case LPStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

struct LPSolution {
  LPStatus status = LPStatus::kInfeasible;
  Rational optimum;
  std::vector<Rational> assignment;  // optimal point, or a feasible point when unbounded
  std::vector<Rational> ray;         // improving direction when unbounded
};

namespace detail {

// Dense simplex tableau. Rows 0..m-1 are constraints, the last column is the
// right-hand side. Pivoting follows Bland's rule, so it terminates.
class SimplexTableau {
 public:
  SimplexTableau(std::vector<std::vector<Rational>> rows, std::vector<std::size_t> basis,
                 std::size_t cols)
      : a_(std::move(rows)), basis_(std::move(basis)), cols_(cols) {}

  std::size_t rows() const { return a_.size(); }
  std::size_t cols() const { return cols_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  const Rational& rhs(std::size_t i) const { return a_[i][cols_]; }
  const Rational& at(std::size_t i, std::size_t j) const { return a_[i][j]; }

  // Reduced-cost row for `cost` w.r.t. the current basis. Entry cols_ holds -z.
  std::vector<Rational> reduced_costs(const std::vector<Rational>& cost) const {
    std::vector<Rational> z(cols_ + 1, Rational(0));
    for (std::size_t j = 0; j < cols_; ++j) z[j] = cost[j];
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const Rational& cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) z[j] -= cb * a_[i][j];
    }
    return z;
  }

  void pivot(std::size_t r, std::size_t c, std::vector<Rational>& z) {
    Rational inv = 1 / a_[r][c];
    for (std::size_t j = 0; j <= cols_; ++j)
      if (a_[r][j] != 0) a_[r][j] *= inv;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (i == r || a_[i][c] == 0) continue;
      Rational factor = a_[i][c];
      for (std::size_t j = 0; j <= cols_; ++j)
        if (a_[r][j] != 0) a_[i][j] -= factor * a_[r][j];
    }
    if (z[c] != 0) {
      Rational factor = z[c];
      for (std::size_t j = 0; j <= cols_; ++j)
        if (a_[r][j] != 0) z[j] -= factor * a_[r][j];
    }
    basis_[r] = c;
  }

  // Runs simplex on reduced-cost row z over columns allowed[j]. Returns the
  // entering column of an unbounded ray, or nullopt at optimality.
  std::optional<std::size_t> optimize(std::vector<Rational>& z, const std::vector<bool>& allowed) {
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (allowed[j] && z[j] < 0) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return std::nullopt;
      std::size_t leave = a_.size();
      Rational best;
      for (std::size_t i = 0; i < a_.size(); ++i) {
        if (a_[i][enter] <= 0) continue;
        Rational ratio = a_[i][cols_] / a_[i][enter];
        if (leave == a_.size() || ratio < best ||
            (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == a_.size()) return enter;
      pivot(leave, enter, z);
    }
  }

  void drop_row(std::size_t i) {
    a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(i));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
  }

 private:
  std::vector<std::vector<Rational>> a_;
  std::vector<std::size_t> basis_;
  std::size_t cols_;
};

// How an original variable maps onto non-negative standard-form columns:
// x = offset + sign * col  (one column), or x = col_pos - col_neg (free).
struct VariableMap {
  Rational offset;
  int sign = 1;
  std::size_t col = 0;
  std::optional<std::size_t> neg_col;
};

}  // namespace detail

// Exact two-phase primal simplex with Bland's rule. Never throws on
// infeasible or unbounded programs; the status carries the outcome.
inline LPSolution lp_solve(const LPProblem& p) {
  const std::size_t nv = p.num_vars();
  if (!p.bounds.empty() && p.bounds.size() != nv)
    throw InvalidArgument("lp_solve: bounds size differs from objective size");
  for (const auto& c : p.constraints)
    if (c.coeffs.size() != nv) throw InvalidArgument("lp_solve: constraint width mismatch");

  // Variable substitution onto x' >= 0.
  std::vector<detail::VariableMap> vmap(nv);
  std::size_t ncols = 0;
  struct Row {
    std::vector<std::pair<std::size_t, Rational>> terms;
    Relation rel;
    Rational rhs;
  };
  std::vector<Row> rows;
  std::vector<std::pair<std::size_t, Rational>> upper_rows;  // col <= bound
  for (std::size_t j = 0; j < nv; ++j) {
    VariableBounds b = p.bounds.empty() ? VariableBounds{} : p.bounds[j];
    if (b.lower && b.upper && *b.upper < *b.lower) {
      LPSolution s;
      s.status = LPStatus::kInfeasible;
      return s;
    }
    auto& m = vmap[j];
    if (b.lower) {
      m.offset = *b.lower;
      m.col = ncols++;
      if (b.upper) upper_rows.emplace_back(m.col, *b.upper - *b.lower);
    } else if (b.upper) {
      m.offset = *b.upper;
      m.sign = -1;
      m.col = ncols++;
    } else {
      m.col = ncols++;
      m.neg_col = ncols++;
    }
  }
  auto add_row = [&](const std::vector<Rational>& coeffs, Relation rel, Rational rhs) {
    Row row{{}, rel, std::move(rhs)};
    for (std::size_t j = 0; j < nv; ++j) {
      if (coeffs[j] == 0) continue;
      const auto& m = vmap[j];
      row.rhs -= coeffs[j] * m.offset;
      row.terms.emplace_back(m.col, m.sign * coeffs[j]);
      if (m.neg_col) row.terms.emplace_back(*m.neg_col, -coeffs[j]);
    }
    rows.push_back(std::move(row));
  };
  for (const auto& c : p.constraints) add_row(c.coeffs, c.relation, c.rhs);
  for (auto& [col, ub] : upper_rows) {
    rows.push_back(Row{{{col, Rational(1)}}, Relation::kLessEqual, ub});
  }

  // Normalize to rhs >= 0, then add slack / surplus / artificial columns.
  const std::size_t m = rows.size();
  std::size_t slack_count = 0;
  for (auto& r : rows) {
    if (r.rhs < 0) {
      r.rhs = -r.rhs;
      for (auto& t : r.terms) t.second = -t.second;
      if (r.rel == Relation::kLessEqual) r.rel = Relation::kGreaterEqual;
      else if (r.rel == Relation::kGreaterEqual) r.rel = Relation::kLessEqual;
    }
    if (r.rel != Relation::kEqual) ++slack_count;
  }
  std::size_t art_count = 0;
  for (auto& r : rows)
    if (r.rel != Relation::kLessEqual) ++art_count;
  const std::size_t first_slack = ncols;
  const std::size_t first_art = ncols + slack_count;
  const std::size_t total = first_art + art_count;

  std::vector<std::vector<Rational>> tab(m, std::vector<Rational>(total + 1, Rational(0)));
  std::vector<std::size_t> basis(m);
  std::size_t next_slack = first_slack, next_art = first_art;
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& [col, v] : rows[i].terms) tab[i][col] += v;
    tab[i][total] = rows[i].rhs;
    if (rows[i].rel == Relation::kLessEqual) {
      tab[i][next_slack] = 1;
      basis[i] = next_slack++;
    } else {
      if (rows[i].rel == Relation::kGreaterEqual) tab[i][next_slack++] = -1;
      tab[i][next_art] = 1;
      basis[i] = next_art++;
    }
  }

  detail::SimplexTableau t(std::move(tab), std::move(basis), total);
  LPSolution sol;

  // Phase 1: minimize the sum of artificials.
  std::vector<bool> allowed(total, true);
  if (art_count > 0) {
    std::vector<Rational> phase1(total, Rational(0));
    for (std::size_t j = first_art; j < total; ++j) phase1[j] = 1;
    auto z = t.reduced_costs(phase1);
    t.optimize(z, allowed);
    if (-z[total] != 0) {
      sol.status = LPStatus::kInfeasible;
      return sol;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (std::size_t i = 0; i < t.rows();) {
      if (t.basis()[i] < first_art) {
        ++i;
        continue;
      }
      std::size_t col = first_art;
      for (std::size_t j = 0; j < first_art; ++j)
        if (t.at(i, j) != 0) {
          col = j;
          break;
        }
      if (col == first_art) {
        t.drop_row(i);  // redundant equality
        continue;
      }
      t.pivot(i, col, z);
      ++i;
    }
    for (std::size_t j = first_art; j < total; ++j) allowed[j] = false;
  }

  // Phase 2.
  std::vector<Rational> cost(total, Rational(0));
  Rational constant = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& mp = vmap[j];
    constant += p.objective[j] * mp.offset;
    cost[mp.col] += mp.sign * p.objective[j];
    if (mp.neg_col) cost[*mp.neg_col] -= p.objective[j];
  }
  auto z = t.reduced_costs(cost);
  auto ray_col = t.optimize(z, allowed);

  std::vector<Rational> xs(total, Rational(0));
  for (std::size_t i = 0; i < t.rows(); ++i) xs[t.basis()[i]] = t.rhs(i);
  auto to_original = [&](const std::vector<Rational>& cols, bool linear_only) {
    std::vector<Rational> x(nv);
    for (std::size_t j = 0; j < nv; ++j) {
      const auto& mp = vmap[j];
      x[j] = (linear_only ? Rational(0) : mp.offset) + mp.sign * cols[mp.col];
      if (mp.neg_col) x[j] -= cols[*mp.neg_col];
    }
    return x;
  };
  sol.assignment = to_original(xs, false);
  if (ray_col) {
    std::vector<Rational> dir(total, Rational(0));
    dir[*ray_col] = 1;
    for (std::size_t i = 0; i < t.rows(); ++i) dir[t.basis()[i]] = -t.at(i, *ray_col);
    sol.ray = to_original(dir, true);
    sol.status = LPStatus::kUnbounded;
    return sol;
  }
  sol.status = LPStatus::kOptimal;
  sol.optimum = 0;
  for (std::size_t j = 0; j < nv; ++j) sol.optimum += p.objective[j] * sol.assignment[j];
  return sol;
}

// Checks a point against every constraint and bound, exactly.
inline bool lp_feasible(const LPProblem& p, const std::vector<Rational>& x) {
  if (x.size() != p.num_vars()) return false;
  for (const auto& c : p.constraints) {
    Rational lhs = 0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += c.coeffs[j] * x[j];
    if (c.relation == Relation::kLessEqual && lhs > c.rhs) return false;
    if (c.relation == Relation::kEqual && lhs != c.rhs) return false;
    if (c.relation == Relation::kGreaterEqual && lhs < c.rhs) return false;
  }
  for (std::size_t j = 0; j < p.bounds.size(); ++j) {
    const auto& b = p.bounds[j];
    if (b.lower && x[j] < *b.lower) return false;
    if (b.upper && x[j] > *b.upper) return false;
  }
  if (p.bounds.empty())
    for (const auto& v : x)
      if (v < 0) return false;
  return true;
}

}  // namespace mcal
