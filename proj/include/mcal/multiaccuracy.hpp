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

#include <vector>

#include "mcal/core.hpp"
#include "mcal/enumerate.hpp"
#include "mcal/lp.hpp"

namespace mcal {

// |E[p*(x) - f(x) | x in S]|
inline Rational bias(const PredictorVec& f, const Instance& inst, const Subgroup& s) {
  Rational total = 0;
  for (Index x : s) total += inst.marginal[x] * (inst.ground_truth[x] - f[x]);
  return abs(total / group_mass(inst.marginal, s));
}

// max_S Pr[S] * bias_S(f); ties go to the lowest group index.
inline WorstGroup wdma(const Instance& inst) {
  WorstGroup worst{Rational(-1), 0};
  for (std::size_t i = 0; i < inst.groups.size(); ++i) {
    const auto& s = inst.groups[i];
    Rational v = group_mass(inst.marginal, s) * bias(inst.audited, inst, s);
    if (v > worst.value) worst = {v, i};
  }
  return worst;
}

// Variables [g_0..g_{n-1}, t_0..t_{n-1}]:
//   min  sum_i m_i t_i
//   s.t. sum_{i in S_j} m_i g_i = sum_{i in S_j} m_i p*_i   for every group
//        t_i >= g_i - f_i,  t_i >= f_i - g_i,  0 <= g_i <= 1
inline LPProblem build_dma_lp(const Instance& inst) {
  const std::size_t n = inst.n();
  LPProblem lp;
  lp.objective.assign(2 * n, Rational(0));
  for (Index i = 0; i < n; ++i) lp.objective[n + i] = inst.marginal[i];
  lp.bounds.assign(2 * n, VariableBounds{Rational(0), std::nullopt});
  for (Index i = 0; i < n; ++i) lp.bounds[i].upper = Rational(1);
  for (const auto& s : inst.groups) {
    std::vector<Rational> row(2 * n, Rational(0));
    Rational rhs = 0;
    for (Index x : s) {
      row[x] = inst.marginal[x];
      rhs += inst.marginal[x] * inst.ground_truth[x];
    }
    lp.add(std::move(row), Relation::kEqual, rhs);
  }
  for (Index i = 0; i < n; ++i) {
    std::vector<Rational> upper(2 * n, Rational(0)), lower(2 * n, Rational(0));
    upper[n + i] = 1;
    upper[i] = -1;
    lp.add(std::move(upper), Relation::kGreaterEqual, -inst.audited[i]);
    lower[n + i] = 1;
    lower[i] = 1;
    lp.add(std::move(lower), Relation::kGreaterEqual, inst.audited[i]);
  }
  return lp;
}

// Distance to multiaccuracy via the exact LP. The program is always feasible
// (g = p*, t = |f - p*|) and bounded below by zero.
inline DistanceResult dma(const Instance& inst) {
  auto sol = lp_solve(build_dma_lp(inst));
  if (sol.status != LPStatus::kOptimal)
    throw Error(std::string("dma: unexpected LP status ") + to_string(sol.status));
  PredictorVec g(std::vector<Rational>(sol.assignment.begin(),
                                       sol.assignment.begin() + static_cast<std::ptrdiff_t>(inst.n())));
  return DistanceResult{sol.optimum, std::move(g)};
}

// Nearest unbiased predictor on S by shrinking f toward p* on the overshoot
// side: with alpha the overshoot mass and beta the undershoot mass, points on
// the overshoot side move to t*f + (1-t)*p* for t = beta/alpha. The value is
// the conditional distance on S, which equals bias(f, S). Coordinates outside
// S keep f.
inline DistanceResult acc_projection(const PredictorVec& f, const Instance& inst,
                                     const Subgroup& s) {
  Rational over = 0, under = 0;
  for (Index x : s) {
    Rational d = inst.marginal[x] * (f[x] - inst.ground_truth[x]);
    if (d > 0) over += d;
    else under -= d;
  }
  PredictorVec g = f;
  if (over != under) {
    const bool shrink_over = over > under;
    Rational t = shrink_over ? under / over : over / under;
    for (Index x : s) {
      bool on_side = shrink_over ? f[x] > inst.ground_truth[x] : f[x] < inst.ground_truth[x];
      if (on_side) g[x] = t * f[x] + (1 - t) * inst.ground_truth[x];
    }
  }
  return DistanceResult{bias(f, inst, s), std::move(g)};
}

}  // namespace mcal
