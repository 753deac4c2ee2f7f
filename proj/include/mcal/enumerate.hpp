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

#include <algorithm>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "mcal/budget.hpp"
#include "mcal/core.hpp"
#include "mcal/partitions.hpp"

namespace mcal {

namespace detail {

// Calibration of the values assigned to S (values[i] belongs to S.members()[i]).
inline bool calibrated_on(const std::vector<Rational>& values, const Instance& inst,
                          const Subgroup& s) {
  // level value -> (sum m*p*, sum m)
  std::map<Rational, std::pair<Rational, Rational>> level;
  for (Index i = 0; i < s.size(); ++i) {
    Index x = s.members()[i];
    auto& acc = level[values[i]];
    acc.first += inst.marginal[x] * inst.ground_truth[x];
    acc.second += inst.marginal[x];
  }
  for (const auto& [v, acc] : level)
    if (acc.first != v * acc.second) return false;
  return true;
}

inline std::vector<Rational> restrict_to(const PredictorVec& f, const Subgroup& s) {
  std::vector<Rational> out;
  out.reserve(s.size());
  for (Index x : s) out.push_back(f[x]);
  return out;
}

}  // namespace detail

// f restricted to S is perfectly calibrated w.r.t. D|S.
inline bool is_calibrated(const PredictorVec& f, const Instance& inst, const Subgroup& s) {
  return detail::calibrated_on(detail::restrict_to(f, s), inst, s);
}

// cal(D|S): predictors on S, each stored as values aligned with S.members().
struct CalibratedSet {
  Subgroup subgroup;
  std::vector<std::vector<Rational>> predictors;  // sorted, unique

  // Embeds member i into a full-domain vector, other coordinates from `base`.
  PredictorVec embed(std::size_t i, const PredictorVec& base) const {
    PredictorVec out = base;
    for (Index j = 0; j < subgroup.size(); ++j) out[subgroup.members()[j]] = predictors[i][j];
    return out;
  }
};

// Every calibrated predictor on S is constant on the classes of its level-set
// partition with value equal to the class mean of p*, so enumerating
// partitions and keeping calibrated candidates yields exactly cal(D|S).
inline CalibratedSet calibrated_set(const Instance& inst, const Subgroup& s,
                                    const Budget& budget = Budget::defaults()) {
  if (s.empty()) throw InvalidArgument("calibrated_set on empty subgroup");
  const std::size_t k = s.size();
  PartitionStream stream(k, budget);
  std::vector<Rational> weight(k), weighted_truth(k);
  for (Index i = 0; i < k; ++i) {
    Index x = s.members()[i];
    weight[i] = inst.marginal[x];
    weighted_truth[i] = inst.marginal[x] * inst.ground_truth[x];
  }
  std::set<std::vector<Rational>> found;
  std::vector<Rational> num, den, candidate(k);
  do {
    const auto& rgs = stream.rgs();
    const std::size_t classes = stream.class_count();
    num.assign(classes, Rational(0));
    den.assign(classes, Rational(0));
    for (Index i = 0; i < k; ++i) {
      num[rgs[i]] += weighted_truth[i];
      den[rgs[i]] += weight[i];
    }
    for (std::size_t c = 0; c < classes; ++c) num[c] /= den[c];
    for (Index i = 0; i < k; ++i) candidate[i] = num[rgs[i]];
    if (detail::calibrated_on(candidate, inst, s)) found.insert(candidate);
  } while (stream.advance());
  return CalibratedSet{s, std::vector<std::vector<Rational>>(found.begin(), found.end())};
}

// mcal_C(D). Coordinates outside every group are unconstrained: `constrained`
// marks the covered ones and uncovered entries of each predictor hold 0 as a
// placeholder. Use complete() to fill them from another predictor.
struct MulticalibratedSet {
  std::vector<bool> constrained;
  std::vector<PredictorVec> predictors;  // sorted, unique

  bool covers() const {
    return std::all_of(constrained.begin(), constrained.end(), [](bool b) { return b; });
  }

  PredictorVec complete(std::size_t i, const PredictorVec& fill) const {
    PredictorVec out = predictors[i];
    for (Index x = 0; x < out.size(); ++x)
      if (!constrained[x]) out[x] = fill[x];
    return out;
  }
};

// Joins cal(D|S_i) over the groups: a global g is multicalibrated iff every
// restriction g|S_i lies in cal(D|S_i), so compatible tuples are exactly
// mcal_C(D). Groups are joined in order of decreasing overlap with the
// coordinates fixed so far; candidates are indexed by their overlap values.
inline MulticalibratedSet multicalibrated_set(const Instance& inst,
                                              const Budget& budget = Budget::defaults()) {
  const std::size_t n = inst.n();
  std::vector<CalibratedSet> cal;
  cal.reserve(inst.groups.size());
  for (const auto& g : inst.groups) cal.push_back(calibrated_set(inst, g, budget));

  std::vector<bool> assigned(n, false);
  std::vector<bool> used(cal.size(), false);
  std::vector<std::vector<Rational>> partial{std::vector<Rational>(n, Rational(0))};
  unsigned long long work = 0;

  for (std::size_t step = 0; step < cal.size(); ++step) {
    std::size_t pick = cal.size();
    std::size_t best_overlap = 0;
    for (std::size_t i = 0; i < cal.size(); ++i) {
      if (used[i]) continue;
      std::size_t overlap = 0;
      for (Index x : cal[i].subgroup)
        if (assigned[x]) ++overlap;
      if (pick == cal.size() || overlap > best_overlap) {
        pick = i;
        best_overlap = overlap;
      }
    }
    used[pick] = true;
    const CalibratedSet& group = cal[pick];
    std::vector<std::size_t> overlap_pos, fresh_pos;
    for (Index j = 0; j < group.subgroup.size(); ++j)
      (assigned[group.subgroup.members()[j]] ? overlap_pos : fresh_pos).push_back(j);

    std::map<std::vector<Rational>, std::vector<std::size_t>> by_overlap;
    for (std::size_t c = 0; c < group.predictors.size(); ++c) {
      std::vector<Rational> key;
      for (auto j : overlap_pos) key.push_back(group.predictors[c][j]);
      by_overlap[std::move(key)].push_back(c);
    }

    std::vector<std::vector<Rational>> next;
    for (const auto& p : partial) {
      std::vector<Rational> key;
      for (auto j : overlap_pos) key.push_back(p[group.subgroup.members()[j]]);
      auto it = by_overlap.find(key);
      ++work;
      if (it == by_overlap.end()) continue;
      for (auto c : it->second) {
        auto merged = p;
        for (auto j : fresh_pos) merged[group.subgroup.members()[j]] = group.predictors[c][j];
        next.push_back(std::move(merged));
        ++work;
      }
      if (work > budget.max_join_work) {
        throw BudgetExceeded("multicalibrated_set: join work exceeds " +
                                 std::to_string(budget.max_join_work),
                             work);
      }
    }
    partial = std::move(next);
    for (Index x : group.subgroup) assigned[x] = true;
  }

  std::set<std::vector<Rational>> unique(partial.begin(), partial.end());
  MulticalibratedSet out;
  out.constrained = assigned;
  for (const auto& v : unique) out.predictors.emplace_back(v);
  return out;
}

inline bool is_multicalibrated(const PredictorVec& f, const Instance& inst) {
  return std::all_of(inst.groups.begin(), inst.groups.end(),
                     [&](const Subgroup& s) { return is_calibrated(f, inst, s); });
}

// sum_{x in S} m(x) (p*(x) - f(x)) == 0 for every group.
inline bool is_multiaccurate(const PredictorVec& f, const Instance& inst) {
  for (const auto& s : inst.groups) {
    Rational total = 0;
    for (Index x : s) total += inst.marginal[x] * (inst.ground_truth[x] - f[x]);
    if (total != 0) return false;
  }
  return true;
}

// E[f(x)^j (f(x) - p*(x)) | x in S]; the monomial-weight residual.
inline Rational degree_residual(const PredictorVec& f, const Instance& inst,
                                const Subgroup& s, unsigned j) {
  Rational total = 0;
  for (Index x : s) {
    Rational w = 1;
    for (unsigned e = 0; e < j; ++e) w *= f[x];
    total += inst.marginal[x] * w * (f[x] - inst.ground_truth[x]);
  }
  return total / group_mass(inst.marginal, s);
}

// Monomial weights t^j, j < r, span all polynomials of degree < r.
inline bool is_degree_r_multicalibrated(const PredictorVec& f, const Instance& inst,
                                        unsigned r) {
  if (r < 1) throw InvalidArgument("degree r must be >= 1");
  for (const auto& s : inst.groups)
    for (unsigned j = 0; j < r; ++j)
      if (degree_residual(f, inst, s, j) != 0) return false;
  return true;
}

}  // namespace mcal
