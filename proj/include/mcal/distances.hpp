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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcal/budget.hpp"
#include "mcal/core.hpp"
#include "mcal/enumerate.hpp"
#include "mcal/multiaccuracy.hpp"
#include "mcal/random.hpp"

namespace mcal {

// dCE of f restricted to S: min over cal(D|S) of the conditional l1
// distance. The witness is f with S overwritten by the nearest calibrated
// predictor (lexicographically smallest on ties).
inline DistanceResult dce(const Instance& inst, const Subgroup& s,
                          const Budget& budget = Budget::defaults()) {
  auto cal = calibrated_set(inst, s, budget);
  const Rational mass = group_mass(inst.marginal, s);
  std::optional<std::size_t> best;
  Rational best_value;
  for (std::size_t i = 0; i < cal.predictors.size(); ++i) {
    Rational d = 0;
    for (Index j = 0; j < s.size(); ++j) {
      Index x = s.members()[j];
      d += inst.marginal[x] * abs(inst.audited[x] - cal.predictors[i][j]);
    }
    if (!best || d < best_value) {
      best = i;
      best_value = d;
    }
  }
  // cal(D|S) always contains p*|S, so best is set.
  return DistanceResult{best_value / mass, cal.embed(*best, inst.audited)};
}

// max over groups of Pr[S] * dCE_{D|S}(f|S); ties go to the lowest index.
inline WorstGroup wdmc(const Instance& inst, const Budget& budget = Budget::defaults()) {
  WorstGroup worst{Rational(-1), 0};
  for (std::size_t i = 0; i < inst.groups.size(); ++i) {
    const auto& s = inst.groups[i];
    Rational v = group_mass(inst.marginal, s) * dce(inst, s, budget).value;
    if (v > worst.value) worst = {v, i};
  }
  return worst;
}

// Distance to mcal_C(D). Coordinates outside every group are free and
// contribute zero; the witness copies f there.
inline DistanceResult dmc(const Instance& inst, const Budget& budget = Budget::defaults()) {
  auto mcal_set = multicalibrated_set(inst, budget);
  std::optional<std::size_t> best;
  Rational best_value;
  for (std::size_t i = 0; i < mcal_set.predictors.size(); ++i) {
    Rational d = 0;
    for (Index x = 0; x < inst.n(); ++x)
      if (mcal_set.constrained[x])
        d += inst.marginal[x] * abs(inst.audited[x] - mcal_set.predictors[i][x]);
    if (!best || d < best_value) {
      best = i;
      best_value = d;
    }
  }
  return DistanceResult{best_value, mcal_set.complete(*best, inst.audited)};
}

// All non-empty intersections of non-empty subfamilies of C, computed as the
// fixed point of pairwise intersection. Sorted, deduplicated.
inline SubgroupCollection intersection_closure(const SubgroupCollection& c,
                                               const Budget& budget = Budget::defaults()) {
  if (c.size() > budget.max_closure_groups) {
    throw BudgetExceeded("intersection_closure: |C|=" + std::to_string(c.size()) +
                             " exceeds " + std::to_string(budget.max_closure_groups),
                         1ULL << std::min<std::size_t>(c.size(), 63));
  }
  std::set<Subgroup> closure;
  for (const auto& g : c)
    if (!g.empty()) closure.insert(g);
  std::vector<Subgroup> frontier(closure.begin(), closure.end());
  while (!frontier.empty()) {
    std::vector<Subgroup> fresh;
    for (const auto& a : frontier)
      for (const auto& g : c) {
        Subgroup both = intersect(a, g);
        if (!both.empty() && closure.insert(both).second) fresh.push_back(both);
      }
    frontier = std::move(fresh);
  }
  return SubgroupCollection{std::vector<Subgroup>(closure.begin(), closure.end())};
}

struct GeneratedPartition {
  std::vector<Subgroup> cells;                   // ordered by smallest element
  std::vector<std::vector<std::size_t>> origin;  // group indices containing each cell

  SubgroupCollection as_collection() const { return SubgroupCollection{cells}; }
};

// J(C): points with identical membership signatures share a cell.
inline GeneratedPartition generated_partition(const SubgroupCollection& c, std::size_t n) {
  if (!covers(c, n)) throw PreconditionViolation("generated_partition: groups do not cover the domain");
  std::vector<std::vector<std::size_t>> signature(n);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (Index x : c[i]) signature[x].push_back(i);
  std::map<std::vector<std::size_t>, std::vector<Index>> cells;
  for (Index x = 0; x < n; ++x) cells[signature[x]].push_back(x);
  std::vector<std::pair<Subgroup, std::vector<std::size_t>>> ordered;
  for (auto& [sig, members] : cells) ordered.emplace_back(Subgroup(members), sig);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first.members().front() < b.first.members().front(); });
  GeneratedPartition out;
  for (auto& [cell, sig] : ordered) {
    out.cells.push_back(std::move(cell));
    out.origin.push_back(std::move(sig));
  }
  return out;
}

// dIMC = sum over cells of J(C) of Pr[cell] * dCE on the cell. This equals
// the continuized dMC exactly; the witness is stitched from per-cell
// witnesses.
inline DistanceResult dimc(const Instance& inst, const Budget& budget = Budget::defaults()) {
  auto partition = generated_partition(inst.groups, inst.n());
  DistanceResult out{Rational(0), inst.audited};
  for (const auto& cell : partition.cells) {
    auto local = dce(inst, cell, budget);
    out.value += group_mass(inst.marginal, cell) * local.value;
    for (Index x : cell) out.witness[x] = local.witness[x];
  }
  return out;
}

// Distance to predictors that are globally calibrated and multiaccurate.
inline DistanceResult dcma(const Instance& inst, const Budget& budget = Budget::defaults()) {
  auto cal = calibrated_set(inst, Subgroup::all(inst.n()), budget);
  std::optional<DistanceResult> best;
  for (std::size_t i = 0; i < cal.predictors.size(); ++i) {
    PredictorVec g(cal.predictors[i]);
    if (!is_multiaccurate(g, inst)) continue;
    Rational d = l1_distance(inst.audited, g, inst.marginal);
    if (!best || d < best->value) best = DistanceResult{d, std::move(g)};
  }
  if (!best) throw Error("dcma: no calibrated multiaccurate predictor found");
  return *best;
}

struct LowDegreeBruteForce {
  Rational value;
  PredictorVec witness;
  Rational residual_threshold;
  unsigned long long candidates = 0;
  unsigned long long accepted = 0;
};

// Grid oracle for the distance to degree-r multicalibration: scans every g
// with coordinates in {0, 1/G, ..., 1} and accepts g when every residual
// E[g^j (g - p*) | S], j < r, has magnitude at most 1/(2G). Verification aid
// for tiny domains only (n <= 4).
inline LowDegreeBruteForce dmc_lowdeg_bruteforce(const Instance& inst, unsigned r,
                                                 unsigned long grid) {
  const std::size_t n = inst.n();
  if (n > 4) throw BudgetExceeded("dmc_lowdeg_bruteforce: n > 4", n);
  if (r < 1 || grid < 1) throw InvalidArgument("dmc_lowdeg_bruteforce: r and grid must be >= 1");
  const std::size_t k = inst.groups.size();
  LowDegreeBruteForce out;
  out.residual_threshold = Rational(1, 2 * grid);

  // term[x][a][j] = m(x) (a/G)^j (a/G - p*(x)); residual sums divide by m(S).
  std::vector<std::vector<std::vector<Rational>>> term(
      n, std::vector<std::vector<Rational>>(grid + 1, std::vector<Rational>(r)));
  for (Index x = 0; x < n; ++x)
    for (unsigned long a = 0; a <= grid; ++a) {
      Rational v(static_cast<long>(a), static_cast<long>(grid));
      v.canonicalize();
      Rational w = 1;
      for (unsigned j = 0; j < r; ++j) {
        term[x][a][j] = inst.marginal[x] * w * (v - inst.ground_truth[x]);
        w *= v;
      }
    }
  std::vector<Rational> bound(k);  // threshold scaled by m(S)
  std::vector<std::vector<bool>> in_group(k, std::vector<bool>(n, false));
  for (std::size_t g = 0; g < k; ++g) {
    bound[g] = out.residual_threshold * group_mass(inst.marginal, inst.groups[g]);
    for (Index x : inst.groups[g]) in_group[g][x] = true;
  }
  std::vector<std::vector<Rational>> gaps(n);  // m(x) |a/G - f(x)|
  for (Index x = 0; x < n; ++x)
    for (unsigned long a = 0; a <= grid; ++a) {
      Rational v(static_cast<long>(a), static_cast<long>(grid));
      v.canonicalize();
      gaps[x].push_back(inst.marginal[x] * abs(v - inst.audited[x]));
    }

  std::vector<unsigned long> choice(n, 0);
  std::vector<std::vector<Rational>> acc(n + 1, std::vector<Rational>(k * r, Rational(0)));
  std::vector<Rational> dist(n + 1, Rational(0));
  std::optional<Rational> best;
  std::vector<unsigned long> best_choice;

  std::function<void(std::size_t)> recurse = [&](std::size_t depth) {
    if (depth == n) {
      ++out.candidates;
      for (std::size_t g = 0; g < k; ++g)
        for (unsigned j = 0; j < r; ++j)
          if (abs(acc[n][g * r + j]) > bound[g]) return;
      ++out.accepted;
      if (!best || dist[n] < *best || (dist[n] == *best && choice < best_choice)) {
        best = dist[n];
        best_choice = choice;
      }
      return;
    }
    for (unsigned long a = 0; a <= grid; ++a) {
      dist[depth + 1] = dist[depth] + gaps[depth][a];
      if (best && dist[depth + 1] > *best) continue;
      choice[depth] = a;
      for (std::size_t g = 0; g < k; ++g)
        for (unsigned j = 0; j < r; ++j)
          acc[depth + 1][g * r + j] =
              in_group[g][depth] ? acc[depth][g * r + j] + term[depth][a][j] : acc[depth][g * r + j];
      recurse(depth + 1);
    }
  };
  recurse(0);
  if (!best) throw Error("dmc_lowdeg_bruteforce: no grid point passed the residual threshold");
  out.value = *best;
  std::vector<Rational> w(n);
  for (Index x = 0; x < n; ++x) {
    w[x] = Rational(static_cast<long>(best_choice[x]), static_cast<long>(grid));
    w[x].canonicalize();
  }
  out.witness = PredictorVec(std::move(w));
  return out;
}

enum class ProbeMetric { kWdmc, kDmc, kDimc, kWdma, kDma };

inline const char* to_string(ProbeMetric m) {
  switch (m) {
    case ProbeMetric::kWdmc: return "wdmc";
    case ProbeMetric::kDmc: return "dmc";
    case ProbeMetric::kDimc: return "dimc";
    case ProbeMetric::kWdma: return "wdma";
    case ProbeMetric::kDma: return "dma";
  }
  return "unknown";
}

inline std::optional<ProbeMetric> parse_probe_metric(const std::string& s) {
  if (s == "wdmc") return ProbeMetric::kWdmc;
  if (s == "dmc") return ProbeMetric::kDmc;
  if (s == "dimc") return ProbeMetric::kDimc;
  if (s == "wdma") return ProbeMetric::kWdma;
  if (s == "dma") return ProbeMetric::kDma;
  return std::nullopt;
}

inline Rational evaluate_metric(ProbeMetric metric, const Instance& inst,
                                const Budget& budget = Budget::defaults()) {
  switch (metric) {
    case ProbeMetric::kWdmc: return wdmc(inst, budget).value;
    case ProbeMetric::kDmc: return dmc(inst, budget).value;
    case ProbeMetric::kDimc: return dimc(inst, budget).value;
    case ProbeMetric::kWdma: return wdma(inst).value;
    case ProbeMetric::kDma: return dma(inst).value;
  }
  return 0;
}

struct ProbeReport {
  ProbeMetric metric = ProbeMetric::kWdmc;
  Rational baseline;
  Rational best_value;            // smallest metric value observed
  Rational best_decrease;         // baseline - best_value, clamped at 0
  bool decrease_found = false;
  std::vector<Rational> best_perturbation;  // applied (clipped) v of the best trial
  int trials = 0;
};

// Samples perturbations v with weighted l1 norm sum_x m(x)|v(x)| <= radius:
// a symmetric-Dirichlet direction with random signs, a uniform radius
// fraction, then clipping f + v to [0,1]. All perturbations are rational so
// every metric evaluation stays exact.
inline ProbeReport local_min_probe(ProbeMetric metric, const Instance& inst, const Rational& radius,
                                   int trials, std::uint64_t seed,
                                   const Budget& budget = Budget::defaults()) {
  if (trials < 1) throw InvalidArgument("local_min_probe: trials must be >= 1");
  const std::size_t n = inst.n();
  ProbeReport report;
  report.metric = metric;
  report.trials = trials;
  report.baseline = evaluate_metric(metric, inst, budget);
  report.best_value = report.baseline;
  report.best_decrease = 0;
  report.best_perturbation.assign(n, Rational(0));
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<Rational> weight(n);
    Rational total = 0;
    for (Index x = 0; x < n; ++x) {
      double e = -std::log(rng.uniform01() * (1.0 - 0x1.0p-53) + 0x1.0p-53);
      weight[x] = Rational(e);
      total += weight[x];
    }
    Rational scale = radius * rng.uniform_rational();
    PredictorVec moved = inst.audited;
    std::vector<Rational> applied(n);
    for (Index x = 0; x < n; ++x) {
      Rational v = scale * weight[x] / (total * inst.marginal[x]);
      if (rng.next() & 1ULL) v = -v;
      Rational target = inst.audited[x] + v;
      if (target < 0) target = 0;
      if (target > 1) target = 1;
      applied[x] = target - inst.audited[x];
      moved[x] = target;
    }
    Rational value = evaluate_metric(metric, inst.with_audited(std::move(moved)), budget);
    if (value < report.best_value) {
      report.best_value = value;
      report.best_decrease = report.baseline - value;
      report.decrease_found = true;
      report.best_perturbation = std::move(applied);
    }
  }
  return report;
}

}  // namespace mcal
