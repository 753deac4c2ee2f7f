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
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcal/errors.hpp"
#include "mcal/rational.hpp"

namespace mcal {

using Index = std::size_t;

struct FiniteDomain {
  std::size_t n = 1;
  std::vector<std::string> labels;  // optional; empty means x0..x{n-1}

  std::string label(Index i) const {
    if (i < labels.size()) return labels[i];
    return "x" + std::to_string(i);
  }
};

// Probability of each domain point. Validation (positivity, unit mass) is
// done by validate(); the type itself only stores values.
struct Marginal {
  std::vector<Rational> probs;

  static Marginal uniform(std::size_t n) {
    return Marginal{std::vector<Rational>(n, make_rational(1, static_cast<long>(n)))};
  }
  std::size_t size() const { return probs.size(); }
  const Rational& operator[](Index i) const { return probs[i]; }
};

// A predictor X -> [0,1] as a dense vector. Also used for ground truth and
// members of calibrated sets.
struct PredictorVec {
  std::vector<Rational> values;

  PredictorVec() = default;
  explicit PredictorVec(std::vector<Rational> v) : values(std::move(v)) {}
  static PredictorVec constant(std::size_t n, const Rational& c) {
    return PredictorVec(std::vector<Rational>(n, c));
  }

  std::size_t size() const { return values.size(); }
  const Rational& operator[](Index i) const { return values[i]; }
  Rational& operator[](Index i) { return values[i]; }

  friend bool operator==(const PredictorVec& a, const PredictorVec& b) {
    return a.values == b.values;
  }
  friend bool operator<(const PredictorVec& a, const PredictorVec& b) {
    return a.values < b.values;
  }
};

// Sorted, duplicate-free list of domain indices.
class Subgroup {
 public:
  Subgroup() = default;
  explicit Subgroup(std::vector<Index> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }
  Subgroup(std::initializer_list<Index> members)
      : Subgroup(std::vector<Index>(members)) {}

  static Subgroup all(std::size_t n) {
    std::vector<Index> v(n);
    for (Index i = 0; i < n; ++i) v[i] = i;
    return Subgroup(std::move(v));
  }

  const std::vector<Index>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(Index x) const {
    return std::binary_search(members_.begin(), members_.end(), x);
  }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const Subgroup&, const Subgroup&) = default;
  friend bool operator<(const Subgroup& a, const Subgroup& b) {
    return a.members_ < b.members_;
  }

 private:
  std::vector<Index> members_;
};

inline Subgroup intersect(const Subgroup& a, const Subgroup& b) {
  std::vector<Index> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return Subgroup(std::move(out));
}

inline Subgroup set_difference(const Subgroup& a, const Subgroup& b) {
  std::vector<Index> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return Subgroup(std::move(out));
}

inline Subgroup set_union(const Subgroup& a, const Subgroup& b) {
  std::vector<Index> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Subgroup(std::move(out));
}

struct SubgroupCollection {
  std::vector<Subgroup> groups;

  std::size_t size() const { return groups.size(); }
  const Subgroup& operator[](Index i) const { return groups[i]; }
  auto begin() const { return groups.begin(); }
  auto end() const { return groups.end(); }
};

// D = marginal (x) Ber(p*(x)), a collection C and the audited predictor f.
struct Instance {
  FiniteDomain domain;
  Marginal marginal;
  PredictorVec ground_truth;
  SubgroupCollection groups;
  PredictorVec audited;

  std::size_t n() const { return domain.n; }

  // Same marginal, groups and f; different ground truth.
  Instance with_ground_truth(PredictorVec p) const {
    Instance copy = *this;
    copy.ground_truth = std::move(p);
    return copy;
  }
  Instance with_audited(PredictorVec f) const {
    Instance copy = *this;
    copy.audited = std::move(f);
    return copy;
  }
  Instance with_groups(SubgroupCollection c) const {
    Instance copy = *this;
    copy.groups = std::move(c);
    return copy;
  }
};

namespace detail {
inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string("dimension mismatch in ") + what + ": " +
                          std::to_string(a) + " vs " + std::to_string(b));
  }
}
}  // namespace detail

// sum_x m(x) |f(x) - g(x)|
inline Rational l1_distance(const PredictorVec& f, const PredictorVec& g,
                            const Marginal& m) {
  detail::require_same_size(f.size(), g.size(), "l1_distance");
  detail::require_same_size(f.size(), m.size(), "l1_distance");
  Rational total = 0;
  for (Index i = 0; i < f.size(); ++i) total += m[i] * abs(f[i] - g[i]);
  return total;
}

inline Rational group_mass(const Marginal& m, const Subgroup& s) {
  Rational total = 0;
  for (Index x : s) total += m[x];
  return total;
}

// sum_{x in S} (m(x)/m(S)) |f(x) - g(x)|
inline Rational conditional_l1(const PredictorVec& f, const PredictorVec& g,
                               const Marginal& m, const Subgroup& s) {
  detail::require_same_size(f.size(), g.size(), "conditional_l1");
  detail::require_same_size(f.size(), m.size(), "conditional_l1");
  if (s.empty()) throw InvalidArgument("conditional_l1 on empty subgroup");
  Rational total = 0;
  for (Index x : s) {
    if (x >= f.size()) throw InvalidArgument("subgroup index out of range");
    total += m[x] * abs(f[x] - g[x]);
  }
  return total / group_mass(m, s);
}

// Conditional mean of `values` over S under m.
inline Rational conditional_mean(const std::vector<Rational>& values,
                                 const Marginal& m, const Subgroup& s) {
  Rational num = 0, den = 0;
  for (Index x : s) {
    num += m[x] * values[x];
    den += m[x];
  }
  return num / den;
}

inline bool covers(const SubgroupCollection& c, std::size_t n) {
  std::vector<bool> seen(n, false);
  for (const auto& g : c)
    for (Index x : g)
      if (x < n) seen[x] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

struct ValidationReport {
  bool valid = true;
  bool covers = false;
  std::vector<std::string> violations;
};

// Checks every invariant of Instance; never throws.
inline ValidationReport validate(const Instance& inst) {
  ValidationReport report;
  auto violate = [&](std::string msg) {
    report.valid = false;
    report.violations.push_back(std::move(msg));
  };
  const std::size_t n = inst.domain.n;
  if (n < 1) violate("domain must contain at least one point");
  if (!inst.domain.labels.empty() && inst.domain.labels.size() != n)
    violate("label count differs from n");

  if (inst.marginal.size() != n) {
    violate("marginal has " + std::to_string(inst.marginal.size()) +
            " entries, expected " + std::to_string(n));
  } else {
    Rational total = 0;
    for (Index i = 0; i < n; ++i) {
      if (inst.marginal[i] <= 0)
        violate("marginal mass at x" + std::to_string(i) + " is not positive");
      total += inst.marginal[i];
    }
    if (total != 1) violate("marginal mass sums to " + to_string(total) + ", not 1");
  }

  auto check_predictor = [&](const PredictorVec& p, const char* name) {
    if (p.size() != n) {
      violate(std::string(name) + " has " + std::to_string(p.size()) +
              " entries, expected " + std::to_string(n));
      return;
    }
    for (Index i = 0; i < n; ++i)
      if (p[i] < 0 || p[i] > 1)
        violate(std::string(name) + " value at x" + std::to_string(i) +
                " outside [0,1]");
  };
  check_predictor(inst.ground_truth, "p_star");
  check_predictor(inst.audited, "f");

  if (inst.groups.size() == 0) violate("subgroup collection is empty");
  for (Index gi = 0; gi < inst.groups.size(); ++gi) {
    const auto& g = inst.groups[gi];
    if (g.empty()) violate("group " + std::to_string(gi) + " is empty");
    for (Index x : g)
      if (x >= n)
        violate("group " + std::to_string(gi) + " contains out-of-range index " +
                std::to_string(x));
    for (Index gj = 0; gj < gi; ++gj)
      if (inst.groups[gj] == g)
        violate("groups " + std::to_string(gj) + " and " + std::to_string(gi) +
                " are identical");
  }
  report.covers = covers(inst.groups, n);
  return report;
}

// A distance together with a nearest member of the target set.
struct DistanceResult {
  Rational value;
  PredictorVec witness;
};

// Value and argmax index of a worst-group metric.
struct WorstGroup {
  Rational value;
  std::size_t group = 0;
};

inline void require_valid(const Instance& inst) {
  auto report = validate(inst);
  if (!report.valid) throw InvalidArgument("invalid instance: " + report.violations.front());
}

}  // namespace mcal
