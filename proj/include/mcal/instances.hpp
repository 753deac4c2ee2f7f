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
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/errors.hpp"
#include "mcal/random.hpp"

namespace mcal {

// F_0 = 0, F_1 = 1.
inline mpz_class fibonacci_number(unsigned i) {
  mpz_class f;
  mpz_fib_ui(f.get_mpz_t(), i);
  return f;
}

namespace detail {
inline Rational q(long num, long den = 1) { return make_rational(num, den); }

inline Instance uniform_instance(std::size_t n, std::vector<Rational> p_star,
                                 std::vector<Subgroup> groups, std::vector<Rational> f) {
  Instance inst;
  inst.domain.n = n;
  inst.marginal = Marginal::uniform(n);
  inst.ground_truth = PredictorVec(std::move(p_star));
  inst.groups = SubgroupCollection{std::move(groups)};
  inst.audited = PredictorVec(std::move(f));
  return inst;
}
}  // namespace detail

// Three uniform points, S1 = {x1,x2}, S2 = {x2,x3},
// p* = (0.8, 0.2, 0.8 + alpha), f = 0.5 everywhere.
inline Instance gen_three_point(const Rational& alpha) {
  using detail::q;
  if (alpha < 0 || alpha > q(1, 5))
    throw PreconditionViolation("three-point: alpha must lie in [0, 1/5]");
  auto inst = detail::uniform_instance(3, {q(4, 5), q(1, 5), q(4, 5) + alpha},
                                       {Subgroup{0, 1}, Subgroup{1, 2}},
                                       std::vector<Rational>(3, q(1, 2)));
  inst.domain.labels = {"x1", "x2", "x3"};
  return inst;
}

// A local minimum of wdMC that is far from every improving predictor: three
// uniform points with p* = (1/2 + d - 6e, 1/2 - d, 1/2 + d + 6e) and
// f = (1/2 - 3e, 1/2, 1/2 + 3e), where wdMC(f) = e and l1(f, p*) = d.
inline Instance gen_wdmc_local_min(const Rational& eps, const Rational& delta) {
  using detail::q;
  if (!(eps > 0)) throw PreconditionViolation("wdmc-local-min: eps > 0 violated");
  if (delta < 0 || delta >= q(1, 2))
    throw PreconditionViolation("wdmc-local-min: delta in [0, 1/2) violated");
  if (delta + 6 * eps > q(1, 2))
    throw PreconditionViolation("wdmc-local-min: delta + 6*eps <= 1/2 violated");
  if (eps > delta / 9) throw PreconditionViolation("wdmc-local-min: eps <= delta/9 violated");
  const Rational half = q(1, 2);
  auto inst = detail::uniform_instance(
      3, {half + delta - 6 * eps, half - delta, half + delta + 6 * eps},
      {Subgroup{0, 1}, Subgroup{1, 2}}, {half - 3 * eps, half, half + 3 * eps});
  inst.domain.labels = {"x1", "x2", "x3"};
  return inst;
}

// 4N uniform points in four blocks of N. Groups are the four cyclically
// adjacent block pairs plus X; p* is 0.8 on even blocks and 0.2 on odd ones,
// f = 0.5. Exact enumeration is practical for N <= 2.
inline Instance gen_ring(std::size_t blocks_n) {
  using detail::q;
  if (blocks_n < 1) throw PreconditionViolation("ring: N must be >= 1");
  const std::size_t n = 4 * blocks_n;
  auto block = [&](std::size_t b) {  // b in 1..4
    std::vector<Index> v;
    for (std::size_t j = 0; j < blocks_n; ++j) v.push_back((b - 1) * blocks_n + j);
    return v;
  };
  auto pair = [&](std::size_t a, std::size_t b) {
    auto v = block(a);
    auto w = block(b);
    v.insert(v.end(), w.begin(), w.end());
    return Subgroup(v);
  };
  std::vector<Rational> p(n);
  std::vector<std::string> labels(n);
  for (std::size_t b = 1; b <= 4; ++b)
    for (std::size_t j = 0; j < blocks_n; ++j) {
      p[(b - 1) * blocks_n + j] = b % 2 == 0 ? q(4, 5) : q(1, 5);
      labels[(b - 1) * blocks_n + j] = "x" + std::to_string(b) + "_" + std::to_string(j + 1);
    }
  auto inst = detail::uniform_instance(
      n, std::move(p), {pair(1, 2), pair(2, 3), pair(3, 4), pair(4, 1), Subgroup::all(n)},
      std::vector<Rational>(n, q(1, 2)));
  inst.domain.labels = std::move(labels);
  return inst;
}

// Domain {0,1}^{k-1} (point index = bit pattern, bit i-1 = coordinate i),
// groups S_i = {x : x_i = 1} plus the all-zeros singleton, f = 0.5.
struct HypercubeFamily {
  unsigned k = 0;
  Instance null_instance;  // p* = 0.5 everywhere

  std::size_t domain_size() const { return null_instance.n(); }

  // p* = indicator of T; |T| must be 2^{k-2}.
  Instance with_subset(const std::vector<Index>& t) const {
    const std::size_t n = domain_size();
    std::set<Index> members(t.begin(), t.end());
    if (members.size() != t.size() || members.size() != n / 2)
      throw PreconditionViolation("hypercube: |T| must equal 2^(k-2) with distinct points");
    std::vector<Rational> p(n, Rational(0));
    for (Index x : members) {
      if (x >= n) throw PreconditionViolation("hypercube: T contains an out-of-range point");
      p[x] = 1;
    }
    return null_instance.with_ground_truth(PredictorVec(std::move(p)));
  }

  // Uniformly random T of size 2^{k-2}.
  Instance with_random_subset(std::uint64_t seed) const {
    const std::size_t n = domain_size();
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    perm.resize(n / 2);
    return with_subset(perm);
  }
};

inline HypercubeFamily gen_hypercube(unsigned k) {
  if (k < 2 || k > 16) throw PreconditionViolation("hypercube: k must lie in [2, 16]");
  const std::size_t n = std::size_t{1} << (k - 1);
  std::vector<Subgroup> groups;
  for (unsigned i = 1; i < k; ++i) {
    std::vector<Index> members;
    for (Index x = 0; x < n; ++x)
      if ((x >> (i - 1)) & 1U) members.push_back(x);
    groups.emplace_back(members);
  }
  groups.push_back(Subgroup{0});
  HypercubeFamily family;
  family.k = k;
  family.null_instance = detail::uniform_instance(
      n, std::vector<Rational>(n, detail::q(1, 2)), std::move(groups),
      std::vector<Rational>(n, detail::q(1, 2)));
  return family;
}

// Four uniform points where f != p* yet f is calibrated on both groups and
// on their intersection, so the continuized distance is zero.
inline Instance gen_cdmc_example() {
  using detail::q;
  auto inst = detail::uniform_instance(4, {q(3, 10), q(1, 5), q(4, 5), q(4, 5)},
                                       {Subgroup{0, 1, 2}, Subgroup{1, 2, 3}},
                                       {q(3, 10), q(1, 2), q(1, 2), q(4, 5)});
  inst.domain.labels = {"x1", "x2", "x3", "x4"};
  return inst;
}

// Multiaccuracy instance on x_0..x_{2k+1} with groups
// U_i = {x_{2i-1}, x_{2i}, x_{2i+1}}, V_i = {x_{2i-1}, x_{2i+2}} and
// W = {x_0, x_1}. With delta = 2(k+1) eps, f is unbiased on every U_i and V_i
// and has bias delta/2 on W, while p* drifts from f by Fibonacci multiples of
// delta.
inline Instance gen_fibonacci(unsigned k, const Rational& eps) {
  if (k < 1) throw PreconditionViolation("fibonacci: k must be >= 1");
  const Rational limit(mpz_class(1), mpz_class(2 * (k + 1)) * fibonacci_number(k + 1));
  if (!(eps > 0) || !(eps < limit))
    throw PreconditionViolation("fibonacci: eps must lie in (0, 1/(2(k+1)F_{k+1})) = (0, " +
                                to_string(limit) + ")");
  const std::size_t n = 2 * k + 2;
  const Rational delta = Rational(2 * (k + 1)) * eps;
  std::vector<Rational> p(n), f(n);
  p[0] = 0;
  p[2] = 1;
  auto odd_part = [](unsigned i) { return Rational(i % 2 == 1 ? 1 : 0); };  // (1-(-1)^i)/2
  for (unsigned i = 1; i <= k + 1; ++i) {
    Rational fib(fibonacci_number(i));
    Rational drift = (i % 2 == 0 ? fib : Rational(-fib)) * delta;
    p[2 * i - 1] = odd_part(i) + drift;
  }
  for (unsigned i = 1; i + 1 <= k; ++i) p[2 * i + 2] = 1 - p[2 * i - 1];
  for (unsigned i = 0; i <= k; ++i) {
    f[2 * i] = odd_part(i);
    f[2 * i + 1] = 1 - f[2 * i];
  }
  std::vector<Subgroup> groups;
  for (unsigned i = 1; i <= k; ++i) groups.push_back(Subgroup{2 * i - 1, 2 * i, 2 * i + 1});
  for (unsigned i = 1; i + 1 <= k; ++i) groups.push_back(Subgroup{2 * i - 1, 2 * i + 2});
  groups.push_back(Subgroup{0, 1});
  auto inst = detail::uniform_instance(n, std::move(p), std::move(groups), std::move(f));
  for (Index x = 0; x < n; ++x) inst.domain.labels.push_back("x" + std::to_string(x));
  return inst;
}

// Group index of W in gen_fibonacci output; U_i come first, then V_i.
inline std::size_t fibonacci_w_index(unsigned k) { return 2 * k - 1; }

struct DcmaPair {
  Instance with_p_star;
  Instance with_q_star;  // p* with x2 lowered by eps
};

// Six uniform points, S1 = {x1,x2,x3}, S2 = {x3,x4,x5}, S3 = {x1,x5,x6},
// f alternating 0.6 / 0.3.
inline DcmaPair gen_dcma_example(const Rational& eps) {
  using detail::q;
  if (!(eps > 0) || eps > q(1, 10))
    throw PreconditionViolation("dcma: eps must lie in (0, 1/10]");
  std::vector<Rational> p{q(3, 5), q(1, 5), q(7, 10), q(3, 10), q(1, 2), q(2, 5)};
  std::vector<Rational> f{q(3, 5), q(3, 10), q(3, 5), q(3, 10), q(3, 5), q(3, 10)};
  auto base = detail::uniform_instance(
      6, p, {Subgroup{0, 1, 2}, Subgroup{2, 3, 4}, Subgroup{0, 4, 5}}, f);
  base.domain.labels = {"x1", "x2", "x3", "x4", "x5", "x6"};
  auto shifted = p;
  shifted[1] -= eps;
  return DcmaPair{base, base.with_ground_truth(PredictorVec(std::move(shifted)))};
}

struct RandomInstanceOptions {
  std::size_t n = 4;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  unsigned long grid_denominator = 10;
  bool uniform_marginal = true;
};

// Seeded random instance: p* and f on the grid {0, 1/G, ..., 1}, k distinct
// non-empty groups forced to cover X, uniform or random rational marginal.
inline Instance gen_random(const RandomInstanceOptions& opt) {
  if (opt.n < 1 || opt.k < 1 || opt.grid_denominator < 1)
    throw PreconditionViolation("random: n, k and grid must be >= 1");
  if (opt.n < 63 && opt.k > (std::size_t{1} << opt.n) - 1)
    throw PreconditionViolation("random: more groups than non-empty subsets");
  Rng rng(opt.seed);
  const std::size_t n = opt.n;
  const long grid = static_cast<long>(opt.grid_denominator);
  auto grid_value = [&]() {
    return make_rational(static_cast<long>(rng.below(static_cast<std::uint64_t>(grid) + 1)), grid);
  };
  Instance inst;
  inst.domain.n = n;
  if (opt.uniform_marginal) {
    inst.marginal = Marginal::uniform(n);
  } else {
    std::vector<Rational> w(n);
    Rational total = 0;
    for (auto& v : w) {
      v = Rational(static_cast<long>(1 + rng.below(static_cast<std::uint64_t>(grid))));
      total += v;
    }
    for (auto& v : w) v /= total;
    inst.marginal = Marginal{std::move(w)};
  }
  std::vector<Rational> p(n), f(n);
  for (auto& v : p) v = grid_value();
  for (auto& v : f) v = grid_value();
  inst.ground_truth = PredictorVec(std::move(p));
  inst.audited = PredictorVec(std::move(f));

  for (int attempt = 0;; ++attempt) {
    std::vector<std::vector<Index>> members(opt.k);
    for (auto& g : members) {
      for (Index x = 0; x < n; ++x)
        if (rng.next() & 1ULL) g.push_back(x);
      if (g.empty()) g.push_back(static_cast<Index>(rng.below(n)));
    }
    for (Index x = 0; x < n; ++x) {
      bool seen = false;
      for (const auto& g : members) seen = seen || std::find(g.begin(), g.end(), x) != g.end();
      if (!seen) members[rng.below(opt.k)].push_back(x);
    }
    std::vector<Subgroup> groups;
    std::set<Subgroup> distinct;
    for (auto& g : members) {
      groups.emplace_back(g);
      distinct.insert(groups.back());
    }
    if (distinct.size() == groups.size()) {
      inst.groups = SubgroupCollection{std::move(groups)};
      break;
    }
    if (attempt > 10000) throw Error("random: could not draw distinct covering groups");
  }
  return inst;
}

// Ground truth p(x) = clamp(p*(x) + u(x)/G) with u uniform on (-1/2, 1/2] at
// 53-bit resolution, clamped to [0, 1]. Models a draw from a continuous law.
inline PredictorVec jitter_ground_truth(const Instance& inst, unsigned long grid_denominator,
                                        std::uint64_t seed) {
  Rng rng(seed);
  PredictorVec p = inst.ground_truth;
  const Rational step = make_rational(1, static_cast<long>(grid_denominator));
  for (Index x = 0; x < p.size(); ++x) {
    Rational u = rng.uniform_rational() - make_rational(1, 2);
    Rational v = p[x] + u * step;
    if (v < 0) v = 0;
    if (v > 1) v = 1;
    p[x] = v;
  }
  return p;
}

}  // namespace mcal
