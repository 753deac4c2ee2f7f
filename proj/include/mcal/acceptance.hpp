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

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mcal/distances.hpp"
#include "mcal/estimators.hpp"
#include "mcal/instances.hpp"
#include "mcal/multiaccuracy.hpp"

namespace mcal {

struct CriterionResult {
  int id = 0;
  std::string claim;
  bool pass = false;
  double seconds = 0;
  double time_limit = 0;  // 0 = none
  std::string detail;
  std::vector<std::string> log;  // per-draw notes, e.g. logged failures
};

namespace acceptance {

inline Rational q(long a, long b = 1) { return make_rational(a, b); }

// Accumulates failed checks into a detail string.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures_;
      if (failures_ <= 5) notes_ << (failures_ > 1 ? "; " : "") << what;
    }
  }
  bool ok() const { return failures_ == 0; }
  std::string summary(const std::string& on_success) const {
    if (ok()) return on_success;
    std::ostringstream out;
    out << failures_ << " check(s) failed: " << notes_.str();
    return out.str();
  }

 private:
  int failures_ = 0;
  std::ostringstream notes_;
};

inline CriterionResult start(int id, std::string claim) {
  CriterionResult r;
  r.id = id;
  r.claim = std::move(claim);
  return r;
}

inline RandomInstanceOptions random_options(std::size_t n, std::size_t k, std::uint64_t seed,
                                            bool uniform = true) {
  RandomInstanceOptions opt;
  opt.n = n;
  opt.k = k;
  opt.seed = seed;
  opt.uniform_marginal = uniform;
  return opt;
}

inline CriterionResult discontinuity_curve() {
  auto r = start(1, "three-point dMC jumps at alpha = 0, dIMC = 3/10 + alpha/3 throughout");
  r.time_limit = 1;
  Checker c;
  std::ostringstream d;
  for (Rational alpha : {q(0), q(1, 20), q(1, 10), q(1, 5)}) {
    auto inst = gen_three_point(alpha);
    Rational m = dmc(inst).value, i = dimc(inst).value;
    Rational want = q(3, 10) + alpha / 3;
    c.expect(m == (alpha == 0 ? Rational(0) : want), "dmc at alpha=" + to_string(alpha));
    c.expect(i == want, "dimc at alpha=" + to_string(alpha));
    d << "a=" << to_string(alpha) << ": dmc=" << to_string(m) << " dimc=" << to_string(i) << "  ";
  }
  r.pass = c.ok();
  r.detail = c.summary(d.str());
  return r;
}

inline CriterionResult hierarchy() {
  auto r = start(2, "wdmc <= dmc <= dimc on 200 random instances (n <= 6, k <= 3)");
  r.time_limit = 120;
  Checker c;
  int strict = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto inst = gen_random(random_options(3 + s % 4, 1 + s % 3, 100000 + s, s % 2 == 0));
    Rational w = wdmc(inst).value, m = dmc(inst).value, i = dimc(inst).value;
    c.expect(w <= m && m <= i, "seed " + std::to_string(100000 + s));
    strict += m < i;
  }
  r.pass = c.ok();
  r.detail = c.summary("200/200 hold; dmc < dimc strictly on " + std::to_string(strict));
  return r;
}

inline CriterionResult closure_partition_equivalence() {
  auto r = start(3, "dimc = dmc over I(C) = dmc over J(C) on 100 random instances");
  r.time_limit = 120;
  Checker c;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto inst = gen_random(random_options(3 + s % 4, 2 + s % 2, 200000 + s, s % 3 != 0));
    Rational i = dimc(inst).value;
    Rational via_i = dmc(inst.with_groups(intersection_closure(inst.groups))).value;
    Rational via_j =
        dmc(inst.with_groups(generated_partition(inst.groups, inst.n()).as_collection())).value;
    c.expect(i == via_i && i == via_j, "seed " + std::to_string(200000 + s));
  }
  r.pass = c.ok();
  r.detail = c.summary("100/100 exact");
  return r;
}

inline CriterionResult lipschitz() {
  auto r = start(4, "dimc and per-group dce are 1-Lipschitz in p* (200 random pairs)");
  r.time_limit = 120;
  Checker c;
  Rational worst_ratio = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto a = gen_random(random_options(3 + s % 4, 1 + s % 3, 300000 + s, s % 2 == 0));
    auto other = gen_random(random_options(3 + s % 4, 1 + s % 3, 400000 + s, s % 2 == 0));
    auto b = a.with_ground_truth(s % 4 == 0 ? jitter_ground_truth(a, 20, s) : other.ground_truth);
    Rational gap = l1_distance(a.ground_truth, b.ground_truth, a.marginal);
    Rational diff = abs(dimc(a).value - dimc(b).value);
    c.expect(diff <= gap, "dimc seed " + std::to_string(300000 + s));
    if (gap > 0 && diff / gap > worst_ratio) worst_ratio = diff / gap;
    for (const auto& g : a.groups) {
      Rational local = conditional_l1(a.ground_truth, b.ground_truth, a.marginal, g);
      c.expect(abs(dce(a, g).value - dce(b, g).value) <= local, "dce seed " + std::to_string(300000 + s));
    }
  }
  r.pass = c.ok();
  r.detail = c.summary("all hold; max |d dimc| / l1 = " + to_decimal(worst_ratio, 6));
  return r;
}

inline CriterionResult almost_everywhere() {
  auto r = start(5, "dmc = dimc for jittered p* in >= 99% of 500 draws");
  int equal = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    auto base = gen_random(random_options(3 + s % 4, 2 + s % 2, 500000 + s, s % 2 == 0));
    auto inst = base.with_ground_truth(jitter_ground_truth(base, 10, 600000 + s));
    Rational m = dmc(inst).value, i = dimc(inst).value;
    if (m == i) {
      ++equal;
    } else {
      r.log.push_back("seed " + std::to_string(500000 + s) + ": dmc=" + to_string(m) +
                      " dimc=" + to_string(i));
    }
  }
  r.pass = equal >= 495;
  r.detail = std::to_string(equal) + "/500 equal";
  return r;
}

inline CriterionResult wdmc_local_minimum() {
  auto r = start(6, "wdmc local minimum: no decrease within radius 1/200 < delta/9, p* far away");
  r.time_limit = 60;
  Checker c;
  const Rational eps = q(1, 200), delta = q(1, 10);
  auto inst = gen_wdmc_local_min(eps, delta);
  c.expect(wdmc(inst).value == eps, "wdmc(f) != eps");
  const Rational radius = delta / 20;
  auto probe = local_min_probe(ProbeMetric::kWdmc, inst, radius, 2000, 2024);
  c.expect(!probe.decrease_found, "probe found decrease " + to_string(probe.best_decrease));
  c.expect(wdmc(inst.with_audited(inst.ground_truth)).value == 0, "wdmc(p*) != 0");
  Rational far = l1_distance(inst.audited, inst.ground_truth, inst.marginal);
  c.expect(far == delta, "l1(f,p*) != delta");
  r.pass = c.ok();
  r.detail = c.summary("wdmc(f)=" + to_string(eps) + ", 2000 trials no decrease (best value " +
                       to_string(probe.best_value) + "), wdmc(p*)=0 at l1 " + to_string(far));
  return r;
}

inline CriterionResult ring() {
  auto r = start(7, "ring N=1: dmc = 0, dimc = 3/10, J(C) has 4 cells");
  Checker c;
  auto inst = gen_ring(1);
  c.expect(dmc(inst).value == 0, "dmc != 0");
  c.expect(dimc(inst).value == q(3, 10), "dimc != 3/10");
  c.expect(generated_partition(inst.groups, inst.n()).cells.size() == 4, "cells != 4");
  // Jittering p* inside a small l1 ball destroys multicalibration of f: dmc
  // jumps to dimc while dimc moves by at most the jitter.
  int jumped = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto moved = inst.with_ground_truth(jitter_ground_truth(inst, 100, 700000 + s));
    Rational gap = l1_distance(moved.ground_truth, inst.ground_truth, inst.marginal);
    Rational m = dmc(moved).value, i = dimc(moved).value;
    c.expect(abs(i - q(3, 10)) <= gap, "dimc moved too far");
    jumped += m == i && m + gap >= q(3, 10);
  }
  c.expect(jumped == 20, "jitter did not lift dmc to dimc in " + std::to_string(20 - jumped) + " draws");
  r.pass = c.ok();
  r.detail = c.summary("dmc=0 dimc=3/10 cells=4; jittered p* (radius <= 1/200): dmc = dimc ~ 3/10 in 20/20");
  return r;
}

inline CriterionResult continuized_example() {
  auto r = start(8, "four-point example: dimc(f) = 0 while l1(f, p*) = 3/20");
  Checker c;
  auto inst = gen_cdmc_example();
  c.expect(dimc(inst).value == 0, "dimc != 0");
  c.expect(l1_distance(inst.audited, inst.ground_truth, inst.marginal) == q(3, 20), "l1 != 3/20");
  r.pass = c.ok();
  r.detail = c.summary("dimc=0, l1=3/20");
  return r;
}

inline CriterionResult fibonacci() {
  auto r = start(9, "Fibonacci instances k=3,4,5: wdma = eps, dma >= F_{k+1} eps / 3, biases");
  r.time_limit = 60;
  Checker c;
  std::ostringstream d;
  for (unsigned k : {3u, 4u, 5u}) {
    const Rational eps(mpz_class(1), mpz_class(4 * (k + 1)) * fibonacci_number(k + 1));
    auto inst = gen_fibonacci(k, eps);
    const Rational delta = Rational(2 * (k + 1)) * eps;
    c.expect(wdma(inst).value == eps, "wdma k=" + std::to_string(k));
    Rational value = dma(inst).value;
    Rational bound = Rational(fibonacci_number(k + 1)) * eps / 3;
    c.expect(value >= bound, "dma bound k=" + std::to_string(k));
    for (std::size_t g = 0; g < inst.groups.size(); ++g) {
      Rational b = bias(inst.audited, inst, inst.groups[g]);
      c.expect(b == (g == fibonacci_w_index(k) ? Rational(delta / 2) : Rational(0)),
               "bias k=" + std::to_string(k) + " group " + std::to_string(g));
    }
    d << "k=" << k << ": dma/eps=" << to_string(value / eps) << " >= " << to_string(bound / eps) << "  ";
  }
  r.pass = c.ok();
  r.detail = c.summary(d.str());
  return r;
}

inline CriterionResult dma_lp() {
  auto r = start(10, "dMA LP: dma(p*) = 0, witnesses multiaccurate, single-group dma = bias");
  Checker c;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto inst = gen_random(random_options(3 + s % 5, 1 + s % 3, 800000 + s, s % 2 == 0));
    c.expect(dma(inst.with_audited(inst.ground_truth)).value == 0, "dma(p*) seed " + std::to_string(s));
    auto res = dma(inst);
    c.expect(is_multiaccurate(res.witness, inst), "witness seed " + std::to_string(s));
    const auto& g = inst.groups[0];
    c.expect(dma(inst.with_groups(SubgroupCollection{{g}})).value ==
                 group_mass(inst.marginal, g) * bias(inst.audited, inst, g),
             "single group seed " + std::to_string(s));
  }
  r.pass = c.ok();
  r.detail = c.summary("100/100 exact");
  return r;
}

inline CriterionResult dcma_discontinuity() {
  auto r = start(11, "dcma = 0 under p*, > 1/60 under q* (eps = 1/100)");
  Checker c;
  auto pair = gen_dcma_example(q(1, 100));
  Rational a = dcma(pair.with_p_star).value, b = dcma(pair.with_q_star).value;
  c.expect(a == 0, "dcma(p*) != 0");
  c.expect(b > q(1, 60), "dcma(q*) <= 1/60");
  r.pass = c.ok();
  r.detail = c.summary("dcma(p*)=0, dcma(q*)=" + to_string(b));
  return r;
}

inline CriterionResult low_degree() {
  auto r = start(12, "degree-2: f = 1/2 passes at alpha = 0, fails at 1/10; grid oracle >= 3/10");
  Checker c;
  auto a0 = gen_three_point(0), a1 = gen_three_point(q(1, 10));
  c.expect(is_degree_r_multicalibrated(a0.audited, a0, 2), "alpha=0 not degree-2");
  c.expect(!is_degree_r_multicalibrated(a1.audited, a1, 2), "alpha=1/10 degree-2");
  auto brute = dmc_lowdeg_bruteforce(a1, 2, 100);
  c.expect(brute.value >= q(3, 10), "grid value " + to_string(brute.value));
  r.pass = c.ok();
  r.detail = c.summary("grid 1/100 value " + to_string(brute.value) + " (threshold " +
                       to_string(brute.residual_threshold) + ", " + std::to_string(brute.accepted) +
                       " accepted)");
  return r;
}

inline CriterionResult estimator_coverage() {
  auto r = start(13, "interval coverage over 100 seeds: dce (S2) brackets 1/20, dimc brackets 1/3");
  r.time_limit = 600;
  auto inst = gen_three_point(q(1, 10));
  const Rational eps = q(1, 50), delta = q(1, 20);
  int dce_hits = 0, dimc_hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto a = dce_interval(inst, inst.groups[1], eps, delta, s);
    auto b = dimc_interval(inst, eps, delta, s);
    if (a.contains(q(1, 20))) ++dce_hits;
    else r.log.push_back("dce seed " + std::to_string(s) + " missed: point " + to_string(a.point));
    if (b.contains(q(1, 3))) ++dimc_hits;
    else r.log.push_back("dimc seed " + std::to_string(s) + " missed: point " + to_string(b.point));
  }
  r.pass = dce_hits >= 95 && dimc_hits >= 95;
  r.detail = "dce " + std::to_string(dce_hits) + "/100, dimc " + std::to_string(dimc_hits) + "/100";
  return r;
}

inline CriterionResult hypercube() {
  auto r = start(14, "hypercube k=4: continuized dMC = 0 under D_0, 1/2 under D_T");
  Checker c;
  auto cube = gen_hypercube(4);
  c.expect(dimc(cube.null_instance).value == 0, "D_0 value");
  auto t = cube.with_random_subset(14);
  c.expect(dimc(t).value == q(1, 2), "D_T value");
  r.pass = c.ok();
  r.detail = c.summary("D_0: 0, D_T: 1/2 (sample-complexity bound documented only)");
  return r;
}

}  // namespace acceptance

inline std::vector<std::function<CriterionResult()>> acceptance_suite() {
  using namespace acceptance;
  return {discontinuity_curve, hierarchy,   closure_partition_equivalence,
          lipschitz,           almost_everywhere, wdmc_local_minimum,
          ring,                continuized_example, fibonacci,
          dma_lp,              dcma_discontinuity, low_degree,
          estimator_coverage,  hypercube};
}

// Runs one criterion, timing it and turning exceptions into failures.
inline CriterionResult run_criterion(const std::function<CriterionResult()>& fn, int id) {
  auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.id = id;
    r.claim = "criterion " + std::to_string(id);
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.time_limit > 0 && r.seconds > r.time_limit) {
    r.pass = false;
    r.detail += " (exceeded time limit)";
  }
  return r;
}

}  // namespace mcal
