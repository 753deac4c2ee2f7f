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

#include <gtest/gtest.h>

#include "mcal/mcal.hpp"
#include "oracles.hpp"

using namespace mcal;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

std::set<Subgroup> as_set(const SubgroupCollection& c) { return {c.begin(), c.end()}; }

// I(C) by brute force over all non-empty subfamilies.
std::set<Subgroup> closure_oracle(const SubgroupCollection& c) {
  std::set<Subgroup> out;
  for (unsigned mask = 1; mask < (1U << c.size()); ++mask) {
    std::optional<Subgroup> acc;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (mask & (1U << i)) acc = acc ? intersect(*acc, c[i]) : c[i];
    if (!acc->empty()) out.insert(*acc);
  }
  return out;
}

}  // namespace

TEST(DistancesTest, DceExamples) {
  auto a0 = gen_three_point(0);
  auto r = dce(a0, a0.groups[0]);
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(r.witness, a0.audited);
  auto a1 = gen_three_point(q(1, 10));
  auto r2 = dce(a1, a1.groups[1]);
  EXPECT_EQ(r2.value, q(1, 20));
  EXPECT_EQ(r2.witness[1], q(11, 20));
  EXPECT_EQ(r2.witness[2], q(11, 20));
  EXPECT_EQ(dce(a1.with_audited(a1.ground_truth), a1.groups[1]).value, 0);
}

TEST(DistancesTest, WdmcExamples) {
  auto a1 = gen_three_point(q(1, 10));
  EXPECT_EQ(wdmc(a1).value, q(1, 30));
  EXPECT_EQ(wdmc(a1).group, 1u);
  EXPECT_EQ(wdmc(a1.with_audited(a1.ground_truth)).value, 0);
  auto b1 = gen_wdmc_local_min(q(1, 200), q(1, 10));
  EXPECT_EQ(wdmc(b1).value, q(1, 200));
}

TEST(DistancesTest, DmcExamples) {
  auto a0 = gen_three_point(0);
  auto r0 = dmc(a0);
  EXPECT_EQ(r0.value, 0);
  EXPECT_EQ(r0.witness, a0.audited);
  for (Rational alpha : {q(1, 20), q(1, 10), q(3, 20), q(1, 5)}) {
    auto inst = gen_three_point(alpha);
    auto r = dmc(inst);
    EXPECT_EQ(r.value, q(3, 10) + alpha / 3);
    EXPECT_EQ(r.witness, inst.ground_truth);
  }
  EXPECT_EQ(dmc(gen_cdmc_example()).value, 0);
}

TEST(DistancesTest, DmcWithUncoveredPointCopiesF) {
  auto inst = gen_three_point(q(1, 10)).with_groups(SubgroupCollection{{Subgroup{1, 2}}});
  auto r = dmc(inst);
  EXPECT_EQ(r.witness[0], inst.audited[0]);
  EXPECT_EQ(r.value, q(1, 3) * q(1, 20) * 2);
  EXPECT_TRUE(is_multicalibrated(r.witness, inst));
}

TEST(DistancesTest, IntersectionClosureExamples) {
  SubgroupCollection one{{Subgroup{0, 1}}};
  EXPECT_EQ(as_set(intersection_closure(one)), (std::set<Subgroup>{Subgroup{0, 1}}));
  SubgroupCollection two{{Subgroup{0, 1}, Subgroup{1, 2}}};
  EXPECT_EQ(as_set(intersection_closure(two)),
            (std::set<Subgroup>{Subgroup{0, 1}, Subgroup{1, 2}, Subgroup{1}}));
  auto ring = gen_ring(1);
  auto closure = as_set(intersection_closure(ring.groups));
  EXPECT_EQ(closure, closure_oracle(ring.groups));
  for (Index b = 0; b < 4; ++b) EXPECT_TRUE(closure.count(Subgroup{b}));

  std::vector<Subgroup> many;
  for (Index i = 0; i < 21; ++i) many.push_back(Subgroup{i});
  EXPECT_THROW(intersection_closure(SubgroupCollection{many}), BudgetExceeded);
  EXPECT_NO_THROW(intersection_closure(SubgroupCollection{many}, Budget::unlimited()));
}

TEST(DistancesTest, GeneratedPartitionExamples) {
  SubgroupCollection two{{Subgroup{0, 1}, Subgroup{1, 2}}};
  auto j = generated_partition(two, 3);
  EXPECT_EQ(j.cells, (std::vector<Subgroup>{Subgroup{0}, Subgroup{1}, Subgroup{2}}));
  EXPECT_EQ(j.origin[1], (std::vector<std::size_t>{0, 1}));

  auto ring = gen_ring(2);
  auto rj = generated_partition(ring.groups, ring.n());
  EXPECT_EQ(rj.cells, (std::vector<Subgroup>{Subgroup{0, 1}, Subgroup{2, 3}, Subgroup{4, 5},
                                             Subgroup{6, 7}}));

  auto cube = gen_hypercube(5).null_instance;
  auto cj = generated_partition(cube.groups, cube.n());
  ASSERT_EQ(cj.cells.size(), 16u);
  for (const auto& c : cj.cells) EXPECT_EQ(c.size(), 1u);

  EXPECT_THROW(generated_partition(SubgroupCollection{{Subgroup{0}}}, 2), PreconditionViolation);
}

TEST(DistancesTest, DimcExamples) {
  for (Rational alpha : {q(0), q(1, 20), q(1, 10), q(1, 5)}) {
    auto inst = gen_three_point(alpha);
    auto r = dimc(inst);
    EXPECT_EQ(r.value, q(3, 10) + alpha / 3);
    EXPECT_EQ(r.witness, inst.ground_truth);
  }
  auto c = gen_cdmc_example();
  EXPECT_EQ(dimc(c).value, 0);
  EXPECT_EQ(dimc(gen_ring(1)).value, q(3, 10));
}

TEST(DistancesTest, DcmaExamples) {
  auto pair = gen_dcma_example(q(1, 100));
  EXPECT_EQ(dcma(pair.with_p_star).value, 0);
  EXPECT_TRUE(is_calibrated(pair.with_p_star.audited, pair.with_p_star, Subgroup::all(6)));
  auto r = dcma(pair.with_q_star);
  EXPECT_GT(r.value, q(1, 60));
  EXPECT_TRUE(is_multiaccurate(r.witness, pair.with_q_star));
  EXPECT_TRUE(is_calibrated(r.witness, pair.with_q_star, Subgroup::all(6)));
  EXPECT_EQ(l1_distance(r.witness, pair.with_q_star.audited, pair.with_q_star.marginal), r.value);
  auto truth = pair.with_q_star.with_audited(pair.with_q_star.ground_truth);
  EXPECT_EQ(dcma(truth).value, 0);
}

TEST(DistancesTest, LowDegreeBruteForce) {
  auto a0 = gen_three_point(0);
  for (unsigned long grid : {2UL, 10UL, 20UL}) {
    auto r = dmc_lowdeg_bruteforce(a0, 2, grid);
    EXPECT_EQ(r.value, 0) << "grid " << grid;
    EXPECT_EQ(r.residual_threshold, q(1, static_cast<long>(2 * grid)));
  }
  auto a1 = gen_three_point(q(1, 10));
  auto r = dmc_lowdeg_bruteforce(a1, 2, 100);
  EXPECT_GE(r.value, q(3, 10));
  EXPECT_THROW(dmc_lowdeg_bruteforce(gen_ring(2), 2, 2), BudgetExceeded);
}

TEST(DistancesTest, LowDegreeR1BracketsDma) {
  // The grid oracle with r = 1 lies between the LP with relaxed bias
  // constraints and dMA plus the rounding allowance 1/(2G).
  for (int seed = 0; seed < 8; ++seed) {
    RandomInstanceOptions opt;
    opt.n = 3;
    opt.k = 2;
    opt.seed = 300 + static_cast<std::uint64_t>(seed);
    auto inst = gen_random(opt);
    const unsigned long grid = 20;
    const Rational tau = q(1, 2 * grid);
    auto brute = dmc_lowdeg_bruteforce(inst, 1, grid);
    auto relaxed = build_dma_lp(inst);
    std::vector<LinearConstraint> rows;
    for (std::size_t g = 0; g < inst.groups.size(); ++g) {
      auto c = relaxed.constraints[g];
      const Rational slack = tau * group_mass(inst.marginal, inst.groups[g]);
      rows.push_back({c.coeffs, Relation::kLessEqual, c.rhs + slack});
      rows.push_back({c.coeffs, Relation::kGreaterEqual, c.rhs - slack});
    }
    for (std::size_t i = inst.groups.size(); i < relaxed.constraints.size(); ++i)
      rows.push_back(relaxed.constraints[i]);
    relaxed.constraints = rows;
    auto low = lp_solve(relaxed);
    ASSERT_EQ(low.status, LPStatus::kOptimal);
    EXPECT_LE(low.optimum, brute.value) << "seed " << seed;
    EXPECT_LE(brute.value, dma(inst).value + tau) << "seed " << seed;
  }
}

TEST(DistancesTest, LocalMinProbe) {
  auto b1 = gen_wdmc_local_min(q(1, 200), q(1, 10));
  auto flat = local_min_probe(ProbeMetric::kWdmc, b1, q(1, 200), 300, 11);
  EXPECT_EQ(flat.baseline, q(1, 200));
  EXPECT_FALSE(flat.decrease_found);
  auto down = local_min_probe(ProbeMetric::kDimc, b1, q(1, 200), 300, 11);
  EXPECT_TRUE(down.decrease_found);
  EXPECT_GT(down.best_decrease, 0);
  Rational moved = 0;
  for (Index x = 0; x < b1.n(); ++x) moved += b1.marginal[x] * abs(down.best_perturbation[x]);
  EXPECT_LE(moved, q(1, 200));
  auto truth = b1.with_audited(b1.ground_truth);
  for (auto m : {ProbeMetric::kWdmc, ProbeMetric::kDmc, ProbeMetric::kDimc, ProbeMetric::kWdma,
                 ProbeMetric::kDma}) {
    auto r = local_min_probe(m, truth, q(1, 50), 20, 3);
    EXPECT_EQ(r.baseline, 0);
    EXPECT_FALSE(r.decrease_found) << to_string(m);
  }
  auto again = local_min_probe(ProbeMetric::kDimc, b1, q(1, 200), 300, 11);
  EXPECT_EQ(again.best_value, down.best_value);
  EXPECT_EQ(again.best_perturbation, down.best_perturbation);
  EXPECT_EQ(parse_probe_metric("dma"), ProbeMetric::kDma);
  EXPECT_FALSE(parse_probe_metric("ece").has_value());
}

class DistancesRandomTest : public ::testing::TestWithParam<int> {};

TEST_P(DistancesRandomTest, AgreesWithOraclesAndWitnessesVerify) {
  RandomInstanceOptions opt;
  opt.n = 3 + GetParam() % 3;
  opt.k = 1 + GetParam() % 3;
  opt.seed = 20000 + static_cast<std::uint64_t>(GetParam());
  opt.grid_denominator = GetParam() % 2 == 0 ? 4 : 10;
  opt.uniform_marginal = GetParam() % 3 != 0;
  auto inst = gen_random(opt);

  for (const auto& s : inst.groups) {
    auto r = dce(inst, s);
    EXPECT_EQ(r.value, oracle::dce(inst, s));
    EXPECT_TRUE(is_calibrated(r.witness, inst, s));
    EXPECT_EQ(conditional_l1(inst.audited, r.witness, inst.marginal, s), r.value);
    EXPECT_EQ(r.value == 0, is_calibrated(inst.audited, inst, s));
  }
  auto m = dmc(inst);
  EXPECT_EQ(m.value, oracle::dmc(inst));
  EXPECT_TRUE(is_multicalibrated(m.witness, inst));
  EXPECT_EQ(l1_distance(inst.audited, m.witness, inst.marginal), m.value);
  EXPECT_EQ(m.value == 0, is_multicalibrated(inst.audited, inst));

  auto d = dimc(inst);
  auto closed = inst.with_groups(intersection_closure(inst.groups));
  EXPECT_TRUE(is_multicalibrated(d.witness, closed));
  EXPECT_EQ(l1_distance(inst.audited, d.witness, inst.marginal), d.value);
  EXPECT_EQ(as_set(intersection_closure(inst.groups)), closure_oracle(inst.groups));

  auto c = dcma(inst);
  EXPECT_TRUE(is_multiaccurate(c.witness, inst));
  EXPECT_TRUE(is_calibrated(c.witness, inst, Subgroup::all(inst.n())));
  EXPECT_EQ(l1_distance(inst.audited, c.witness, inst.marginal), c.value);

  EXPECT_LE(wdmc(inst).value, m.value);
  EXPECT_LE(m.value, d.value);
}

TEST_P(DistancesRandomTest, DimcEqualsDmcOverClosureAndPartition) {
  RandomInstanceOptions opt;
  opt.n = 4 + GetParam() % 3;
  opt.k = 2 + GetParam() % 2;
  opt.seed = 30000 + static_cast<std::uint64_t>(GetParam());
  auto inst = gen_random(opt);
  auto d = dimc(inst).value;
  EXPECT_EQ(d, dmc(inst.with_groups(intersection_closure(inst.groups))).value);
  EXPECT_EQ(d, dmc(inst.with_groups(generated_partition(inst.groups, inst.n()).as_collection())).value);
}

TEST_P(DistancesRandomTest, LipschitzInGroundTruth) {
  RandomInstanceOptions opt;
  opt.n = 4 + GetParam() % 3;
  opt.k = 2 + GetParam() % 2;
  opt.seed = 40000 + static_cast<std::uint64_t>(GetParam());
  opt.uniform_marginal = GetParam() % 2 == 0;
  auto a = gen_random(opt);
  opt.seed += 500;
  auto b = a.with_ground_truth(gen_random(opt).ground_truth);
  const Rational gap = l1_distance(a.ground_truth, b.ground_truth, a.marginal);
  EXPECT_LE(abs(dimc(a).value - dimc(b).value), gap);
  for (const auto& s : a.groups) {
    const Rational local = conditional_l1(a.ground_truth, b.ground_truth, a.marginal, s);
    EXPECT_LE(abs(dce(a, s).value - dce(b, s).value), local);
  }
  // dMC itself is Lipschitz when the groups form a disjoint cover.
  auto cells = generated_partition(a.groups, a.n()).as_collection();
  auto da = a.with_groups(cells), db = b.with_groups(cells);
  EXPECT_LE(abs(dmc(da).value - dmc(db).value), gap);
}

INSTANTIATE_TEST_SUITE_P(Seeds, DistancesRandomTest, ::testing::Range(0, 50));
