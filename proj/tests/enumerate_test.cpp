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

#include <set>

#include "mcal/mcal.hpp"
#include "oracles.hpp"

using namespace mcal;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

std::vector<Rational> v(std::initializer_list<Rational> x) { return std::vector<Rational>(x); }

std::set<std::vector<Rational>> as_set(const MulticalibratedSet& m) {
  std::set<std::vector<Rational>> out;
  for (const auto& p : m.predictors) out.insert(p.values);
  return out;
}

}  // namespace

TEST(PartitionsTest, SmallCasesByListing) {
  EXPECT_EQ(partitions(1).size(), 1u);
  auto two = partitions(2);
  ASSERT_EQ(two.size(), 2u);
  std::set<std::vector<std::vector<std::size_t>>> got{two[0].classes, two[1].classes};
  std::set<std::vector<std::vector<std::size_t>>> want{{{0}, {1}}, {{0, 1}}};
  EXPECT_EQ(got, want);
  EXPECT_EQ(partitions(3).size(), 5u);
}

TEST(PartitionsTest, CountsMatchDirectEnumerationAndAreDistinctCanonical) {
  for (std::size_t k = 1; k <= 8; ++k) {
    std::vector<Index> items(k);
    for (Index i = 0; i < k; ++i) items[i] = i;
    const auto expected = oracle::all_partitions(items).size();
    auto all = partitions(k);
    EXPECT_EQ(all.size(), expected) << "k=" << k;
    EXPECT_EQ(bell_number(k), expected);
    std::set<std::vector<std::vector<std::size_t>>> seen;
    for (const auto& p : all) {
      std::vector<bool> hit(k, false);
      for (std::size_t c = 0; c < p.classes.size(); ++c) {
        ASSERT_FALSE(p.classes[c].empty());
        if (c > 0) {
          EXPECT_LT(p.classes[c - 1].front(), p.classes[c].front());
        }
        for (auto x : p.classes[c]) {
          EXPECT_FALSE(hit[x]);
          hit[x] = true;
        }
      }
      for (bool h : hit) EXPECT_TRUE(h);
      EXPECT_TRUE(seen.insert(p.classes).second);
    }
  }
}

TEST(PartitionsTest, StreamCountsBellTwelveWithoutStoring) {
  PartitionStream s(12);
  unsigned long long count = 0;
  do ++count;
  while (s.advance());
  EXPECT_EQ(count, 4213597ULL);
}

TEST(PartitionsTest, RefusesAboveCeilingUnlessOverridden) {
  EXPECT_THROW(PartitionStream(13), BudgetExceeded);
  try {
    PartitionStream s(13);
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.bound(), bell_number(13));
  }
  EXPECT_NO_THROW(PartitionStream(13, Budget::defaults(), true));
  EXPECT_NO_THROW(PartitionStream(13, Budget::with_limit(bell_number(13))));
  EXPECT_THROW(PartitionStream(0), InvalidArgument);
}

TEST(EnumerateTest, IsCalibratedExamples) {
  auto a0 = gen_three_point(0);
  auto a1 = gen_three_point(q(1, 10));
  EXPECT_TRUE(is_calibrated(a0.ground_truth, a0, a0.groups[0]));
  EXPECT_TRUE(is_calibrated(a0.audited, a0, a0.groups[0]));
  EXPECT_FALSE(is_calibrated(a1.audited, a1, a1.groups[1]));
}

TEST(EnumerateTest, CalibratedSetsOnThreePoints) {
  auto a0 = gen_three_point(0);
  auto s1 = calibrated_set(a0, a0.groups[0]);
  ASSERT_EQ(s1.predictors.size(), 2u);
  std::set<std::vector<Rational>> got(s1.predictors.begin(), s1.predictors.end());
  EXPECT_EQ(got, (std::set<std::vector<Rational>>{v({q(4, 5), q(1, 5)}), v({q(1, 2), q(1, 2)})}));

  auto a1 = gen_three_point(q(1, 10));
  auto s2 = calibrated_set(a1, a1.groups[1]);
  std::set<std::vector<Rational>> got2(s2.predictors.begin(), s2.predictors.end());
  EXPECT_EQ(got2, (std::set<std::vector<Rational>>{v({q(1, 5), q(9, 10)}), v({q(11, 20), q(11, 20)})}));

  auto single = calibrated_set(a1, Subgroup{2});
  ASSERT_EQ(single.predictors.size(), 1u);
  EXPECT_EQ(single.predictors[0], v({q(9, 10)}));
}

TEST(EnumerateTest, MulticalibratedSetsOfPaperInstances) {
  auto a1 = gen_three_point(q(1, 10));
  auto m1 = multicalibrated_set(a1);
  EXPECT_EQ(as_set(m1), (std::set<std::vector<Rational>>{a1.ground_truth.values}));

  auto a0 = gen_three_point(0);
  auto m0 = multicalibrated_set(a0);
  EXPECT_EQ(as_set(m0), (std::set<std::vector<Rational>>{a0.ground_truth.values, a0.audited.values}));

  auto c = gen_cdmc_example();
  auto mc = as_set(multicalibrated_set(c));
  EXPECT_TRUE(mc.count(c.ground_truth.values));
  EXPECT_TRUE(mc.count(c.audited.values));
}

TEST(EnumerateTest, UncoveredCoordinatesStayFree) {
  auto inst = gen_three_point(q(1, 10)).with_groups(SubgroupCollection{{Subgroup{0, 1}}});
  auto m = multicalibrated_set(inst);
  EXPECT_FALSE(m.covers());
  EXPECT_FALSE(m.constrained[2]);
  for (std::size_t i = 0; i < m.predictors.size(); ++i)
    EXPECT_EQ(m.complete(i, inst.audited)[2], inst.audited[2]);
  EXPECT_EQ(m.predictors.size(), 2u);
}

TEST(EnumerateTest, JoinBudgetRefusalReportsBound) {
  auto inst = gen_ring(2);
  Budget tight;
  tight.max_join_work = 3;
  try {
    multicalibrated_set(inst, tight);
    FAIL() << "expected refusal";
  } catch (const BudgetExceeded& e) {
    EXPECT_GT(e.bound(), 3u);
  }
}

TEST(EnumerateTest, MembershipPredicates) {
  auto a0 = gen_three_point(0);
  auto a1 = gen_three_point(q(1, 10));
  for (unsigned r = 1; r <= 4; ++r) {
    EXPECT_TRUE(is_degree_r_multicalibrated(a1.ground_truth, a1, r));
  }
  EXPECT_TRUE(is_multicalibrated(a1.ground_truth, a1));
  EXPECT_TRUE(is_multiaccurate(a1.ground_truth, a1));
  EXPECT_TRUE(is_degree_r_multicalibrated(a0.audited, a0, 2));
  EXPECT_FALSE(is_degree_r_multicalibrated(a1.audited, a1, 2));
  EXPECT_THROW(is_degree_r_multicalibrated(a1.audited, a1, 0), InvalidArgument);
}

class EnumerateRandomTest : public ::testing::TestWithParam<int> {};

TEST_P(EnumerateRandomTest, MatchesBruteForceOracle) {
  RandomInstanceOptions opt;
  opt.n = 3 + GetParam() % 3;  // 3..5
  opt.k = 1 + GetParam() % 3;
  opt.seed = 1000 + static_cast<std::uint64_t>(GetParam());
  opt.grid_denominator = GetParam() % 4 == 0 ? 2 : 5;  // coarse grids produce ties
  opt.uniform_marginal = GetParam() % 2 == 0;
  auto inst = gen_random(opt);
  ASSERT_TRUE(validate(inst).valid);

  for (const auto& s : inst.groups) {
    auto lib = calibrated_set(inst, s);
    std::set<std::vector<Rational>> lib_full;
    for (std::size_t i = 0; i < lib.predictors.size(); ++i)
      lib_full.insert(lib.embed(i, PredictorVec::constant(inst.n(), 0)).values);
    EXPECT_EQ(lib_full, oracle::calibrated_set(inst, s));
    EXPECT_LE(lib.predictors.size(), bell_number(s.size()));
  }

  auto lib = multicalibrated_set(inst);
  ASSERT_TRUE(lib.covers());
  EXPECT_EQ(as_set(lib), oracle::multicalibrated_set(inst));
  bool has_truth = false;
  for (const auto& g : lib.predictors) {
    EXPECT_TRUE(is_multicalibrated(g, inst));
    for (unsigned r = 1; r <= 3; ++r) EXPECT_TRUE(is_degree_r_multicalibrated(g, inst, r));
    has_truth = has_truth || g == inst.ground_truth;
  }
  EXPECT_TRUE(has_truth);
  EXPECT_EQ(is_multicalibrated(inst.audited, inst), as_set(lib).count(inst.audited.values) == 1);
}

TEST_P(EnumerateRandomTest, UnionAndDifferenceOfCalibratedGroups) {
  RandomInstanceOptions opt;
  opt.n = 6;
  opt.k = 2;
  opt.seed = 5000 + static_cast<std::uint64_t>(GetParam());
  opt.grid_denominator = 4;
  auto inst = gen_random(opt);
  // Take calibrated predictors on two disjoint sets and on a nested pair.
  Subgroup a{0, 1, 2}, b{3, 4}, big{0, 1, 2, 3, 4, 5};
  auto ca = calibrated_set(inst, a);
  auto cb = calibrated_set(inst, b);
  for (std::size_t i = 0; i < ca.predictors.size(); ++i)
    for (std::size_t j = 0; j < cb.predictors.size(); ++j) {
      auto g = cb.embed(j, ca.embed(i, inst.audited));
      EXPECT_TRUE(is_calibrated(g, inst, set_union(a, b)));
    }
  auto cbig = calibrated_set(inst, big);
  for (std::size_t i = 0; i < cbig.predictors.size(); ++i) {
    auto g = cbig.embed(i, inst.audited);
    if (is_calibrated(g, inst, a)) {
      EXPECT_TRUE(is_calibrated(g, inst, set_difference(big, a)));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, EnumerateRandomTest, ::testing::Range(0, 60));
