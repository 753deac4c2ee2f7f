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
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/distances.hpp"
#include "mcal/errors.hpp"
#include "mcal/lp.hpp"
#include "mcal/random.hpp"

namespace mcal {

struct Draw {
  Index x = 0;
  int label = 0;
};

struct LabeledSample {
  Rational prediction;
  int label = 0;
  std::vector<bool> group_bits;  // membership per tracked cell
};

// m i.i.d. draws (x, y) with x ~ marginal and y ~ Ber(p*(x)).
inline std::vector<Draw> sample(const Instance& inst, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("sample: m must be >= 1");
  DiscreteSampler pick(inst.marginal.probs);
  std::vector<BernoulliThreshold> coin;
  for (const auto& p : inst.ground_truth.values) coin.push_back(BernoulliThreshold::of(p));
  Rng rng(seed);
  std::vector<Draw> out(m);
  for (auto& d : out) {
    d.x = pick(rng);
    d.label = rng.bernoulli(coin[d.x]) ? 1 : 0;
  }
  return out;
}

inline std::vector<LabeledSample> labeled_samples(const Instance& inst,
                                                  const std::vector<Draw>& draws,
                                                  const std::vector<Subgroup>& cells) {
  std::vector<LabeledSample> out;
  out.reserve(draws.size());
  for (const auto& d : draws) {
    LabeledSample s{inst.audited[d.x], d.label, {}};
    for (const auto& c : cells) s.group_bits.push_back(c.contains(d.x));
    out.push_back(std::move(s));
  }
  return out;
}

// Samples sharing a prediction value, aggregated.
struct PredictionTally {
  Rational value;
  unsigned long long count = 0;
  unsigned long long ones = 0;
};

// Empirical smooth calibration error
//   max (1/m) sum_j w(v_j) (y_j - v_j)  over  w in [-1,1], 1-Lipschitz,
// solved as an LP over the distinct sorted prediction values.
inline Rational smce_from_tallies(std::vector<PredictionTally> tallies) {
  std::sort(tallies.begin(), tallies.end(),
            [](const PredictionTally& a, const PredictionTally& b) { return a.value < b.value; });
  unsigned long long total = 0;
  for (const auto& t : tallies) total += t.count;
  if (total == 0) throw InvalidArgument("smce: empty sample");
  const std::size_t k = tallies.size();
  LPProblem lp;
  lp.objective.resize(k);
  lp.bounds.assign(k, VariableBounds{Rational(-1), Rational(1)});
  const Rational m(static_cast<unsigned long>(total));
  for (std::size_t a = 0; a < k; ++a) {
    Rational residual = Rational(static_cast<unsigned long>(tallies[a].ones)) -
                        Rational(static_cast<unsigned long>(tallies[a].count)) * tallies[a].value;
    lp.objective[a] = -residual / m;
  }
  for (std::size_t a = 0; a + 1 < k; ++a) {
    std::vector<Rational> row(k, Rational(0));
    row[a + 1] = 1;
    row[a] = -1;
    const Rational gap = tallies[a + 1].value - tallies[a].value;
    lp.add(row, Relation::kLessEqual, gap);
    lp.add(row, Relation::kGreaterEqual, -gap);
  }
  auto sol = lp_solve(lp);
  if (sol.status != LPStatus::kOptimal) throw Error("smce: LP not optimal");
  return -sol.optimum;
}

inline Rational smce_empirical(const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw InvalidArgument("smce: at least one sample required");
  std::map<Rational, PredictionTally> by_value;
  for (const auto& s : samples) {
    if (s.prediction < 0 || s.prediction > 1)
      throw InvalidArgument("smce: prediction outside [0,1]");
    auto& t = by_value[s.prediction];
    t.value = s.prediction;
    ++t.count;
    if (s.label) ++t.ones;
  }
  std::vector<PredictionTally> tallies;
  for (auto& [v, t] : by_value) tallies.push_back(t);
  return smce_from_tallies(std::move(tallies));
}

// Constants behind the O(.) sample sizes. The defaults give batches of
// ceil(4/eps^2) samples and ceil(18 ln(1/delta)) batches. For dIMC the
// per-cell accuracy is eps * dimc_inner_scale; the worst-case parameter
// update of the proof corresponds to 1/(144 l^2), see README.
struct EstimatorConstants {
  Rational batch_size_scale = 4;
  double batch_count_scale = 18.0;
  Rational dimc_inner_scale = 1;
  bool dimc_inner_worst_case = false;
};

// lower = point - eps, upper = upper_weight * sqrt(upper_a) + sqrt(upper_b).
struct IntervalEstimate {
  Rational point;
  Rational lower;
  Rational upper_weight;
  Rational upper_a;
  Rational upper_b;
  std::string upper_decimal;
  Rational confidence;
  unsigned long long samples_used = 0;
  unsigned long long batch_size = 0;
  unsigned long long batch_count = 0;
  std::size_t short_cells = 0;  // cells that received fewer than a full set of batches

  // v <= w sqrt(a) + sqrt(b), decided exactly.
  bool upper_at_least(const Rational& v) const {
    if (v <= 0) return true;
    if (v * v <= upper_b) return true;  // v <= sqrt(b)
    // v > sqrt(b): need (v - sqrt b)^2 <= w^2 a, i.e. c <= 2 v sqrt(b)
    Rational c = v * v + upper_b - upper_weight * upper_weight * upper_a;
    if (c <= 0) return true;
    return c * c <= 4 * v * v * upper_b;
  }

  bool contains(const Rational& v) const { return lower <= v && upper_at_least(v); }

  double upper_value() const { return sqrt_sum_value(upper_weight, upper_a, upper_b); }
};

namespace detail {

inline unsigned long long ceil_rational(const Rational& q) {
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!mpz_fits_ulong_p(c.get_mpz_t())) throw InvalidArgument("sample size overflows");
  return mpz_get_ui(c.get_mpz_t());
}

inline unsigned long long batch_size(const Rational& eps, const EstimatorConstants& k) {
  return std::max(1ULL, ceil_rational(k.batch_size_scale / (eps * eps)));
}

inline unsigned long long batch_count(const Rational& inv_delta, const EstimatorConstants& k) {
  double c = std::ceil(k.batch_count_scale * std::log(to_double(inv_delta)));
  return c < 1 ? 1ULL : static_cast<unsigned long long>(c);
}

inline void require_unit_open(const Rational& v, const char* name) {
  if (!(v > 0) || !(v < 1))
    throw PreconditionViolation(std::string(name) + " must lie in (0, 1), got " + to_string(v));
}

inline Rational median(std::vector<Rational> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  if (v.size() % 2 == 1) return v[h];
  return (v[h - 1] + v[h]) / 2;
}

// Streams (point, label) pairs into batches of fixed size and keeps the smCE
// of every completed batch.
class BatchAccumulator {
 public:
  BatchAccumulator(const PredictorVec& f, unsigned long long batch_size,
                   unsigned long long batch_count)
      : f_(f), size_(batch_size), count_(batch_count), ones_(f.size()), seen_(f.size()) {}

  bool full() const { return values_.size() >= count_; }
  unsigned long long absorbed() const { return absorbed_; }

  void add(Index x, int label) {
    if (full()) return;
    ++seen_[x];
    if (label) ++ones_[x];
    ++absorbed_;
    if (++in_batch_ == size_) close_batch();
  }

  // Batch medians; a partial trailing batch is used only when no batch
  // completed.
  Rational estimate() {
    if (values_.empty() && in_batch_ > 0) close_batch();
    if (values_.empty()) return 0;
    return median(values_);
  }

 private:
  void close_batch() {
    std::map<Rational, PredictionTally> by_value;
    for (Index x = 0; x < f_.size(); ++x) {
      if (seen_[x] == 0) continue;
      auto& t = by_value[f_[x]];
      t.value = f_[x];
      t.count += seen_[x];
      t.ones += ones_[x];
    }
    std::vector<PredictionTally> tallies;
    for (auto& [v, t] : by_value) tallies.push_back(t);
    values_.push_back(smce_from_tallies(std::move(tallies)));
    std::fill(seen_.begin(), seen_.end(), 0ULL);
    std::fill(ones_.begin(), ones_.end(), 0ULL);
    in_batch_ = 0;
  }

  const PredictorVec& f_;
  unsigned long long size_, count_;
  std::vector<unsigned long long> ones_, seen_;
  unsigned long long in_batch_ = 0, absorbed_ = 0;
  std::vector<Rational> values_;
};

}  // namespace detail

// Median-of-batches smCE on conditional samples from D|S, reported as
// [mu - eps, 4 sqrt(mu + eps)] at confidence 1 - delta.
inline IntervalEstimate dce_interval(const Instance& inst, const Subgroup& s, const Rational& eps,
                                     const Rational& delta, std::uint64_t seed,
                                     const EstimatorConstants& k = {}) {
  require_valid(inst);
  detail::require_unit_open(eps, "eps");
  detail::require_unit_open(delta, "delta");
  if (s.empty()) throw InvalidArgument("dce_interval: empty subgroup");
  const auto bs = detail::batch_size(eps, k);
  const auto bc = detail::batch_count(1 / delta, k);

  std::vector<Rational> weights;
  for (Index x : s) weights.push_back(inst.marginal[x]);
  DiscreteSampler pick(weights);
  std::vector<BernoulliThreshold> coin;
  for (Index x : s) coin.push_back(BernoulliThreshold::of(inst.ground_truth[x]));

  detail::BatchAccumulator acc(inst.audited, bs, bc);
  for (unsigned long long b = 0; b < bc; ++b) {
    Rng rng(derive_seed(seed, b + 1));
    for (unsigned long long j = 0; j < bs; ++j) {
      std::size_t i = pick(rng);
      acc.add(s.members()[i], rng.bernoulli(coin[i]) ? 1 : 0);
    }
  }
  IntervalEstimate est;
  est.point = acc.estimate();
  est.lower = est.point - eps;
  est.upper_weight = 4;
  est.upper_a = est.point + eps;
  est.upper_b = 0;
  est.upper_decimal = sqrt_sum_decimal(est.upper_weight, est.upper_a, est.upper_b);
  est.confidence = 1 - delta;
  est.samples_used = bs * bc;
  est.batch_size = bs;
  est.batch_count = bc;
  return est;
}

// theta = sum_i p_i mu_i over the cells of J(C) from one stream of draws
// from D, reported as [theta - eps, 4 sqrt(l theta) + sqrt(eps)].
inline IntervalEstimate dimc_interval(const Instance& inst, const Rational& eps,
                                      const Rational& delta, std::uint64_t seed,
                                      const EstimatorConstants& k = {}) {
  require_valid(inst);
  detail::require_unit_open(eps, "eps");
  detail::require_unit_open(delta, "delta");
  const auto part = generated_partition(inst.groups, inst.n());
  const std::size_t ell = part.cells.size();
  Rational gamma = 1;
  for (const auto& c : part.cells) gamma = std::min(gamma, group_mass(inst.marginal, c));
  if (eps > gamma)
    throw PreconditionViolation("dimc_interval: eps must not exceed gamma = " + to_string(gamma) +
                                " (smallest cell mass)");
  const Rational ell_q(static_cast<unsigned long>(ell));
  const Rational inner = k.dimc_inner_worst_case ? Rational(eps / (144 * ell_q * ell_q))
                                                 : Rational(eps * k.dimc_inner_scale);
  const auto bs = detail::batch_size(inner, k);
  const auto bc = detail::batch_count(ell_q / delta, k);
  const double log_term = std::log(to_double(ell_q / delta));
  const double w = static_cast<double>(bs) * static_cast<double>(bc);
  const auto m = static_cast<unsigned long long>(std::ceil(2.0 * (w + log_term) / to_double(gamma)));

  std::vector<std::size_t> cell_of(inst.n());
  for (std::size_t c = 0; c < ell; ++c)
    for (Index x : part.cells[c]) cell_of[x] = c;
  DiscreteSampler pick(inst.marginal.probs);
  std::vector<BernoulliThreshold> coin;
  for (const auto& p : inst.ground_truth.values) coin.push_back(BernoulliThreshold::of(p));
  std::vector<detail::BatchAccumulator> acc;
  acc.reserve(ell);
  for (std::size_t c = 0; c < ell; ++c) acc.emplace_back(inst.audited, bs, bc);
  std::vector<unsigned long long> hits(ell, 0);

  Rng rng(seed);
  for (unsigned long long j = 0; j < m; ++j) {
    Index x = pick(rng);
    int y = rng.bernoulli(coin[x]) ? 1 : 0;
    std::size_t c = cell_of[x];
    ++hits[c];
    acc[c].add(x, y);
  }

  IntervalEstimate est;
  est.point = 0;
  const Rational m_q(static_cast<unsigned long>(m));
  for (std::size_t c = 0; c < ell; ++c) {
    if (!acc[c].full()) ++est.short_cells;
    Rational p_hat = Rational(static_cast<unsigned long>(hits[c])) / m_q;
    est.point += p_hat * acc[c].estimate();
  }
  est.lower = est.point - eps;
  est.upper_weight = 4;
  est.upper_a = ell_q * est.point;
  est.upper_b = eps;
  est.upper_decimal = sqrt_sum_decimal(est.upper_weight, est.upper_a, est.upper_b);
  est.confidence = 1 - delta;
  est.samples_used = m;
  est.batch_size = bs;
  est.batch_count = bc;
  return est;
}

}  // namespace mcal
