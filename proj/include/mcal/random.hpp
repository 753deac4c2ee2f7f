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
#include <random>
#include <vector>

#include "mcal/rational.hpp"

namespace mcal {

// Seeds are expanded with SplitMix64; draws come from std::mt19937_64, whose
// output sequence is fixed by the C++ standard. Together they give
// bit-identical streams across platforms and implementations.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for independent sub-stream `stream` of `master` (per batch, per trial).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master;
  std::uint64_t a = splitmix64(state);
  state = a ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(state);
}

// Threshold T with P(U < T) = T / 2^64 for U uniform on 64 bits; p is rounded
// up to the next multiple of 2^-64. `always` covers p == 1.
static_assert(sizeof(unsigned long) == 8, "mpz_get_ui must return 64 bits");

struct BernoulliThreshold {
  std::uint64_t threshold = 0;
  bool always = false;

  static BernoulliThreshold of(const Rational& p) {
    BernoulliThreshold t;
    if (p >= 1) {
      t.always = true;
      return t;
    }
    if (p <= 0) return t;
    mpz_class two64 = mpz_class(1) << 64;
    mpz_class scaled = p.get_num() * two64;
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), scaled.get_mpz_t(), p.get_den_mpz_t());
    t.threshold = mpz_get_ui(q.get_mpz_t());
    return t;
  }
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(derive_seed(seed, 0)) {}

  std::uint64_t next() { return engine_(); }

  bool bernoulli(const BernoulliThreshold& t) { return t.always || next() < t.threshold; }

  // Uniform on (0, 1] with 53-bit resolution, exact as a rational.
  Rational uniform_rational() {
    std::uint64_t k = (next() >> 11) + 1;
    Rational r(mpz_class(static_cast<unsigned long>(k)), mpz_class(1) << 53);
    r.canonicalize();
    return r;
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) {
    std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
    return dist(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

// Categorical sampler over a rational probability vector using 64-bit
// cumulative thresholds computed exactly.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<Rational>& probs) {
    Rational total = 0;
    for (const auto& p : probs) total += p;
    Rational cum = 0;
    cut_.reserve(probs.size());
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      Rational frac = cum / total;
      auto t = BernoulliThreshold::of(frac);
      cut_.push_back(t.always ? ~0ULL : t.threshold);
    }
    cut_.push_back(~0ULL);
  }

  std::size_t operator()(Rng& rng) const {
    std::uint64_t u = rng.next();
    auto it = std::upper_bound(cut_.begin(), cut_.end() - 1, u);
    return static_cast<std::size_t>(it - cut_.begin());
  }

 private:
  std::vector<std::uint64_t> cut_;
};

}  // namespace mcal
