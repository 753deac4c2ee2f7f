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

#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

namespace mcal {

// Bell number via the Bell triangle. Saturates at ULLONG_MAX past B(25).
inline unsigned long long bell_number(std::size_t k) {
  constexpr auto kMax = std::numeric_limits<unsigned long long>::max();
  if (k == 0) return 1;
  std::vector<unsigned long long> row{1};
  for (std::size_t i = 1; i < k; ++i) {
    std::vector<unsigned long long> next{row.back()};
    for (auto v : row) {
      unsigned long long s = next.back() > kMax - v ? kMax : next.back() + v;
      next.push_back(s);
    }
    row = std::move(next);
  }
  return row.back();
}

// Enumeration ceilings. MCAL_AUDIT_BUDGET raises them: its value becomes the
// join-work limit, and the partition ceiling grows to the largest k with
// B(k) within that value.
struct Budget {
  std::size_t max_partition_size = 12;  // B(12) = 4,213,597
  unsigned long long max_join_work = 50'000'000ULL;
  std::size_t max_closure_groups = 20;

  static Budget defaults() { return Budget{}; }

  static Budget from_env() {
    Budget b;
    if (const char* env = std::getenv("MCAL_AUDIT_BUDGET")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) b = with_limit(v);
    }
    return b;
  }

  static Budget with_limit(unsigned long long limit) {
    Budget b;
    b.max_join_work = limit;
    std::size_t k = b.max_partition_size;
    while (k < 25 && bell_number(k + 1) <= limit) ++k;
    b.max_partition_size = k;
    if (limit >= (1ULL << 24)) b.max_closure_groups = 24;
    return b;
  }

  static Budget unlimited() {
    Budget b;
    b.max_partition_size = 25;
    b.max_join_work = std::numeric_limits<unsigned long long>::max();
    b.max_closure_groups = 30;
    return b;
  }
};

}  // namespace mcal
