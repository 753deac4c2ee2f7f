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

#include <optional>
#include <vector>

#include "mcal/budget.hpp"
#include "mcal/errors.hpp"

namespace mcal {

// A partition of {0..k-1}; classes are ordered by their smallest element and
// each class is sorted.
struct SetPartition {
  std::vector<std::vector<std::size_t>> classes;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;
};

// Single-pass generator over all set partitions of {0..k-1} in restricted
// growth string order. Each partition is yielded exactly once; Bell(k) total.
class PartitionStream {
 public:
  PartitionStream(std::size_t k, const Budget& budget = Budget::defaults(),
                  bool override_ceiling = false)
      : k_(k), rgs_(k, 0), max_(k, 0) {
    if (k == 0) throw InvalidArgument("partitions: k must be >= 1");
    if (!override_ceiling && k > budget.max_partition_size) {
      throw BudgetExceeded("partitions: k=" + std::to_string(k) +
                               " exceeds ceiling " +
                               std::to_string(budget.max_partition_size),
                           bell_number(k));
    }
  }

  // Restricted growth string of the current partition: element i belongs to
  // class rgs[i]. Valid until the next call to advance().
  const std::vector<std::size_t>& rgs() const { return rgs_; }
  std::size_t class_count() const { return k_ == 0 ? 0 : max_.back() + 1; }
  bool done() const { return done_; }

  // Moves to the next partition; returns false once exhausted.
  bool advance() {
    if (done_) return false;
    for (std::size_t i = k_; i-- > 1;) {
      if (rgs_[i] <= max_[i - 1]) {
        ++rgs_[i];
        max_[i] = std::max(max_[i - 1], rgs_[i]);
        for (std::size_t j = i + 1; j < k_; ++j) {
          rgs_[j] = 0;
          max_[j] = max_[i];
        }
        return true;
      }
    }
    done_ = true;
    return false;
  }

  SetPartition current() const {
    SetPartition p;
    p.classes.resize(class_count());
    for (std::size_t i = 0; i < k_; ++i) p.classes[rgs_[i]].push_back(i);
    return p;
  }

  std::optional<SetPartition> next() {
    if (done_) return std::nullopt;
    if (!started_) {
      started_ = true;
      return current();
    }
    if (!advance()) return std::nullopt;
    return current();
  }

 private:
  std::size_t k_;
  std::vector<std::size_t> rgs_;
  std::vector<std::size_t> max_;  // max_[i] = max(rgs_[0..i])
  bool started_ = false;
  bool done_ = false;
};

inline std::vector<SetPartition> partitions(std::size_t k,
                                            const Budget& budget = Budget::defaults(),
                                            bool override_ceiling = false) {
  PartitionStream stream(k, budget, override_ceiling);
  std::vector<SetPartition> out;
  while (auto p = stream.next()) out.push_back(std::move(*p));
  return out;
}

}  // namespace mcal
