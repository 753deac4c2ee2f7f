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

// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is the number of failing criteria (0 when all pass).

#include <cstdio>
#include <iostream>

#include "mcal/mcal.hpp"

int main() {
  auto suite = mcal::acceptance_suite();
  int failed = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    auto r = mcal::run_criterion(suite[i], static_cast<int>(i + 1));
    std::printf("%s  %2d  %-78s %8.2fs  %s\n", r.pass ? "PASS" : "FAIL", r.id, r.claim.c_str(),
                r.seconds, r.detail.c_str());
    for (const auto& line : r.log) std::printf("        log: %s\n", line.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  std::printf("%zu criteria, %d failed\n", suite.size(), failed);
  return failed;
}
