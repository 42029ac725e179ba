// Copyright 2026 The dressed-relax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dressed/rng.hpp"

#include <cmath>
#include <vector>

#include "dressed/algebra.hpp"

namespace dressed {

RandomStream::RandomStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffULL));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  for (std::uint64_t p : path) push(p);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

}  // namespace dressed
