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

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dressed {

/// Seedable, splittable random stream. A stream is identified by a master
/// seed plus a path of indices (e.g. {trajectory}), so draws depend only on
/// that identity and never on execution order.
///
/// The engine is std::mt19937_64 (output fully specified by the standard);
/// conversions to real variates are done here so results do not depend on the
/// standard library's distribution implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, both variates used).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dressed
