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

#include <cstdlib>
#include <string_view>

#include "dressed/kernels/kernels.hpp"

#if defined(DRESSED_HAVE_AVX2)
namespace dressed::kernels::avx2 {
const KernelTable& table();
}
#endif

namespace dressed::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(DRESSED_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* forced = std::getenv("DRESSED_KERNELS");
  if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(DRESSED_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2::table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace dressed::kernels
