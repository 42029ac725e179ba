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

// Data-parallel inner loops with a scalar reference implementation and
// ISA-specific variants selected once at runtime. Every variant must agree
// with the scalar table to round-off (see tests/kernels_test.cpp).
//
// Set DRESSED_KERNELS=scalar in the environment to force the reference path.

#include <complex>
#include <cstddef>
#include <optional>
#include <string_view>

namespace dressed::kernels {

using cplx = std::complex<double>;

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  /// y = m * x for a row-major n x n complex matrix.
  void (*complex_matvec)(const cplx* m, const cplx* x, cplx* y, std::size_t n);

  /// out[s] = sum_k amp[k] * cos(omega[k] * (t0 + s*dt) + phase[k]) for
  /// s in [0, samples). Phasors advance by recurrence and are re-anchored to
  /// exact cos/sin every kReanchorInterval samples.
  void (*cosine_comb)(const double* amp, const double* omega, const double* phase,
                      std::size_t bins, double t0, double dt, double* out,
                      std::size_t samples);

  /// acc[k] += scale * |spectrum[k]|^2.
  void (*accumulate_power)(const cplx* spectrum, double* acc, std::size_t n, double scale);
};

inline constexpr std::size_t kReanchorInterval = 256;

const KernelTable& scalar_table();
/// Null when the binary was built without the variant or the CPU lacks it.
const KernelTable* avx2_table();
/// The table chosen for this process (widest supported, unless overridden).
const KernelTable& active();

std::string_view isa_name(Isa isa);

}  // namespace dressed::kernels
