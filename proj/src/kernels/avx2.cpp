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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <vector>

#include "dressed/kernels/kernels.hpp"

namespace dressed::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Two complex products packed in one register: (a0*b0, a1*b1).
inline __m256d cmul2(__m256d a, __m256d b) {
  const __m256d a_re = _mm256_movedup_pd(a);
  const __m256d a_im = _mm256_permute_pd(a, 0xF);
  const __m256d b_sw = _mm256_permute_pd(b, 0x5);
  return _mm256_fmaddsub_pd(a_re, b, _mm256_mul_pd(a_im, b_sw));
}

void complex_matvec(const cplx* m, const cplx* x, cplx* y, std::size_t n) {
  const auto* xd = reinterpret_cast<const double*>(x);
  const std::size_t pairs = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const auto* row = reinterpret_cast<const double*>(m + i * n);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t p = 0; p < pairs; ++p) {
      const __m256d a = _mm256_loadu_pd(row + 4 * p);
      const __m256d b = _mm256_loadu_pd(xd + 4 * p);
      acc = _mm256_add_pd(acc, cmul2(a, b));
    }
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d sum = _mm_add_pd(lo, hi);
    alignas(16) double out[2];
    _mm_store_pd(out, sum);
    cplx z{out[0], out[1]};
    if (n % 2 != 0) z += m[i * n + n - 1] * x[n - 1];
    y[i] = z;
  }
}

void cosine_comb(const double* amp, const double* omega, const double* phase,
                 std::size_t bins, double t0, double dt, double* out, std::size_t samples) {
  const std::size_t vec_bins = bins / 4 * 4;
  std::vector<double> c(bins), s(bins), rc(bins), rs(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    rc[k] = std::cos(omega[k] * dt);
    rs[k] = std::sin(omega[k] * dt);
  }
  for (std::size_t n = 0; n < samples; ++n) {
    if (n % kReanchorInterval == 0) {
      const double t = t0 + static_cast<double>(n) * dt;
      for (std::size_t k = 0; k < bins; ++k) {
        c[k] = std::cos(omega[k] * t + phase[k]);
        s[k] = std::sin(omega[k] * t + phase[k]);
      }
    }
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < vec_bins; k += 4) {
      const __m256d cv = _mm256_loadu_pd(&c[k]);
      const __m256d sv = _mm256_loadu_pd(&s[k]);
      const __m256d rcv = _mm256_loadu_pd(&rc[k]);
      const __m256d rsv = _mm256_loadu_pd(&rs[k]);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(amp + k), cv, acc);
      const __m256d cn = _mm256_fmsub_pd(cv, rcv, _mm256_mul_pd(sv, rsv));
      const __m256d sn = _mm256_fmadd_pd(sv, rcv, _mm256_mul_pd(cv, rsv));
      _mm256_storeu_pd(&c[k], cn);
      _mm256_storeu_pd(&s[k], sn);
    }
    double total = hsum(acc);
    for (std::size_t k = vec_bins; k < bins; ++k) {
      total += amp[k] * c[k];
      const double cn = c[k] * rc[k] - s[k] * rs[k];
      s[k] = s[k] * rc[k] + c[k] * rs[k];
      c[k] = cn;
    }
    out[n] = total;
  }
}

void accumulate_power(const cplx* spectrum, double* acc, std::size_t n, double scale) {
  const auto* sd = reinterpret_cast<const double*>(spectrum);
  const __m256d sc = _mm256_set1_pd(scale);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d a = _mm256_loadu_pd(sd + 2 * k);      // re0 im0 re1 im1
    const __m256d b = _mm256_loadu_pd(sd + 2 * k + 4);  // re2 im2 re3 im3
    const __m256d sums = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    // hadd interleaves as (p0, p2, p1, p3); restore bin order.
    const __m256d ordered = _mm256_permute4x64_pd(sums, 0xD8);
    _mm256_storeu_pd(acc + k, _mm256_fmadd_pd(sc, ordered, _mm256_loadu_pd(acc + k)));
  }
  for (; k < n; ++k) acc[k] += scale * std::norm(spectrum[k]);
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{Isa::kAvx2, "avx2", &complex_matvec, &cosine_comb,
                             &accumulate_power};
  return t;
}

}  // namespace dressed::kernels::avx2
