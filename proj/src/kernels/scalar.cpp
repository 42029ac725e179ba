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

#include <cmath>
#include <vector>

#include "dressed/kernels/kernels.hpp"

namespace dressed::kernels {

namespace {

void complex_matvec_scalar(const cplx* m, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double re = 0.0;
    double im = 0.0;
    const cplx* row = m + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double ar = row[j].real(), ai = row[j].imag();
      const double xr = x[j].real(), xi = x[j].imag();
      re += ar * xr - ai * xi;
      im += ar * xi + ai * xr;
    }
    y[i] = cplx{re, im};
  }
}

void cosine_comb_scalar(const double* amp, const double* omega, const double* phase,
                        std::size_t bins, double t0, double dt, double* out,
                        std::size_t samples) {
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
    double acc = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      acc += amp[k] * c[k];
      const double cn = c[k] * rc[k] - s[k] * rs[k];
      s[k] = s[k] * rc[k] + c[k] * rs[k];
      c[k] = cn;
    }
    out[n] = acc;
  }
}

void accumulate_power_scalar(const cplx* spectrum, double* acc, std::size_t n, double scale) {
  for (std::size_t k = 0; k < n; ++k) acc[k] += scale * std::norm(spectrum[k]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar, "scalar", &complex_matvec_scalar,
                                 &cosine_comb_scalar, &accumulate_power_scalar};
  return table;
}

}  // namespace dressed::kernels
