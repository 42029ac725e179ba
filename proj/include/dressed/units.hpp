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

// Internal units: time in microseconds, angular frequency in rad/us, rates in
// 1/us, two-sided PSD of angular-frequency noise in rad^2/us. Laboratory
// units are converted once at the configuration boundary.

#include "dressed/algebra.hpp"

namespace dressed::units {

/// Ordinary frequency in MHz -> angular frequency in rad/us.
constexpr double angular_from_mhz(double f_mhz) { return kTwoPi * f_mhz; }
constexpr double mhz_from_angular(double omega) { return omega / kTwoPi; }
constexpr double us_from_ns(double t_ns) { return t_ns * 1e-3; }
/// PSD of angular-frequency noise: rad^2/s -> rad^2/us.
constexpr double rad2_per_us_from_rad2_per_s(double s) { return s * 1e-6; }

}  // namespace dressed::units
