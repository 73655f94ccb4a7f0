// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

namespace dgff {

inline double normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

/// Upper tail P(N(0,1) > t), via erfc (continued-fraction accuracy in libm).
inline double normal_upper_tail(double t) {
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

}  // namespace dgff
