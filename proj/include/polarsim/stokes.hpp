// Copyright 2026 The polarsim Authors
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

// Linear Stokes algebra.
//
// Forward model used throughout the project:
//
//     l(theta) = s0 + s1 cos(2 theta) + s2 sin(2 theta)
//
// which makes the four-angle to Stokes transform
//
//     s0 = (l0 + l45 + l90 + l135) / 4
//     s1 = (l0 - l90) / 2
//     s2 = (l45 - l135) / 2
//
// its exact left inverse. A capture through a polarizer of transmittance t
// therefore reports Stokes values scaled by t/2 relative to the scene; DoLP and
// AoLP are invariant under that scale.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "polarsim/image.hpp"

namespace polarsim {

inline constexpr double kPhysicalEps = 1e-6;
inline constexpr double kDivisionEps = 1e-6;
inline constexpr double kDolpMax = 10.0;

/// Polarizer angles in the order l0, l45, l90, l135.
inline constexpr std::array<int, 4> kAnglesDeg = {0, 45, 90, 135};

template <typename T>
struct StokesPixel {
  T s0, s1, s2;
};

template <typename T>
struct AnglePixel {
  T l0, l45, l90, l135;
};

template <typename T>
constexpr StokesPixel<T> stokes_from_angles(const AnglePixel<T>& l) {
  return {(l.l0 + l.l45 + l.l90 + l.l135) / T(4), (l.l0 - l.l90) / T(2), (l.l45 - l.l135) / T(2)};
}

template <typename T>
constexpr AnglePixel<T> angles_from_stokes(const StokesPixel<T>& s) {
  // cos/sin of 2*theta are exactly 0 or +-1 at the four angles.
  return {s.s0 + s.s1, s.s0 + s.s2, s.s0 - s.s1, s.s0 - s.s2};
}

/// Intensity at an arbitrary polarizer angle (degrees).
inline double intensity_at(double s0, double s1, double s2, double theta_deg) {
  const double two_theta = 2.0 * theta_deg * M_PI / 180.0;
  return s0 + s1 * std::cos(two_theta) + s2 * std::sin(two_theta);
}

inline double dolp_value(double s0, double s1, double s2) {
  const double v = std::sqrt(s1 * s1 + s2 * s2) / std::max(s0, kDivisionEps);
  return std::clamp(v, 0.0, kDolpMax);
}

/// Half of atan2(s2, s1) in degrees, folded into [0, 180).
inline double aolp_value(double s1, double s2) {
  if (s1 == 0.0 && s2 == 0.0) return 0.0;
  double deg = 0.5 * std::atan2(s2, s1) * 180.0 / M_PI;
  if (deg < 0.0) deg += 180.0;
  if (deg >= 180.0) deg -= 180.0;
  return deg;
}

/// Grayscale projection weights (matrix B). BT.601 luma by default.
struct GrayWeights {
  double r = 0.299;
  double g = 0.587;
  double b = 0.114;
};

StokesImage stokes_from_four_angles(const FourAngleImage& l);

/// Throws ValidationError if any pixel has DoLP above 1 + eps, unless
/// allow_invalid is set.
FourAngleImage four_angles_from_stokes(const StokesImage& s, bool allow_invalid = false);

GrayImage dolp(const StokesImage& s);

/// Degrees in [0, 180).
GrayImage aolp(const StokesImage& s);

GrayImage rgb_to_gray(const RgbImage& g, const GrayWeights& w = {});

/// gain * B * rgb. Throws ParameterError for gain <= 0.
GrayImage s0_from_rgb(const RgbImage& g, double gain, const GrayWeights& w = {});

struct PhysicalReport {
  std::size_t violations = 0;
  double max_excess = 0.0;
};

/// Counts pixels with sqrt(s1^2 + s2^2) > s0 + eps.
PhysicalReport validate_physical(const StokesImage& s, double eps = kPhysicalEps);

/// Multiplies all three planes by k.
StokesImage scaled(const StokesImage& s, double k);

}  // namespace polarsim
