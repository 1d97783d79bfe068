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

#include "polarsim/stokes.hpp"

#include <algorithm>
#include <string>

namespace polarsim {

void require_same_shape(std::initializer_list<const Plane*> planes, const char* what) {
  const Plane* first = *planes.begin();
  for (const Plane* p : planes) {
    if (!p->same_shape(*first)) {
      throw StructuralError(std::string(what) + ": plane dimensions disagree");
    }
  }
}

Plane& FourAngleImage::angle(int index) {
  switch (index) {
    case 0: return l0;
    case 1: return l45;
    case 2: return l90;
    case 3: return l135;
    default: throw ParameterError("angle index must be 0..3");
  }
}

const Plane& FourAngleImage::angle(int index) const {
  return const_cast<FourAngleImage*>(this)->angle(index);
}

std::size_t PixelMask::count() const {
  return static_cast<std::size_t>(std::count(m_.begin(), m_.end(), std::uint8_t{1}));
}

StokesImage stokes_from_four_angles(const FourAngleImage& l) {
  l.check();
  StokesImage s(l.height(), l.width());
  for (std::size_t i = 0; i < l.l0.size(); ++i) {
    const auto p = stokes_from_angles<double>({l.l0[i], l.l45[i], l.l90[i], l.l135[i]});
    s.s0[i] = p.s0;
    s.s1[i] = p.s1;
    s.s2[i] = p.s2;
  }
  return s;
}

FourAngleImage four_angles_from_stokes(const StokesImage& s, bool allow_invalid) {
  s.check();
  if (!allow_invalid) {
    const auto report = validate_physical(s);
    if (report.violations > 0) {
      throw ValidationError("Stokes input has " + std::to_string(report.violations) +
                            " pixels with DoLP above 1 (max excess " + std::to_string(report.max_excess) + ")");
    }
  }
  FourAngleImage l(s.height(), s.width());
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    const auto a = angles_from_stokes<double>({s.s0[i], s.s1[i], s.s2[i]});
    l.l0[i] = a.l0;
    l.l45[i] = a.l45;
    l.l90[i] = a.l90;
    l.l135[i] = a.l135;
  }
  return l;
}

GrayImage dolp(const StokesImage& s) {
  s.check();
  GrayImage out(s.height(), s.width());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dolp_value(s.s0[i], s.s1[i], s.s2[i]);
  return out;
}

GrayImage aolp(const StokesImage& s) {
  s.check();
  GrayImage out(s.height(), s.width());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = aolp_value(s.s1[i], s.s2[i]);
  return out;
}

GrayImage rgb_to_gray(const RgbImage& g, const GrayWeights& w) {
  g.check();
  GrayImage y(g.height(), g.width());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = w.r * g.r[i] + w.g * g.g[i] + w.b * g.b[i];
  return y;
}

GrayImage s0_from_rgb(const RgbImage& g, double gain, const GrayWeights& w) {
  if (!(gain > 0.0)) throw ParameterError("gain must be positive");
  GrayImage y = rgb_to_gray(g, w);
  for (double& v : y.values()) v *= gain;
  return y;
}

PhysicalReport validate_physical(const StokesImage& s, double eps) {
  s.check();
  PhysicalReport report;
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    const double excess = std::sqrt(s.s1[i] * s.s1[i] + s.s2[i] * s.s2[i]) - s.s0[i];
    if (excess > eps) {
      ++report.violations;
      report.max_excess = std::max(report.max_excess, excess);
    }
  }
  return report;
}

StokesImage scaled(const StokesImage& s, double k) {
  StokesImage out = s;
  for (Plane* p : {&out.s0, &out.s1, &out.s2}) {
    for (double& v : p->values()) v *= k;
  }
  return out;
}

}  // namespace polarsim
