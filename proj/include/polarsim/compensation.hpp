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

// Classical sparse-to-dense fill of Stokes planes.
//
// Every interpolator treats each Stokes plane independently and returns the
// input value unchanged at mask sites.

#pragma once

#include "polarsim/image.hpp"

namespace polarsim {

/// Value of the nearest mask pixel (Euclidean; ties go to the smaller row,
/// then the smaller column). Throws ParameterError for an empty mask.
StokesImage interp_nearest(const StokesImage& sparse, const PixelMask& mask);
Plane interp_nearest(const Plane& sparse, const PixelMask& mask);

/// Separable bilinear interpolation when the mask is a rectilinear lattice
/// (mask == rows x columns); values beyond the outermost sites are clamped.
/// Any other mask falls back to inverse-distance-squared weighting of the
/// four nearest sites.
StokesImage interp_bilinear_scattered(const StokesImage& sparse, const PixelMask& mask);
Plane interp_bilinear_scattered(const Plane& sparse, const PixelMask& mask);

/// True if the set pixels of `mask` are exactly a product of row and column sets.
bool is_rectilinear_lattice(const PixelMask& mask);

struct BilateralParams {
  double sigma_spatial = 4.0;
  double sigma_range = 0.1;
};

/// Joint bilateral scattered interpolation guided by an RGB image:
///
///   out(p) = sum_q w(p,q) v(q) / sum_q w(p,q),   q in mask, |q - p|_inf <= ceil(3 sigma_s)
///   w(p,q) = exp(-|p-q|^2 / 2 sigma_s^2) * exp(-|G(p)-G(q)|^2 / 2 sigma_r^2)
///
/// Pixels with no mask site in their window take the nearest site's value.
StokesImage joint_bilateral(const StokesImage& sparse, const PixelMask& mask, const RgbImage& guide,
                            const BilateralParams& params);

/// sigma_s = tile_side / 2, sigma_r = 0.1.
BilateralParams default_bilateral_params(int tile_side);

}  // namespace polarsim
