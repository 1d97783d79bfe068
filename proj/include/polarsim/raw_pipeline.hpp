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

#pragma once

#include "polarsim/image.hpp"
#include "polarsim/sensor.hpp"

namespace polarsim {

struct DemosaicOptions {
  /// Range sigma of the luminance-guided second pass, normalized units.
  double range_sigma = 0.1;
};

struct SparseDemosaic {
  RgbImage rgb;
  FourAngleImage angles;  // zero outside the mask
  PixelMask mask;
};

/// Splits a sparse-sensor raw frame into full-resolution RGB, the zero-filled
/// four-angle image and the polarization mask.
///
/// Each color plane is reconstructed in two passes over the same-color samples
/// of a 5x5 neighborhood (reflect-101 borders), polarization sites counting as
/// missing for every color:
///   1. inverse-distance-squared average, w = 1 / d^2;
///   2. the same samples re-weighted by exp(-(Y(p) - Y(q))^2 / 2 sigma^2),
///      where Y is the BT.601 luminance of pass 1. Samples across a luminance
///      edge lose their weight.
/// Sampled sites keep their raw value.
SparseDemosaic demosaic_sparse(const RawFrame& raw, const DemosaicOptions& opts = {});

struct BinnedFrame {
  RgbImage rgb;           // (M/2) x (N/2), t/2 scaled
  FourAngleImage angles;  // (M/2) x (N/2), grayscale, dense
};

/// Averages each 2x2 same-color polarizer cell into one unpolarized sample,
/// then fills the cell-level Bayer mosaic bilinearly. The four-angle output
/// is the per-angle cell samples, demosaiced the same way and projected to
/// grayscale with `gray`.
BinnedFrame bin_conventional(const RawFrame& raw, const GrayWeights& gray = {});

/// Bilinear upsampling by an integer factor (half-pixel centers, edge clamp).
Plane upsample_bilinear(const Plane& in, int factor);
RgbImage upsample_bilinear(const RgbImage& in, int factor);
StokesImage upsample_bilinear(const StokesImage& in, int factor);

/// Box average of factor x factor blocks.
Plane downsample_box(const Plane& in, int factor);

/// Stokes of each 2x2 polarization cluster of a sparse frame, written to all
/// four cluster pixels; zero elsewhere. The returned mask marks the clusters.
struct SparseStokes {
  StokesImage stokes;
  PixelMask mask;
};
SparseStokes cluster_stokes(const FourAngleImage& sparse_angles, const SensorLayout& layout);

}  // namespace polarsim
