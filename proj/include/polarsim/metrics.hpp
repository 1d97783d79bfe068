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

#include <optional>
#include <vector>

#include "polarsim/image.hpp"

namespace polarsim {

enum class StokesChannels { all, s12_only };

/// Root mean square difference over the selected channels and all pixels.
double rmse(const StokesImage& a, const StokesImage& b, StokesChannels channels = StokesChannels::all);

/// 10 log10(peak^2 / MSE); +infinity when the inputs are identical.
double psnr(const Plane& a, const Plane& b, double peak = 1.0);
double psnr(const RgbImage& a, const RgbImage& b, double peak = 1.0);
double psnr_from_mse(double mse, double peak = 1.0);

/// PSNR between DoLP maps, each clamped to [0, 1].
double dolp_psnr(const StokesImage& estimate, const StokesImage& truth);

/// Mean absolute AoLP difference in degrees, folded by the 180 degree period
/// into [0, 90]. With a gate, only pixels whose ground-truth DoLP exceeds it
/// count; returns 0 when no pixel passes.
double aolp_error(const StokesImage& estimate, const StokesImage& truth, std::optional<double> dolp_gate = {});

/// Folded AoLP difference of two angles in degrees.
double aolp_difference(double a_deg, double b_deg);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over valid window positions of the grayscale projections.
/// Throws StructuralError when an image is smaller than the window.
double ssim(const RgbImage& a, const RgbImage& b, const SsimParams& params = {});
double ssim(const Plane& a, const Plane& b, const SsimParams& params = {});

/// Normalized 1-D Gaussian taps of the SSIM window.
std::vector<double> gaussian_taps(int size, double sigma);

/// Fixed-order pairwise sum.
double pairwise_sum(const double* v, std::size_t n);

}  // namespace polarsim
