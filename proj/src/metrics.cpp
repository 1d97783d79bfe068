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

#include "polarsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polarsim/stokes.hpp"

namespace polarsim {

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

namespace {

void squared_diff(const Plane& a, const Plane& b, std::vector<double>& out) {
  if (!a.same_shape(b)) throw StructuralError("metric inputs have different dimensions");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    out.push_back(d * d);
  }
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

}  // namespace

double rmse(const StokesImage& a, const StokesImage& b, StokesChannels channels) {
  a.check();
  b.check();
  std::vector<double> sq;
  if (channels == StokesChannels::all) squared_diff(a.s0, b.s0, sq);
  squared_diff(a.s1, b.s1, sq);
  squared_diff(a.s2, b.s2, sq);
  return std::sqrt(mean_of(sq));
}

double psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Plane& a, const Plane& b, double peak) {
  std::vector<double> sq;
  squared_diff(a, b, sq);
  return psnr_from_mse(mean_of(sq), peak);
}

double psnr(const RgbImage& a, const RgbImage& b, double peak) {
  a.check();
  b.check();
  std::vector<double> sq;
  for (int c = 0; c < 3; ++c) squared_diff(a.channel(c), b.channel(c), sq);
  return psnr_from_mse(mean_of(sq), peak);
}

double dolp_psnr(const StokesImage& estimate, const StokesImage& truth) {
  Plane de = dolp(estimate);
  Plane dt = dolp(truth);
  for (double& v : de.values()) v = std::clamp(v, 0.0, 1.0);
  for (double& v : dt.values()) v = std::clamp(v, 0.0, 1.0);
  return psnr(de, dt, 1.0);
}

double aolp_difference(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 180.0);
  return std::min(d, 180.0 - d);
}

double aolp_error(const StokesImage& estimate, const StokesImage& truth, std::optional<double> dolp_gate) {
  estimate.check();
  truth.check();
  if (!estimate.s0.same_shape(truth.s0)) throw StructuralError("metric inputs have different dimensions");
  const Plane ae = aolp(estimate);
  const Plane at = aolp(truth);
  std::vector<double> diffs;
  diffs.reserve(ae.size());
  for (std::size_t i = 0; i < ae.size(); ++i) {
    if (dolp_gate && dolp_value(truth.s0[i], truth.s1[i], truth.s2[i]) <= *dolp_gate) continue;
    diffs.push_back(aolp_difference(ae[i], at[i]));
  }
  return mean_of(diffs);
}

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(size));
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace {

// Valid-mode separable filtering with the SSIM window.
Plane filter_valid(const Plane& in, const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int oh = in.height() - k + 1, ow = in.width() - k + 1;
  Plane tmp(in.height(), ow);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[static_cast<std::size_t>(i)] * in.at(y, x + i);
      tmp.at(y, x) = s;
    }
  Plane out(oh, ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[static_cast<std::size_t>(i)] * tmp.at(y + i, x);
      out.at(y, x) = s;
    }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace

double ssim(const Plane& a, const Plane& b, const SsimParams& p) {
  if (!a.same_shape(b)) throw StructuralError("SSIM inputs have different dimensions");
  if (a.height() < p.window || a.width() < p.window) throw StructuralError("image smaller than SSIM window");
  const auto taps = gaussian_taps(p.window, p.sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

  const Plane mu_a = filter_valid(a, taps);
  const Plane mu_b = filter_valid(b, taps);
  const Plane aa = filter_valid(product(a, a), taps);
  const Plane bb = filter_valid(product(b, b), taps);
  const Plane ab = filter_valid(product(a, b), taps);

  std::vector<double> map(mu_a.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = aa[i] - ma * ma, vb = bb[i] - mb * mb, cov = ab[i] - ma * mb;
    map[i] = ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return mean_of(map);
}

double ssim(const RgbImage& a, const RgbImage& b, const SsimParams& params) {
  return ssim(rgb_to_gray(a), rgb_to_gray(b), params);
}

}  // namespace polarsim
