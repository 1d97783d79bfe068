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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "polarsim/metrics.hpp"
#include "polarsim/stokes.hpp"
#include "test_support.hpp"

using namespace polarsim;
using polarsim::testing::random_stokes;

namespace {

StokesImage uniform_stokes(int h, int w, double s0, double s1, double s2) {
  StokesImage s(h, w);
  s.s0 = Plane(h, w, s0);
  s.s1 = Plane(h, w, s1);
  s.s2 = Plane(h, w, s2);
  return s;
}

double add_all(StokesImage& s, double d) {
  for (Plane* p : {&s.s0, &s.s1, &s.s2})
    for (double& v : p->values()) v += d;
  return d;
}

}  // namespace

TEST_CASE("rmse") {
  Rng rng(1);
  const StokesImage a = random_stokes(5, 6, rng);
  CHECK(rmse(a, a) == 0.0);
  StokesImage b = a;
  add_all(b, 0.125);
  CHECK(rmse(a, b) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(rmse(a, b, StokesChannels::s12_only) == doctest::Approx(0.125).epsilon(1e-14));

  StokesImage x(1, 2), y(1, 2);
  y.s1.at(0, 0) = 0.3;
  y.s1.at(0, 1) = 0.4;
  CHECK(rmse(x, y, StokesChannels::s12_only) == doctest::Approx(std::sqrt(0.25 / 4)).epsilon(1e-15));
  CHECK(rmse(x, y) == doctest::Approx(std::sqrt(0.25 / 6)).epsilon(1e-15));
  CHECK(rmse(x, y) == rmse(y, x));
  CHECK_THROWS_AS(rmse(x, StokesImage(2, 1)), StructuralError);
}

TEST_CASE("psnr") {
  const Plane a(4, 4, 0.5);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  CHECK(psnr(a, Plane(4, 4, 0.6)) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr(Plane(4, 4, 0.0), Plane(4, 4, 1.0)) == doctest::Approx(0.0));
  CHECK(psnr_from_mse(0.01) == doctest::Approx(20.0));
  CHECK(psnr_from_mse(1.0) == 0.0);
  CHECK(psnr_from_mse(0.04, 2.0) == doctest::Approx(20.0));
  CHECK_THROWS_AS(psnr(a, Plane(4, 5)), StructuralError);
  double last = std::numeric_limits<double>::infinity();
  for (double mse = 1e-6; mse < 10; mse *= 1.7) {
    const double v = psnr_from_mse(mse);
    CHECK(v < last);
    last = v;
  }
}

TEST_CASE("dolp psnr") {
  Rng rng(2);
  const StokesImage s = random_stokes(8, 8, rng);
  CHECK(dolp_psnr(s, s) == std::numeric_limits<double>::infinity());
  CHECK(dolp_psnr(uniform_stokes(4, 4, 1, 0, 0), uniform_stokes(4, 4, 1, 1, 0)) == doctest::Approx(0.0));
  // Values above one are clamped before comparison.
  CHECK(dolp_psnr(uniform_stokes(4, 4, 1, 3, 0), uniform_stokes(4, 4, 1, 1, 0)) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("dolp psnr matches a scalar recomputation") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const StokesImage a = random_stokes(9, 7, rng), b = random_stokes(9, 7, rng);
    double se = 0;
    for (std::size_t i = 0; i < a.s0.size(); ++i) {
      const double da = std::min(1.0, std::hypot(a.s1[i], a.s2[i]) / a.s0[i]);
      const double db = std::min(1.0, std::hypot(b.s1[i], b.s2[i]) / b.s0[i]);
      se += (da - db) * (da - db);
    }
    const double want = 10 * std::log10(1.0 / (se / static_cast<double>(a.s0.size())));
    CHECK(std::abs(dolp_psnr(a, b) - want) <= 1e-9);
  }
}

TEST_CASE("aolp difference and error") {
  CHECK(aolp_difference(1, 179) == doctest::Approx(2.0));
  CHECK(aolp_difference(0, 90) == 90.0);
  CHECK(aolp_difference(37, 37) == 0.0);
  CHECK(aolp_difference(10, 350) == doctest::Approx(20.0));

  const StokesImage h = uniform_stokes(3, 3, 1, 1, 0);   // 0 deg
  const StokesImage v = uniform_stokes(3, 3, 1, -1, 0);  // 90 deg
  CHECK(aolp_error(h, h) == 0.0);
  CHECK(aolp_error(h, v) == doctest::Approx(90.0));
  CHECK_THROWS_AS(aolp_error(h, StokesImage(2, 3)), StructuralError);
}

TEST_CASE("aolp error is symmetric and bounded") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const StokesImage a = random_stokes(6, 6, rng), b = random_stokes(6, 6, rng);
    const double e = aolp_error(a, b);
    CHECK(e == doctest::Approx(aolp_error(b, a)).epsilon(1e-14));
    CHECK(e >= 0.0);
    CHECK(e <= 90.0);
  }
}

TEST_CASE("aolp error gate") {
  StokesImage truth = uniform_stokes(1, 2, 1, 0, 0);
  truth.s1.at(0, 1) = 0.5;  // DoLP 0.5 at 0 deg
  const StokesImage est = uniform_stokes(1, 2, 1, 0, 0.5);  // 45 deg everywhere
  CHECK(aolp_error(est, truth) == doctest::Approx(45.0));
  CHECK(aolp_error(est, truth, 0.1) == doctest::Approx(45.0));
  CHECK(aolp_error(est, truth, 0.9) == 0.0);
}

TEST_CASE("polarization metrics ignore a common positive scale") {
  Rng rng(6);
  const StokesImage a = random_stokes(8, 8, rng), b = random_stokes(8, 8, rng);
  CHECK(dolp_psnr(scaled(a, 0.35), scaled(b, 0.35)) == doctest::Approx(dolp_psnr(a, b)).epsilon(1e-9));
  CHECK(aolp_error(scaled(a, 7.0), scaled(b, 7.0)) == doctest::Approx(aolp_error(a, b)).epsilon(1e-9));
}

TEST_CASE("ssim") {
  Rng rng(7);
  const RgbImage a = polarsim::testing::random_rgb(16, 16, rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  Plane bin(16, 16), inv(16, 16);
  for (std::size_t i = 0; i < bin.size(); ++i) {
    bin[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    inv[i] = 1.0 - bin[i];
  }
  const double s = ssim(bin, inv);
  CHECK(s < 0.0);
  CHECK(s >= -1.0);
  CHECK(ssim(bin, inv) == doctest::Approx(ssim(inv, bin)).epsilon(1e-14));
  CHECK_THROWS_AS(ssim(Plane(10, 16), Plane(10, 16)), StructuralError);
  CHECK_THROWS_AS(ssim(Plane(16, 16), Plane(16, 17)), StructuralError);
}

TEST_CASE("ssim equals the sliding window reference") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const RgbImage a = polarsim::testing::random_rgb(16, 16, rng);
    RgbImage b = a;
    for (int c = 0; c < 3; ++c)
      for (double& v : b.channel(c).values()) v = std::clamp(v + rng.uniform(-0.2, 0.2), 0.0, 1.0);
    const double want = polarsim::testing::ssim_oracle(rgb_to_gray(a), rgb_to_gray(b));
    CHECK(std::abs(ssim(a, b) - want) <= 1e-8);
  }
}

TEST_CASE("gaussian taps and pairwise sum") {
  const auto taps = gaussian_taps(11, 1.5);
  double s = 0;
  for (double t : taps) s += t;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(taps[0] == doctest::Approx(taps[10]).epsilon(1e-15));
  CHECK(taps[5] > taps[4]);
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  CHECK(pairwise_sum(v.data(), v.size()) == 499500.0);
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
}
