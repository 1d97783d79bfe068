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

#include <cmath>

#include "polarsim/scenegen.hpp"
#include "polarsim/stokes.hpp"
#include "test_support.hpp"

using namespace polarsim;
using polarsim::testing::max_abs_diff;
using polarsim::testing::random_stokes;

namespace {

FourAngleImage pixel_angles(double l0, double l45, double l90, double l135) {
  FourAngleImage l(1, 1);
  l.l0[0] = l0;
  l.l45[0] = l45;
  l.l90[0] = l90;
  l.l135[0] = l135;
  return l;
}

StokesImage pixel_stokes(double s0, double s1, double s2) {
  StokesImage s(1, 1);
  s.s0[0] = s0;
  s.s1[0] = s1;
  s.s2[0] = s2;
  return s;
}

void check_stokes(const StokesImage& s, double s0, double s1, double s2) {
  CHECK(s.s0[0] == doctest::Approx(s0).epsilon(1e-15));
  CHECK(s.s1[0] == doctest::Approx(s1).epsilon(1e-15));
  CHECK(s.s2[0] == doctest::Approx(s2).epsilon(1e-15));
}

}  // namespace

TEST_CASE("four angles to stokes") {
  check_stokes(stokes_from_four_angles(pixel_angles(1, 1, 1, 1)), 1, 0, 0);
  check_stokes(stokes_from_four_angles(pixel_angles(2, 1, 0, 1)), 1, 1, 0);
  check_stokes(stokes_from_four_angles(pixel_angles(1, 2, 1, 0)), 1, 0, 1);
}

TEST_CASE("four angles with mismatched planes are rejected") {
  FourAngleImage l(2, 2);
  l.l90 = Plane(2, 3);
  CHECK_THROWS_AS(stokes_from_four_angles(l), StructuralError);
}

TEST_CASE("stokes to four angles") {
  auto l = four_angles_from_stokes(pixel_stokes(1, 0, 0));
  CHECK(l.l0[0] == 1.0);
  CHECK(l.l45[0] == 1.0);
  CHECK(l.l90[0] == 1.0);
  CHECK(l.l135[0] == 1.0);

  l = four_angles_from_stokes(pixel_stokes(1, 0.5, 0));
  CHECK(l.l0[0] == 1.5);
  CHECK(l.l45[0] == 1.0);
  CHECK(l.l90[0] == 0.5);
  CHECK(l.l135[0] == 1.0);
}

TEST_CASE("forward model matches the cosine law at the four angles") {
  Rng rng(3);
  const StokesImage s = random_stokes(4, 4, rng);
  const FourAngleImage l = four_angles_from_stokes(s);
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    for (int a = 0; a < 4; ++a) {
      CHECK(l.angle(a)[i] == doctest::Approx(intensity_at(s.s0[i], s.s1[i], s.s2[i], kAnglesDeg[a])).epsilon(1e-12));
    }
  }
}

TEST_CASE("invalid stokes needs the override") {
  const StokesImage bad = pixel_stokes(1, 2, 0);
  CHECK_THROWS_AS(four_angles_from_stokes(bad), ValidationError);
  const FourAngleImage l = four_angles_from_stokes(bad, true);
  CHECK(l.l90[0] == -1.0);
}

TEST_CASE("left inverse holds for random stokes") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    StokesImage s(8, 8);
    for (Plane* p : {&s.s0, &s.s1, &s.s2}) {
      for (double& v : p->values()) v = rng.uniform(-50, 50);
    }
    const StokesImage back = stokes_from_four_angles(four_angles_from_stokes(s, true));
    CHECK(max_abs_diff(s, back) <= 1e-12);
  }
}

TEST_CASE("four-angle transform is linear") {
  Rng rng(5);
  FourAngleImage x(3, 3), y(3, 3), z(3, 3);
  const double a = 1.7, b = -0.4;
  for (int k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < 9; ++i) {
      x.angle(k)[i] = rng.uniform();
      y.angle(k)[i] = rng.uniform();
      z.angle(k)[i] = a * x.angle(k)[i] + b * y.angle(k)[i];
    }
  }
  const StokesImage sx = stokes_from_four_angles(x), sy = stokes_from_four_angles(y), sz = stokes_from_four_angles(z);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(sz.s0[i] == doctest::Approx(a * sx.s0[i] + b * sy.s0[i]).epsilon(1e-12));
    CHECK(sz.s1[i] == doctest::Approx(a * sx.s1[i] + b * sy.s1[i]).epsilon(1e-12));
    CHECK(sz.s2[i] == doctest::Approx(a * sx.s2[i] + b * sy.s2[i]).epsilon(1e-12));
  }
}

TEST_CASE("dolp") {
  CHECK(dolp(pixel_stokes(1, 0.6, 0.8))[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dolp(pixel_stokes(1, 0, 0))[0] == 0.0);
  CHECK(dolp(pixel_stokes(2, 0.6, 0.8))[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("dolp guards division and clamps") {
  CHECK(dolp(pixel_stokes(0, 0, 0))[0] == 0.0);
  CHECK(dolp(pixel_stokes(0, 1, 0))[0] == kDolpMax);
  CHECK(dolp(pixel_stokes(1e-3, 2e-3, 0))[0] == doctest::Approx(2.0));
  CHECK(dolp(pixel_stokes(-1, 1e-7, 0))[0] == doctest::Approx(0.1));
}

TEST_CASE("aolp") {
  CHECK(aolp(pixel_stokes(1, 1, 0))[0] == 0.0);
  CHECK(aolp(pixel_stokes(1, 0, 1))[0] == doctest::Approx(45.0).epsilon(1e-14));
  CHECK(aolp(pixel_stokes(1, -1, 0))[0] == doctest::Approx(90.0).epsilon(1e-14));
  CHECK(aolp(pixel_stokes(1, 0, -1))[0] == doctest::Approx(135.0).epsilon(1e-14));
  CHECK(aolp(pixel_stokes(1, 0, 0))[0] == 0.0);
}

TEST_CASE("aolp stays in [0, 180)") {
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const double s1 = rng.uniform(-1, 1), s2 = rng.uniform(-1, 1);
    const double a = aolp_value(s1, s2);
    REQUIRE(a >= 0.0);
    REQUIRE(a < 180.0);
  }
  // -0.0 and tiny negative s2 near the wrap point.
  CHECK(aolp_value(1.0, -0.0) < 180.0);
  CHECK(aolp_value(1.0, -1e-300) < 180.0);
  CHECK(aolp_value(-1.0, -0.0) < 180.0);
}

TEST_CASE("dolp and aolp are invariant to positive scale") {
  Rng rng(23);
  const StokesImage s = random_stokes(8, 8, rng);
  for (double k : {0.35, 2.0, 1e3}) {
    const StokesImage ks = scaled(s, k);
    CHECK(max_abs_diff(dolp(ks), dolp(s)) <= 1e-6);
    CHECK(max_abs_diff(aolp(ks), aolp(s)) <= 1e-6);
  }
}

TEST_CASE("fully polarized light round trips to dolp one") {
  Rng rng(29);
  StokesImage s(6, 6);
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    const double s0 = rng.uniform(0.1, 1.0), a = rng.uniform(0, M_PI);
    s.s0[i] = s0;
    s.s1[i] = s0 * std::cos(2 * a);
    s.s2[i] = s0 * std::sin(2 * a);
  }
  const GrayImage d = dolp(stokes_from_four_angles(four_angles_from_stokes(s)));
  for (double v : d.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("grayscale projection") {
  CHECK(rgb_to_gray(polarsim::testing::uniform_rgb(1, 1, 1, 1, 1))[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rgb_to_gray(polarsim::testing::uniform_rgb(1, 1, 1, 0, 0))[0] == 0.299);
  CHECK(rgb_to_gray(polarsim::testing::uniform_rgb(1, 1, 0, 0, 0))[0] == 0.0);
  GrayWeights w{0.2, 0.7, 0.1};
  CHECK(rgb_to_gray(polarsim::testing::uniform_rgb(1, 1, 0, 1, 0), w)[0] == 0.7);
}

TEST_CASE("s0 from rgb") {
  using polarsim::testing::uniform_rgb;
  CHECK(s0_from_rgb(uniform_rgb(1, 1, 1, 1, 1), 1.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s0_from_rgb(uniform_rgb(1, 1, 1, 1, 1), 0.35)[0] == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(s0_from_rgb(uniform_rgb(1, 1, 0, 0, 0), 0.5)[0] == 0.0);
  CHECK_THROWS_AS(s0_from_rgb(uniform_rgb(1, 1, 1, 1, 1), 0.0), ParameterError);
  CHECK_THROWS_AS(s0_from_rgb(uniform_rgb(1, 1, 1, 1, 1), -0.2), ParameterError);
}

TEST_CASE("physical validation") {
  StokesImage s(3, 3);
  s.s0 = Plane(3, 3, 1.0);
  CHECK(validate_physical(s).violations == 0);

  s.s0.at(1, 2) = 0.0;
  s.s1.at(1, 2) = 1.0;
  const auto r = validate_physical(s);
  CHECK(r.violations == 1);
  CHECK(r.max_excess == doctest::Approx(1.0));
}

TEST_CASE("generated scenes are physical") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SceneParams p;
    p.height = p.width = 32;
    p.dolp_max = 1.0;
    CHECK(validate_physical(generate_scene(p, seed).stokes).violations == 0);
  }
}
