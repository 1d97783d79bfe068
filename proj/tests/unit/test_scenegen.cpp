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
#include <set>

#include "polarsim/metrics.hpp"
#include "polarsim/scenegen.hpp"
#include "test_support.hpp"

using namespace polarsim;

namespace {

const SceneKind kKinds[] = {SceneKind::gradient, SceneKind::checker, SceneKind::shapes, SceneKind::perlin};

}  // namespace

TEST_CASE("generated scenes satisfy their contract") {
  for (SceneKind kind : kKinds) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      SceneParams p;
      p.kind = kind;
      p.height = 24;
      p.width = 40;
      p.dolp_max = seed % 2 ? 1.0 : 0.6;
      const Scene s = generate_scene(p, seed);
      CAPTURE(to_string(kind));
      CAPTURE(seed);
      REQUIRE(s.rgb.height() == 24);
      REQUIRE(s.rgb.width() == 40);
      REQUIRE(validate_physical(s.stokes).violations == 0);
      for (int c = 0; c < 3; ++c)
        for (double v : s.rgb.channel(c).values()) REQUIRE((v >= 0.0 && v <= 1.0));
      for (double v : s.dolp.values()) REQUIRE((v >= 0.0 && v <= p.dolp_max));
      for (double v : s.aolp.values()) REQUIRE((v >= 0.0 && v < 180.0));
      const Plane s0 = rgb_to_gray(s.rgb);
      for (std::size_t i = 0; i < s0.size(); ++i) REQUIRE(s.stokes.s0[i] == doctest::Approx(s0[i]).epsilon(1e-15));
      // Requested AoLP is recovered wherever the field is polarized.
      const Plane a = aolp(s.stokes);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (s.dolp[i] > 1e-3 && s.stokes.s0[i] > 1e-6) REQUIRE(aolp_difference(a[i], s.aolp[i]) < 1e-6);
      }
      const StokesImage back = stokes_from_four_angles(s.angles);
      REQUIRE(polarsim::testing::max_abs_diff(back, s.stokes) < 1e-12);
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  SceneParams p;
  const Scene a = generate_scene(p, 77), b = generate_scene(p, 77), c = generate_scene(p, 78);
  CHECK(a.rgb.r == b.rgb.r);
  CHECK(a.stokes.s1 == b.stokes.s1);
  CHECK(a.aolp == b.aolp);
  CHECK(!(a.rgb.r == c.rgb.r));
}

TEST_CASE("explicit fields") {
  const RgbImage rgb = polarsim::testing::uniform_rgb(16, 16, 0.2, 0.5, 0.9);
  const Scene zero = scene_from_fields(rgb, Plane(16, 16, 0.0), Plane(16, 16, 33.0));
  for (double v : zero.stokes.s1.values()) CHECK(v == 0.0);
  for (double v : zero.stokes.s2.values()) CHECK(v == 0.0);

  const Scene full = scene_from_fields(rgb, Plane(16, 16, 1.0), Plane(16, 16, 0.0));
  for (std::size_t i = 0; i < full.stokes.s0.size(); ++i) {
    CHECK(full.stokes.s1[i] == full.stokes.s0[i]);
    CHECK(full.stokes.s2[i] == 0.0);
  }
  CHECK_THROWS_AS(scene_from_fields(rgb, Plane(16, 15), Plane(16, 16)), StructuralError);
}

TEST_CASE("per-channel stokes share the polarization state") {
  SceneParams p;
  p.height = p.width = 16;
  const Scene s = generate_scene(p, 3);
  const ColorStokes cs = color_stokes(s);
  const StokesImage gray = gray_stokes(cs);
  CHECK(polarsim::testing::max_abs_diff(gray, s.stokes) < 1e-12);
  for (std::size_t i = 0; i < s.rgb.r.size(); ++i) {
    if (cs.r.s0[i] > 1e-9) CHECK(dolp_value(cs.r.s0[i], cs.r.s1[i], cs.r.s2[i]) == doctest::Approx(s.dolp[i]));
  }
}

TEST_CASE("invalid scene parameters") {
  SceneParams p;
  p.height = 15;
  CHECK_THROWS_AS(generate_scene(p, 1), ParameterError);
  p = {};
  p.dolp_max = 1.5;
  CHECK_THROWS_AS(generate_scene(p, 1), ParameterError);
  p = {};
  p.correlation = -0.1;
  CHECK_THROWS_AS(generate_scene(p, 1), ParameterError);
  p = {};
  p.texture = 2;
  CHECK_THROWS_AS(generate_scene(p, 1), ParameterError);
  CHECK_THROWS_AS(scene_kind_from_string("noise"), ParameterError);
  for (SceneKind k : kKinds) CHECK(scene_kind_from_string(to_string(k)) == k);
}

TEST_CASE("zero dolp field") {
  SceneParams p;
  p.height = p.width = 16;
  p.dolp_max = 0.0;
  const Scene s = generate_scene(p, 5);
  for (double v : s.stokes.s1.values()) CHECK(v == 0.0);
  for (double v : s.stokes.s2.values()) CHECK(v == 0.0);
}

TEST_CASE("dataset splits") {
  const Manifest m = make_dataset(10, 0.8, 0.1, {});
  CHECK(m.train.size() == 8);
  CHECK(m.val.size() == 1);
  CHECK(m.test.size() == 1);

  const Manifest again = make_dataset(10, 0.8, 0.1, {});
  CHECK(again.train == m.train);
  CHECK(again.val == m.val);
  CHECK(again.test == m.test);

  const Manifest big = make_dataset(64, 0.75, 0.125, {});
  CHECK(big.train.size() == 48);
  CHECK(big.val.size() == 8);
  CHECK(big.test.size() == 8);
  std::set<int> seen;
  for (const auto* part : {&big.train, &big.val, &big.test})
    for (const auto& e : *part) CHECK(seen.insert(e.index).second);
  CHECK(seen.size() == 64);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 63);

  DatasetConfig other;
  other.seed = 2;
  CHECK(!(make_dataset(64, 0.75, 0.125, other).train == big.train));
}

TEST_CASE("tiny datasets keep every split non-empty") {
  const Manifest m = make_dataset(3, 0.9, 0.05, {});
  CHECK(m.train.size() == 1);
  CHECK(m.val.size() == 1);
  CHECK(m.test.size() == 1);
  CHECK_THROWS_AS(make_dataset(2, 0.5, 0.25, {}), ParameterError);
  CHECK_THROWS_AS(make_dataset(10, 0.8, 0.3, {}), ParameterError);
  DatasetConfig none;
  none.kinds.clear();
  CHECK_THROWS_AS(make_dataset(10, 0.8, 0.1, none), ParameterError);
}
