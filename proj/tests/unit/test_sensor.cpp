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
#include <set>

#include "polarsim/scenegen.hpp"
#include "polarsim/sensor.hpp"
#include "test_support.hpp"

using namespace polarsim;

namespace {

ColorStokes uniform_scene(int h, int w, double s0, double s1 = 0, double s2 = 0) {
  StokesImage s(h, w);
  s.s0 = Plane(h, w, s0);
  s.s1 = Plane(h, w, s1);
  s.s2 = Plane(h, w, s2);
  return {s, s, s};
}

SensorConfig noiseless(double t = 0.7) {
  SensorConfig c;
  c.t = t;
  c.f_n = 0.0;
  return c;
}

double sample_std(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("sparse layout at r = 1/16") {
  const SensorLayout l = build_layout(SensorKind::sparse, 64, 64, 16);
  CHECK(l.polarized_count() == 256);
  for (auto c : {PixelClass::P0, PixelClass::P45, PixelClass::P90, PixelClass::P135}) CHECK(l.count(c) == 64);
  CHECK(l.tile() == 8);
  CHECK(l.mask().count() == 256);
}

TEST_CASE("conventional layout") {
  const SensorLayout l = build_layout(SensorKind::conventional, 8, 8, 1);
  CHECK(l.polarized_count() == 64);
  for (auto c : {PixelClass::P0, PixelClass::P45, PixelClass::P90, PixelClass::P135}) CHECK(l.count(c) == 16);
  // Every 2x2 cell shares one color and holds all four angles.
  for (int y = 0; y < 8; y += 2) {
    for (int x = 0; x < 8; x += 2) {
      std::set<PixelClass> angles;
      std::set<FilterColor> colors;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          angles.insert(l.at(y + dy, x + dx));
          colors.insert(l.color_at(y + dy, x + dx));
        }
      CHECK(angles.size() == 4);
      CHECK(colors.size() == 1);
    }
  }
}

TEST_CASE("sparse layout at r = 1/4") {
  const SensorLayout l = build_layout(SensorKind::sparse, 8, 8, 4);
  CHECK(l.polarized_count() == 16);
  CHECK(l.count(PixelClass::R) > 0);
  CHECK(l.count(PixelClass::B) > 0);
}

TEST_CASE("polarization fraction is exact for every supported ratio") {
  for (int d : {4, 16, 64}) {
    const int tile = sparse_tile_side(d);
    for (int k : {1, 2, 3}) {
      const SensorLayout l = build_layout(SensorKind::sparse, tile * k, tile * (k + 1), d);
      const std::size_t n = static_cast<std::size_t>(l.height()) * l.width();
      CHECK(l.polarized_count() * static_cast<std::size_t>(d) == n);
      for (auto c : {PixelClass::P0, PixelClass::P45, PixelClass::P90, PixelClass::P135}) {
        CHECK(l.count(c) * 4 * static_cast<std::size_t>(d) == n);
      }
    }
  }
}

TEST_CASE("layout is tile periodic and non-polarized pixels follow the quad bayer") {
  const SensorLayout l = build_layout(SensorKind::sparse, 32, 32, 16);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      CHECK(l.at(y, x) == l.at(y % 8, x % 8));
      if (!is_polarized(l.at(y, x))) {
        const bool top = (y / 2) % 2 == 0, left = (x / 2) % 2 == 0;
        const PixelClass want = top && left ? PixelClass::R : (!top && !left ? PixelClass::B : PixelClass::G);
        CHECK(l.at(y, x) == want);
      } else {
        CHECK(l.color_at(y, x) == FilterColor::W);
      }
    }
  }
}

TEST_CASE("unsupported layouts are rejected") {
  CHECK_THROWS_AS(build_layout(SensorKind::sparse, 64, 64, 8), ParameterError);
  CHECK_THROWS_AS(build_layout(SensorKind::sparse, 64, 64, 9), ParameterError);
  CHECK_THROWS_AS(build_layout(SensorKind::sparse, 60, 64, 16), ParameterError);
  CHECK_THROWS_AS(build_layout(SensorKind::conventional, 6, 8, 1), ParameterError);
  CHECK_THROWS_AS(build_layout(SensorKind::conventional, 8, 8, 16), ParameterError);
  CHECK_THROWS_AS(build_layout(SensorKind::sparse, 0, 8, 4), ParameterError);
}

TEST_CASE("layout text round trip") {
  const SensorLayout l = build_layout(SensorKind::sparse, 16, 16, 16);
  const std::string text = l.to_text();
  CHECK(text.substr(0, 17) == "RRcbRRGGRRcbRRGG\n");
  CHECK(text.substr(17, 17) == "RRdaRRGGRRdaRRGG\n");
  std::vector<PixelClass> classes;
  for (char c : text)
    if (c != '\n') classes.push_back(class_from_glyph(c));
  CHECK(layout_from_classes(SensorKind::sparse, 16, 16, classes) == l);
  classes[0] = PixelClass::B;
  CHECK_THROWS_AS(layout_from_classes(SensorKind::sparse, 16, 16, classes), FormatError);
  CHECK_THROWS_AS(class_from_glyph('x'), FormatError);
}

TEST_CASE("noiseless capture of an unpolarized scene") {
  const SensorLayout l = build_layout(SensorKind::sparse, 16, 16, 16);
  const RawFrame raw = capture(uniform_scene(16, 16, 1.0), l, noiseless());
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const double want = is_polarized(l.at(y, x)) ? 0.35 : 1.0;
      CHECK(raw.values.at(y, x) == doctest::Approx(want).epsilon(1e-15));
    }
  }
}

TEST_CASE("noiseless capture of light fully polarized at 0 degrees") {
  const double s0 = 0.6, t = 0.7;
  const SensorLayout l = build_layout(SensorKind::sparse, 8, 8, 16);
  const RawFrame raw = capture(uniform_scene(8, 8, s0, s0, 0), l, noiseless(t));
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const double v = raw.values.at(y, x);
      switch (l.at(y, x)) {
        case PixelClass::P0: CHECK(v == doctest::Approx(t * 2 * s0 / 2)); break;
        case PixelClass::P90: CHECK(v == 0.0); break;
        case PixelClass::P45:
        case PixelClass::P135: CHECK(v == doctest::Approx(t * s0 / 2)); break;
        default: CHECK(v == s0);
      }
    }
  }
}

TEST_CASE("white pixels see the grayscale projection") {
  const int n = 8;
  StokesImage r(n, n), g(n, n), b(n, n);
  r.s0 = Plane(n, n, 1.0);
  const SensorLayout l = build_layout(SensorKind::sparse, n, n, 16);
  const RawFrame raw = capture({r, g, b}, l, noiseless(1.0));
  CHECK(raw.values.at(0, 2) == doctest::Approx(0.299 / 2));
  CHECK(raw.values.at(0, 0) == 1.0);  // R site
  CHECK(raw.values.at(0, 6) == 0.0);  // G site sees nothing of a red scene
}

TEST_CASE("capture rejects mismatched scenes and bad configs") {
  const SensorLayout l = build_layout(SensorKind::sparse, 16, 16, 16);
  CHECK_THROWS_AS(capture(uniform_scene(8, 16, 1.0), l, noiseless()), StructuralError);
  SensorConfig c = noiseless();
  c.t = 0;
  CHECK_THROWS_AS(capture(uniform_scene(16, 16, 1.0), l, c), ParameterError);
  c = noiseless();
  c.f_n = -1;
  CHECK_THROWS_AS(capture(uniform_scene(16, 16, 1.0), l, c), ParameterError);
}

TEST_CASE("capture is deterministic and seeded") {
  SceneParams p;
  p.height = p.width = 32;
  const ColorStokes scene = color_stokes(generate_scene(p, 4));
  const SensorLayout l = build_layout(SensorKind::sparse, 32, 32, 16);
  SensorConfig c;
  c.seed = 9;
  const RawFrame a = capture(scene, l, c), b = capture(scene, l, c);
  CHECK(a.values == b.values);
  c.seed = 10;
  CHECK(!(capture(scene, l, c).values == a.values));
}

TEST_CASE("capture output is never negative") {
  const SensorLayout l = build_layout(SensorKind::sparse, 32, 32, 16);
  SensorConfig c;
  c.f_n = 20.0;
  const RawFrame raw = capture(uniform_scene(32, 32, 0.001), l, c);
  for (double v : raw.values.values()) CHECK(v >= 0.0);
}

TEST_CASE("shot noise std matches F_n sqrt(S)") {
  // 500 photons per regular pixel.
  const int n = 384;
  const SensorLayout l = build_layout(SensorKind::sparse, n, n, 16);
  for (double f_n : {0.72, 3.6}) {
    SensorConfig c;
    c.f_n = f_n;
    c.full_scale = 1000.0;
    c.seed = 21;
    const RawFrame raw = capture(uniform_scene(n, n, 0.5), l, c);
    std::vector<double> photons;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (!is_polarized(l.at(y, x))) photons.push_back(raw.values.at(y, x) * c.full_scale);
    REQUIRE(photons.size() >= 100000);
    const double want = f_n * std::sqrt(500.0);
    CHECK(std::abs(sample_std(photons) / want - 1.0) < 0.02);
  }
}

TEST_CASE("noise std for the documented 100 photon case") {
  const int n = 384;
  const SensorLayout l = build_layout(SensorKind::sparse, n, n, 16);
  SensorConfig c;
  c.f_n = 0.72;
  c.full_scale = 1000.0;
  const RawFrame raw = capture(uniform_scene(n, n, 0.1), l, c);
  std::vector<double> photons;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (!is_polarized(l.at(y, x))) photons.push_back(raw.values.at(y, x) * 1000.0);
  CHECK(sample_std(photons) == doctest::Approx(7.2).epsilon(0.02));
}

TEST_CASE("polarization pixels read at most t times the gray intensity") {
  Rng rng(8);
  const int n = 16;
  const StokesImage s = polarsim::testing::random_stokes(n, n, rng);
  const SensorLayout l = build_layout(SensorKind::conventional, n, n, 1);
  const RawFrame raw = capture({s, s, s}, l, noiseless(0.7));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) CHECK(raw.values.at(y, x) <= 0.7 * s.s0.at(y, x) + 1e-15);

  // Equality for fully polarized light aligned with the polarizer.
  const RawFrame aligned = capture(uniform_scene(n, n, 0.5, 0, 0.5), l, noiseless(0.7));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (l.at(y, x) == PixelClass::P45) CHECK(aligned.values.at(y, x) == doctest::Approx(0.35));
}

TEST_CASE("snr analysis") {
  SensorConfig c;
  c.t = 0.7;
  CHECK(snr_analysis(c).rgb_snr_ratio == doctest::Approx(std::sqrt(1 / 1.4)).epsilon(1e-12));
  CHECK(std::abs(snr_analysis(c).rgb_snr_ratio - 0.845) < 1e-3);
  c.t = 0.5;
  CHECK(snr_analysis(c).rgb_snr_ratio == 1.0);
  c.t = 1.0;
  c.q_e = 1.0;
  c.full_scale = 100;
  const SnrReport r = snr_analysis(c);
  CHECK(r.snr_polarized == doctest::Approx(std::sqrt(50.0)).epsilon(1e-14));
  CHECK(r.snr_regular == doctest::Approx(10.0));
  CHECK(r.snr_conventional_rgb == doctest::Approx(std::sqrt(200.0)));
}

TEST_CASE("resolution analysis") {
  CHECK(resolution_analysis(1.0 / 16).rgb_factor == 3.75);
  CHECK(resolution_analysis(0.25).rgb_factor == 3.0);
  CHECK(resolution_analysis(0.25).pol_factor == 0.25);
  CHECK(resolution_analysis(0.0).rgb_factor == 4.0);
  CHECK(resolution_analysis(0.0).pol_factor == 0.0);
  CHECK_THROWS_AS(resolution_analysis(-0.1), ParameterError);
  CHECK_THROWS_AS(resolution_analysis(1.5), ParameterError);
}

TEST_CASE("name parsing") {
  CHECK(sensor_kind_from_string("sparse") == SensorKind::sparse);
  CHECK(sensor_kind_from_string(to_string(SensorKind::conventional)) == SensorKind::conventional);
  CHECK_THROWS_AS(sensor_kind_from_string("dense"), ParameterError);
  CHECK(color_order_from_string("GBRG") == ColorOrder::GBRG);
  CHECK_THROWS_AS(color_order_from_string("RGB"), ParameterError);
}
