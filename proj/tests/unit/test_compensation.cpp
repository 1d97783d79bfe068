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
#include <functional>

#include "polarsim/compensation.hpp"
#include "polarsim/sensor.hpp"
#include "test_support.hpp"

using namespace polarsim;
using polarsim::testing::max_abs_diff;

namespace {

// Sparse Stokes on the cluster lattice of a sparse layout.
struct Field {
  StokesImage sparse;
  PixelMask mask;
};

Field lattice_field(int n, int r_den, Rng& rng) {
  const PixelMask mask = build_layout(SensorKind::sparse, n, n, r_den).mask();
  StokesImage s(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (mask(y, x)) {
        s.s0.at(y, x) = rng.uniform(0.2, 1.0);
        s.s1.at(y, x) = rng.uniform(-0.2, 0.2);
        s.s2.at(y, x) = rng.uniform(-0.2, 0.2);
      }
  return {s, mask};
}

Field scattered_field(int h, int w, int sites, Rng& rng) {
  PixelMask mask(h, w);
  StokesImage s(h, w);
  while (mask.count() < static_cast<std::size_t>(sites)) {
    const int y = static_cast<int>(rng.below(h)), x = static_cast<int>(rng.below(w));
    mask.set(y, x, true);
    s.s0.at(y, x) = rng.uniform(0.2, 1.0);
    s.s1.at(y, x) = rng.uniform(-0.2, 0.2);
    s.s2.at(y, x) = rng.uniform(-0.2, 0.2);
  }
  return {s, mask};
}

using Interp = std::function<StokesImage(const StokesImage&, const PixelMask&)>;

std::vector<std::pair<const char*, Interp>> interpolators(const RgbImage& guide) {
  return {
      {"nearest", [](const StokesImage& s, const PixelMask& m) { return interp_nearest(s, m); }},
      {"bilinear", [](const StokesImage& s, const PixelMask& m) { return interp_bilinear_scattered(s, m); }},
      {"joint-bilateral",
       [guide](const StokesImage& s, const PixelMask& m) { return joint_bilateral(s, m, guide, {2.0, 0.1}); }},
  };
}

StokesImage scale_all(const StokesImage& s, double k) { return scaled(s, k); }

}  // namespace

TEST_CASE("nearest fill") {
  StokesImage s(5, 7);
  PixelMask m(5, 7);
  m.set(2, 3, true);
  s.s1.at(2, 3) = 0.42;
  const StokesImage out = interp_nearest(s, m);
  for (double v : out.s1.values()) CHECK(v == 0.42);

  Plane row(1, 10);
  PixelMask rm(1, 10);
  row.at(0, 0) = 1.0;
  row.at(0, 9) = 2.0;
  rm.set(0, 0, true);
  rm.set(0, 9, true);
  const Plane r = interp_nearest(row, rm);
  CHECK(r.at(0, 4) == 1.0);
  CHECK(r.at(0, 5) == 2.0);
}

TEST_CASE("nearest breaks ties by row then column") {
  Plane p(3, 3);
  PixelMask m(3, 3);
  p.at(0, 1) = 1.0;  // above
  p.at(1, 0) = 2.0;  // left
  p.at(1, 2) = 3.0;  // right
  p.at(2, 1) = 4.0;  // below
  for (auto [y, x] : {std::pair{0, 1}, {1, 0}, {1, 2}, {2, 1}}) m.set(y, x, true);
  CHECK(interp_nearest(p, m).at(1, 1) == 1.0);
  m.set(0, 1, false);
  CHECK(interp_nearest(p, m).at(1, 1) == 2.0);
}

TEST_CASE("empty and mismatched masks are rejected") {
  StokesImage s(4, 4);
  RgbImage g(4, 4);
  CHECK_THROWS_AS(interp_nearest(s, PixelMask(4, 4)), ParameterError);
  CHECK_THROWS_AS(interp_bilinear_scattered(s, PixelMask(4, 4)), ParameterError);
  CHECK_THROWS_AS(joint_bilateral(s, PixelMask(4, 4), g, {1, 0.1}), ParameterError);
  PixelMask m(4, 5);
  m.set(0, 0, true);
  CHECK_THROWS_AS(interp_nearest(s, m), StructuralError);
  PixelMask ok(4, 4);
  ok.set(1, 1, true);
  CHECK_THROWS_AS(joint_bilateral(s, ok, g, {0.0, 0.1}), ParameterError);
  CHECK_THROWS_AS(joint_bilateral(s, ok, g, {1.0, -1.0}), ParameterError);
  CHECK_THROWS_AS(joint_bilateral(s, ok, RgbImage(3, 4), {1.0, 0.1}), StructuralError);
}

TEST_CASE("bilinear fill reproduces constants and ramps") {
  const PixelMask mask = build_layout(SensorKind::sparse, 32, 32, 16).mask();
  CHECK(is_rectilinear_lattice(mask));
  Plane c(32, 32), ramp(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      c.at(y, x) = mask(y, x) ? 0.3 : 0.0;
      ramp.at(y, x) = mask(y, x) ? 0.01 * y - 0.02 * x + 0.5 : 0.0;
    }
  const Plane flat = interp_bilinear_scattered(c, mask);
  for (double v : flat.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));
  const Plane r = interp_bilinear_scattered(ramp, mask);
  // Interior: between the first and last lattice rows and columns.
  for (int y = 0; y <= 25; ++y)
    for (int x = 2; x <= 27; ++x) CHECK(r.at(y, x) == doctest::Approx(0.01 * y - 0.02 * x + 0.5).epsilon(1e-12));
}

TEST_CASE("bilinear midpoint and clamped borders") {
  Plane p(1, 5);
  PixelMask m(1, 5);
  m.set(0, 1, true);
  m.set(0, 3, true);
  p.at(0, 1) = 1.0;
  p.at(0, 3) = 3.0;
  const Plane out = interp_bilinear_scattered(p, m);
  CHECK(out.at(0, 2) == 2.0);
  CHECK(out.at(0, 0) == 1.0);
  CHECK(out.at(0, 4) == 3.0);
}

TEST_CASE("bilinear falls back to inverse distance weighting off-lattice") {
  Plane p(5, 5);
  PixelMask m(5, 5);
  m.set(0, 0, true);
  m.set(4, 4, true);
  m.set(0, 4, true);  // (4, 0) missing: not a product set
  p.at(0, 0) = 1.0;
  p.at(4, 4) = 2.0;
  p.at(0, 4) = 4.0;
  CHECK(!is_rectilinear_lattice(m));
  const Plane out = interp_bilinear_scattered(p, m);
  // (2, 2): three sites at d^2 = 8 each.
  CHECK(out.at(2, 2) == doctest::Approx(7.0 / 3.0));
  CHECK(out.at(0, 0) == 1.0);
}

TEST_CASE("joint bilateral special cases") {
  Rng rng(4);
  StokesImage s(8, 8);
  PixelMask m(8, 8);
  m.set(3, 3, true);
  s.s1.at(3, 3) = -0.25;
  const RgbImage guide = polarsim::testing::random_rgb(8, 8, rng);
  const StokesImage one = joint_bilateral(s, m, guide, {2.0, 0.1});
  for (double v : one.s1.values()) CHECK(v == doctest::Approx(-0.25).epsilon(1e-14));

  // Constant guide: pure spatial Gaussian weights.
  const Field f = scattered_field(8, 8, 6, rng);
  const RgbImage flat = polarsim::testing::uniform_rgb(8, 8, 0.5, 0.5, 0.5);
  const StokesImage got = joint_bilateral(f.sparse, f.mask, flat, {1.5, 0.05});
  const StokesImage want = polarsim::testing::jbf_oracle(f.sparse, f.mask, flat, 1.5, 1e9);
  CHECK(max_abs_diff(got, want) <= 1e-12);
}

TEST_CASE("joint bilateral equals the brute force oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Field f = scattered_field(8, 8, 1 + static_cast<int>(rng.below(10)), rng);
    const RgbImage guide = polarsim::testing::random_rgb(8, 8, rng);
    const double ss = rng.uniform(0.3, 3.0), sr = rng.uniform(0.05, 0.5);
    const StokesImage got = joint_bilateral(f.sparse, f.mask, guide, {ss, sr});
    const StokesImage want = polarsim::testing::jbf_oracle(f.sparse, f.mask, guide, ss, sr);
    CHECK(max_abs_diff(got, want) <= 1e-10);
  }
}

TEST_CASE("joint bilateral with an empty window uses the nearest site") {
  StokesImage s(8, 8);
  PixelMask m(8, 8);
  m.set(0, 0, true);
  s.s2.at(0, 0) = 0.7;
  const RgbImage g = polarsim::testing::uniform_rgb(8, 8, 0.1, 0.2, 0.3);
  const StokesImage out = joint_bilateral(s, m, g, {0.3, 0.1});  // radius 1
  CHECK(out.s2.at(7, 7) == 0.7);
  CHECK(out.s2.at(0, 1) == 0.7);
}

TEST_CASE("interpolators are exact at mask sites, bounded and equivariant") {
  Rng rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const Field lattice = lattice_field(32, 16, rng);
    const Field scattered = scattered_field(24, 24, 12, rng);
    const RgbImage guide32 = polarsim::testing::random_rgb(32, 32, rng);
    const RgbImage guide24 = polarsim::testing::random_rgb(24, 24, rng);
    for (const Field* f : {&lattice, &scattered}) {
      const RgbImage& guide = f->mask.height() == 32 ? guide32 : guide24;
      for (const auto& [name, interp] : interpolators(guide)) {
        CAPTURE(name);
        const StokesImage out = interp(f->sparse, f->mask);
        const Plane* in[3] = {&f->sparse.s0, &f->sparse.s1, &f->sparse.s2};
        const Plane* got[3] = {&out.s0, &out.s1, &out.s2};
        for (int k = 0; k < 3; ++k) {
          double lo = 1e9, hi = -1e9;
          for (int y = 0; y < f->mask.height(); ++y)
            for (int x = 0; x < f->mask.width(); ++x)
              if (f->mask(y, x)) {
                lo = std::min(lo, in[k]->at(y, x));
                hi = std::max(hi, in[k]->at(y, x));
                CHECK(got[k]->at(y, x) == in[k]->at(y, x));
              }
          for (double v : got[k]->values()) {
            CHECK(v >= lo - 1e-12);
            CHECK(v <= hi + 1e-12);
          }
        }
        const StokesImage scaled_out = interp(scale_all(f->sparse, -2.5), f->mask);
        CHECK(max_abs_diff(scaled_out, scale_all(out, -2.5)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("default bilateral parameters") {
  CHECK(default_bilateral_params(8).sigma_spatial == 4.0);
  CHECK(default_bilateral_params(8).sigma_range == 0.1);
  CHECK(default_bilateral_params(16).sigma_spatial == 8.0);
}
