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

#include "polarsim/scenegen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "polarsim/rng.hpp"
#include "polarsim/stokes.hpp"

namespace polarsim {

namespace {

constexpr double kRgbFloor = 0.02;
constexpr double kRgbCeil = 0.98;

// Smoothstep-interpolated lattice noise in [0, 1] with lattice spacing `cell`.
Plane value_noise(int h, int w, double cell, Rng& rng) {
  const int gh = static_cast<int>(std::ceil(h / cell)) + 2;
  const int gw = static_cast<int>(std::ceil(w / cell)) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
  for (double& v : lattice) v = rng.uniform();
  auto fade = [](double t) { return t * t * (3.0 - 2.0 * t); };
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    const double fy = y / cell;
    const int iy = static_cast<int>(fy);
    const double ty = fade(fy - iy);
    for (int x = 0; x < w; ++x) {
      const double fx = x / cell;
      const int ix = static_cast<int>(fx);
      const double tx = fade(fx - ix);
      auto at = [&](int yy, int xx) { return lattice[static_cast<std::size_t>(yy) * gw + xx]; };
      const double top = (1 - tx) * at(iy, ix) + tx * at(iy, ix + 1);
      const double bot = (1 - tx) * at(iy + 1, ix) + tx * at(iy + 1, ix + 1);
      out.at(y, x) = (1 - ty) * top + ty * bot;
    }
  }
  return out;
}

// Sum of octaves, renormalized to [0, 1].
Plane fractal_noise(int h, int w, double base_cell, int octaves, Rng& rng) {
  Plane acc(h, w);
  double amp = 1.0, total = 0.0, cell = base_cell;
  for (int o = 0; o < octaves; ++o) {
    const Plane n = value_noise(h, w, std::max(cell, 1.0), rng);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += amp * n[i];
    total += amp;
    amp *= 0.5;
    cell /= 2.0;
  }
  for (double& v : acc.values()) v /= total;
  return acc;
}

struct Region {
  std::array<double, 3> color{};
  std::array<double, 3> color_slope{};  // linear shading across the image
  double dolp = 0.0;
  double aolp = 0.0;
};

Region random_region(Rng& rng, double dolp_max) {
  Region r;
  for (int c = 0; c < 3; ++c) {
    r.color[c] = rng.uniform(0.1, 0.9);
    r.color_slope[c] = rng.uniform(-0.15, 0.15);
  }
  // Favor a spread of polarization strengths including weak ones.
  const double u = rng.uniform();
  r.dolp = dolp_max * u * u;
  r.aolp = rng.uniform(0.0, 180.0);
  return r;
}

// Integer region label for every pixel, per scene kind.
std::vector<int> label_map(const SceneParams& p, Rng& rng, int& n_regions) {
  const int h = p.height, w = p.width;
  std::vector<int> label(static_cast<std::size_t>(h) * w, 0);
  auto at = [&](int y, int x) -> int& { return label[static_cast<std::size_t>(y) * w + x]; };
  switch (p.kind) {
    case SceneKind::gradient: {
      // Two half-planes split by a random line.
      const double angle = rng.uniform(0.0, M_PI);
      const double cy = rng.uniform(0.3, 0.7) * h, cx = rng.uniform(0.3, 0.7) * w;
      const double ny = std::sin(angle), nx = std::cos(angle);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) at(y, x) = ((y - cy) * ny + (x - cx) * nx) > 0 ? 1 : 0;
      n_regions = 2;
      break;
    }
    case SceneKind::checker: {
      const int cell = 6 + static_cast<int>(rng.below(11));
      const int oy = static_cast<int>(rng.below(static_cast<std::uint64_t>(cell)));
      const int ox = static_cast<int>(rng.below(static_cast<std::uint64_t>(cell)));
      const int cols = (w + ox) / cell + 1;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) at(y, x) = ((y + oy) / cell) * cols + (x + ox) / cell;
      n_regions = ((h + oy) / cell + 1) * cols;
      break;
    }
    case SceneKind::shapes: {
      const int n_shapes = 3 + static_cast<int>(rng.below(6));
      for (int s = 1; s <= n_shapes; ++s) {
        const bool circle = rng.uniform() < 0.5;
        const double cy = rng.uniform(0.0, h), cx = rng.uniform(0.0, w);
        const double ry = rng.uniform(0.1, 0.35) * h, rx = rng.uniform(0.1, 0.35) * w;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            const double dy = (y - cy) / ry, dx = (x - cx) / rx;
            const bool inside = circle ? (dy * dy + dx * dx <= 1.0) : (std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0);
            if (inside) at(y, x) = s;
          }
      }
      n_regions = n_shapes + 1;
      break;
    }
    case SceneKind::perlin: {
      const Plane n = fractal_noise(h, w, std::max(h, w) / 3.0, 3, rng);
      constexpr int kLevels = 5;
      for (std::size_t i = 0; i < label.size(); ++i) {
        label[i] = std::min(kLevels - 1, static_cast<int>(n[i] * kLevels));
      }
      n_regions = kLevels;
      break;
    }
  }
  return label;
}

}  // namespace

std::string to_string(SceneKind k) {
  switch (k) {
    case SceneKind::gradient: return "gradient";
    case SceneKind::checker: return "checker";
    case SceneKind::shapes: return "shapes";
    case SceneKind::perlin: return "perlin";
  }
  return "?";
}

SceneKind scene_kind_from_string(const std::string& s) {
  if (s == "gradient") return SceneKind::gradient;
  if (s == "checker") return SceneKind::checker;
  if (s == "shapes") return SceneKind::shapes;
  if (s == "perlin") return SceneKind::perlin;
  throw ParameterError("unknown scene kind '" + s + "'");
}

void SceneParams::validate() const {
  if (height < 16 || width < 16) throw ParameterError("scene dimensions must be at least 16");
  if (!(dolp_max >= 0.0 && dolp_max <= 1.0)) throw ParameterError("dolp_max must be in [0, 1]");
  if (!(correlation >= 0.0 && correlation <= 1.0)) throw ParameterError("correlation must be in [0, 1]");
  if (!(texture >= 0.0 && texture <= 1.0)) throw ParameterError("texture must be in [0, 1]");
}

Scene scene_from_fields(RgbImage rgb, Plane dolp_field, Plane aolp_deg) {
  rgb.check();
  require_same_shape({&rgb.r, &dolp_field, &aolp_deg}, "scene fields");
  Scene s;
  s.rgb = std::move(rgb);
  s.dolp = std::move(dolp_field);
  s.aolp = std::move(aolp_deg);
  const int h = s.rgb.height(), w = s.rgb.width();
  s.stokes = StokesImage(h, w);
  s.stokes.s0 = rgb_to_gray(s.rgb);
  for (std::size_t i = 0; i < s.stokes.s0.size(); ++i) {
    const double two_a = 2.0 * s.aolp[i] * M_PI / 180.0;
    const double p = s.stokes.s0[i] * s.dolp[i];
    s.stokes.s1[i] = p * std::cos(two_a);
    s.stokes.s2[i] = p * std::sin(two_a);
  }
  s.angles = four_angles_from_stokes(s.stokes, /*allow_invalid=*/true);
  return s;
}

Scene generate_scene(const SceneParams& p, std::uint64_t seed) {
  p.validate();
  Rng rng(hash_key(seed, 0x5CE7E));
  const int h = p.height, w = p.width;

  int n_regions = 0;
  const std::vector<int> label = label_map(p, rng, n_regions);
  std::vector<Region> regions(static_cast<std::size_t>(n_regions));
  for (Region& r : regions) r = random_region(rng, p.dolp_max);

  const Plane texture = fractal_noise(h, w, 4.0, 2, rng);
  const Plane shade = fractal_noise(h, w, std::max(h, w) / 2.0, 2, rng);
  const Plane free_dolp = fractal_noise(h, w, std::max(h, w) / 2.0, 2, rng);
  const Plane free_aolp = fractal_noise(h, w, std::max(h, w) / 2.0, 2, rng);
  const Plane wobble = fractal_noise(h, w, std::max(h, w) / 3.0, 1, rng);

  RgbImage rgb(h, w);
  Plane dolp_field(h, w), aolp_field(h, w);
  const double c = p.correlation;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const Region& reg = regions[static_cast<std::size_t>(label[i])];
      const double u = static_cast<double>(x) / w - 0.5, v = static_cast<double>(y) / h - 0.5;
      for (int ch = 0; ch < 3; ++ch) {
        double val = reg.color[ch] + reg.color_slope[ch] * (u + v) + 0.1 * (shade[i] - 0.5) +
                     p.texture * (texture[i] - 0.5);
        if (p.kind == SceneKind::gradient) val += 0.3 * (ch == 0 ? u : (ch == 1 ? v : -u));
        rgb.channel(ch)[i] = std::clamp(val, kRgbFloor, kRgbCeil);
      }
      // Region value with a gentle in-object variation, blended with the free field.
      const double object_dolp = std::clamp(reg.dolp * (0.85 + 0.3 * wobble[i]), 0.0, p.dolp_max);
      const double d = c * object_dolp + (1.0 - c) * p.dolp_max * free_dolp[i];
      dolp_field[i] = std::clamp(d, 0.0, p.dolp_max);
      double a = reg.aolp + 20.0 * (wobble[i] - 0.5) + (1.0 - c) * 180.0 * (free_aolp[i] - 0.5);
      a = std::fmod(a, 180.0);
      if (a < 0.0) a += 180.0;
      aolp_field[i] = a;
    }
  }
  return scene_from_fields(std::move(rgb), std::move(dolp_field), std::move(aolp_field));
}

ColorStokes color_stokes(const Scene& scene) {
  const int h = scene.rgb.height(), w = scene.rgb.width();
  ColorStokes cs{StokesImage(h, w), StokesImage(h, w), StokesImage(h, w)};
  StokesImage* dst[3] = {&cs.r, &cs.g, &cs.b};
  for (std::size_t i = 0; i < scene.dolp.size(); ++i) {
    const double two_a = 2.0 * scene.aolp[i] * M_PI / 180.0;
    const double cs2 = std::cos(two_a), sn2 = std::sin(two_a);
    for (int c = 0; c < 3; ++c) {
      const double s0 = scene.rgb.channel(c)[i];
      dst[c]->s0[i] = s0;
      dst[c]->s1[i] = s0 * scene.dolp[i] * cs2;
      dst[c]->s2[i] = s0 * scene.dolp[i] * sn2;
    }
  }
  return cs;
}

Manifest make_dataset(int n_scenes, double train_ratio, double val_ratio, const DatasetConfig& config) {
  if (n_scenes < 3) throw ParameterError("a dataset needs at least 3 scenes");
  if (!(train_ratio > 0.0) || !(val_ratio > 0.0) || train_ratio + val_ratio >= 1.0) {
    throw ParameterError("split ratios must be positive and leave room for a test split");
  }
  if (config.kinds.empty()) throw ParameterError("dataset needs at least one scene kind");

  std::vector<SceneEntry> all(static_cast<std::size_t>(n_scenes));
  for (int i = 0; i < n_scenes; ++i) {
    all[static_cast<std::size_t>(i)] = {i, config.kinds[static_cast<std::size_t>(i) % config.kinds.size()],
                                        hash_key(config.seed, 0xDA7A, static_cast<std::uint64_t>(i))};
  }
  Rng rng(hash_key(config.seed, 0x5B1F7));
  for (std::size_t i = all.size() - 1; i > 0; --i) std::swap(all[i], all[rng.below(i + 1)]);

  int n_train = static_cast<int>(std::lround(n_scenes * train_ratio));
  int n_val = static_cast<int>(std::lround(n_scenes * val_ratio));
  n_train = std::clamp(n_train, 1, n_scenes - 2);
  n_val = std::clamp(n_val, 1, n_scenes - n_train - 1);

  Manifest m;
  m.train.assign(all.begin(), all.begin() + n_train);
  m.val.assign(all.begin() + n_train, all.begin() + n_train + n_val);
  m.test.assign(all.begin() + n_train + n_val, all.end());
  return m;
}

}  // namespace polarsim
