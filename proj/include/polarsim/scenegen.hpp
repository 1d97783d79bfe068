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

// Procedural ground-truth scenes.
//
// A scene is an RGB image plus DoLP and AoLP fields. Stokes planes follow
// from them: S0 is the grayscale of the RGB image, S1 = S0 dolp cos(2 aolp),
// S2 = S0 dolp sin(2 aolp). Each color channel carries the same DoLP/AoLP, so
// the white-filter Stokes of the per-channel scene equals the gray Stokes.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarsim/image.hpp"
#include "polarsim/sensor.hpp"

namespace polarsim {

enum class SceneKind { gradient, checker, shapes, perlin };

std::string to_string(SceneKind k);
SceneKind scene_kind_from_string(const std::string& s);

struct SceneParams {
  SceneKind kind = SceneKind::shapes;
  int height = 64;
  int width = 64;
  /// Upper bound of the DoLP field, in [0, 1].
  double dolp_max = 0.9;
  /// 1: DoLP/AoLP change only at object boundaries of the RGB image;
  /// 0: they follow an independent smooth field.
  double correlation = 0.85;
  /// Amplitude of fine RGB texture.
  double texture = 0.12;
  void validate() const;
};

struct Scene {
  RgbImage rgb;
  StokesImage stokes;       // scene-referred, grayscale
  FourAngleImage angles;    // forward model of `stokes`
  Plane dolp;               // requested DoLP field
  Plane aolp;               // requested AoLP field, degrees
};

/// Deterministic for a given (params, seed). Throws ParameterError when the
/// dimensions are below 16 or the knobs are out of range.
Scene generate_scene(const SceneParams& params, std::uint64_t seed);

/// Builds a scene from explicit RGB and polarization fields.
Scene scene_from_fields(RgbImage rgb, Plane dolp_field, Plane aolp_deg);

/// Per-channel Stokes of a scene (input of the capture simulation).
ColorStokes color_stokes(const Scene& scene);

struct SceneEntry {
  int index = 0;
  SceneKind kind = SceneKind::shapes;
  std::uint64_t seed = 0;
  friend bool operator==(const SceneEntry&, const SceneEntry&) = default;
};

struct Manifest {
  std::vector<SceneEntry> train, val, test;
};

struct DatasetConfig {
  std::uint64_t seed = 1;
  std::vector<SceneKind> kinds = {SceneKind::shapes, SceneKind::checker, SceneKind::perlin, SceneKind::gradient};
};

/// Shuffled, disjoint train/val/test split of n scenes. Split sizes are
/// round(n * train), round(n * val) and the remainder, each at least one.
Manifest make_dataset(int n_scenes, double train_ratio, double val_ratio, const DatasetConfig& config);

}  // namespace polarsim
