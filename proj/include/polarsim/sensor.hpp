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

// Sensor layouts and capture simulation.
//
// Both layouts are built on a Quad Bayer color array: every Bayer cell spans a
// 2x2 pixel block, so the color pattern repeats every 4x4 pixels.
//
//  * conventional: every pixel sits behind a polarizer; each 2x2 same-color
//    cell carries the four angles as  [ 90  45 ]
//                                     [135   0 ].
//  * sparse: a fraction r = 1/D of the pixels are polarization pixels with a
//    white filter. They form one 2x2 cluster (same angle arrangement) per
//    square tile of side 2*sqrt(D); the cluster replaces the Quad Bayer cell
//    at rows 0-1, columns 2-3 of the tile. With the default RGGB order that
//    is a green cell, so red and blue are never starved, even for r = 1/4.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarsim/image.hpp"
#include "polarsim/stokes.hpp"

namespace polarsim {

enum class PixelClass : std::uint8_t { R, G, B, P0, P45, P90, P135 };
enum class FilterColor : std::uint8_t { R, G, B, W };
enum class SensorKind { conventional, sparse };
enum class ColorOrder { RGGB, BGGR, GRBG, GBRG };

inline bool is_polarized(PixelClass c) { return c >= PixelClass::P0; }
/// 0..3 for P0..P135.
inline int angle_index(PixelClass c) { return static_cast<int>(c) - static_cast<int>(PixelClass::P0); }
inline PixelClass polarized_class(int angle_idx) {
  return static_cast<PixelClass>(static_cast<int>(PixelClass::P0) + angle_idx);
}

char class_glyph(PixelClass c);
PixelClass class_from_glyph(char c);

std::string to_string(SensorKind k);
SensorKind sensor_kind_from_string(const std::string& s);
ColorOrder color_order_from_string(const std::string& s);

struct SensorConfig {
  /// Polarization ratio r = 1 / r_denominator. Conventional sensors use 1.
  int r_denominator = 16;
  double t = 0.7;
  double f_n = 0.72;
  double q_e = 1.0;
  /// Photon count that corresponds to a normalized value of 1.0.
  double full_scale = 1000.0;
  std::uint64_t seed = 1;
  ColorOrder color_order = ColorOrder::RGGB;
  GrayWeights gray;

  double r() const { return 1.0 / r_denominator; }
  void validate() const;
};

class SensorLayout {
 public:
  SensorLayout() = default;

  int height() const { return height_; }
  int width() const { return width_; }
  SensorKind kind() const { return kind_; }
  int r_denominator() const { return r_den_; }
  /// Side of the repeating tile (4 for conventional).
  int tile() const { return tile_; }

  PixelClass at(int y, int x) const { return grid_[idx(y, x)]; }
  FilterColor color_at(int y, int x) const { return color_[idx(y, x)]; }
  std::size_t count(PixelClass c) const;
  std::size_t polarized_count() const;
  PixelMask mask() const;

  /// One glyph per pixel, rows separated by '\n'.
  std::string to_text() const;

  friend bool operator==(const SensorLayout&, const SensorLayout&) = default;

 private:
  friend SensorLayout build_layout(SensorKind, int, int, int, ColorOrder);
  friend SensorLayout layout_from_classes(SensorKind, int, int, const std::vector<PixelClass>&, ColorOrder);
  std::size_t idx(int y, int x) const { return static_cast<std::size_t>(y) * width_ + x; }

  int height_ = 0;
  int width_ = 0;
  SensorKind kind_ = SensorKind::sparse;
  int r_den_ = 16;
  int tile_ = 8;
  std::vector<PixelClass> grid_;
  std::vector<FilterColor> color_;
};

/// Side of the sparse tile for r = 1/r_denominator, or 0 if unsupported.
int sparse_tile_side(int r_denominator);

/// Deterministic layout. Throws ParameterError for unsupported r or
/// dimensions that are not multiples of the tile.
SensorLayout build_layout(SensorKind kind, int height, int width, int r_denominator,
                          ColorOrder order = ColorOrder::RGGB);

/// Rebuilds a layout from a stored class grid; throws FormatError when the
/// grid is not one that build_layout produces.
SensorLayout layout_from_classes(SensorKind kind, int height, int width, const std::vector<PixelClass>& classes,
                                 ColorOrder order = ColorOrder::RGGB);

/// Scene Stokes for each color channel.
struct ColorStokes {
  StokesImage r, g, b;
  int height() const { return r.height(); }
  int width() const { return r.width(); }
  const StokesImage& channel(int c) const { return c == 0 ? r : (c == 1 ? g : b); }
};

/// Stokes seen through a white filter: B applied to the per-channel Stokes.
StokesImage gray_stokes(const ColorStokes& scene, const GrayWeights& w = {});

struct RawFrame {
  Plane values;
  SensorLayout layout;
  SensorConfig config;
};

/// Simulated exposure: regular pixels read their channel's s0, polarization
/// pixels read t/2 * l(theta), then Gaussian shot noise with std
/// f_n * sqrt(photons) is added and the result clamped at zero.
RawFrame capture(const ColorStokes& scene, const SensorLayout& layout, const SensorConfig& config);

struct SnrReport {
  double snr_regular = 0;
  double snr_polarized = 0;
  double snr_conventional_rgb = 0;
  double snr_sparse_rgb = 0;
  double rgb_snr_ratio = 0;
};

SnrReport snr_analysis(const SensorConfig& config);

struct ResolutionReport {
  double rgb_factor = 0;
  double pol_factor = 0;
};

/// Resolution relative to the conventional sensor. Throws for r outside [0, 1].
ResolutionReport resolution_analysis(double r);

}  // namespace polarsim
