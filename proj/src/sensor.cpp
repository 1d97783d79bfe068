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

#include "polarsim/sensor.hpp"

#include <algorithm>
#include <cmath>

#include "polarsim/rng.hpp"

namespace polarsim {

namespace {

// Angle inside a 2x2 polarizer cell, indexed by (y & 1, x & 1).
constexpr PixelClass kCellAngles[2][2] = {{PixelClass::P90, PixelClass::P45}, {PixelClass::P135, PixelClass::P0}};

FilterColor quad_color(ColorOrder order, int y, int x) {
  const int cy = (y / 2) & 1;
  const int cx = (x / 2) & 1;
  const int cell = cy * 2 + cx;
  static constexpr FilterColor kR = FilterColor::R, kG = FilterColor::G, kB = FilterColor::B;
  static constexpr FilterColor kPatterns[4][4] = {
      {kR, kG, kG, kB},  // RGGB
      {kB, kG, kG, kR},  // BGGR
      {kG, kR, kB, kG},  // GRBG
      {kG, kB, kR, kG},  // GBRG
  };
  return kPatterns[static_cast<int>(order)][cell];
}

PixelClass class_of_color(FilterColor c) {
  switch (c) {
    case FilterColor::R: return PixelClass::R;
    case FilterColor::G: return PixelClass::G;
    default: return PixelClass::B;
  }
}

}  // namespace

char class_glyph(PixelClass c) {
  switch (c) {
    case PixelClass::R: return 'R';
    case PixelClass::G: return 'G';
    case PixelClass::B: return 'B';
    case PixelClass::P0: return 'a';
    case PixelClass::P45: return 'b';
    case PixelClass::P90: return 'c';
    case PixelClass::P135: return 'd';
  }
  return '?';
}

PixelClass class_from_glyph(char c) {
  switch (c) {
    case 'R': return PixelClass::R;
    case 'G': return PixelClass::G;
    case 'B': return PixelClass::B;
    case 'a': return PixelClass::P0;
    case 'b': return PixelClass::P45;
    case 'c': return PixelClass::P90;
    case 'd': return PixelClass::P135;
    default: throw FormatError(std::string("unknown pixel class glyph '") + c + "'");
  }
}

std::string to_string(SensorKind k) { return k == SensorKind::sparse ? "sparse" : "conventional"; }

SensorKind sensor_kind_from_string(const std::string& s) {
  if (s == "sparse") return SensorKind::sparse;
  if (s == "conventional") return SensorKind::conventional;
  throw ParameterError("unknown sensor layout '" + s + "' (expected conventional or sparse)");
}

ColorOrder color_order_from_string(const std::string& s) {
  if (s == "RGGB") return ColorOrder::RGGB;
  if (s == "BGGR") return ColorOrder::BGGR;
  if (s == "GRBG") return ColorOrder::GRBG;
  if (s == "GBRG") return ColorOrder::GBRG;
  throw ParameterError("unknown color order '" + s + "'");
}

void SensorConfig::validate() const {
  if (r_denominator < 1) throw ParameterError("r denominator must be >= 1");
  if (!(t > 0.0 && t <= 1.0)) throw ParameterError("transmittance t must be in (0, 1]");
  if (!(f_n >= 0.0) || !std::isfinite(f_n)) throw ParameterError("noise factor must be finite and >= 0");
  if (!(q_e > 0.0 && q_e <= 1.0)) throw ParameterError("quantum efficiency must be in (0, 1]");
  if (!(full_scale > 0.0) || !std::isfinite(full_scale)) throw ParameterError("full_scale must be positive");
}

std::size_t SensorLayout::count(PixelClass c) const {
  return static_cast<std::size_t>(std::count(grid_.begin(), grid_.end(), c));
}

std::size_t SensorLayout::polarized_count() const {
  return static_cast<std::size_t>(std::count_if(grid_.begin(), grid_.end(), is_polarized));
}

PixelMask SensorLayout::mask() const {
  PixelMask m(height_, width_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) m.set(y, x, is_polarized(at(y, x)));
  return m;
}

std::string SensorLayout::to_text() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(height_) * (width_ + 1));
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out.push_back(class_glyph(at(y, x)));
    out.push_back('\n');
  }
  return out;
}

int sparse_tile_side(int r_denominator) {
  if (r_denominator < 4) return 0;
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r_denominator))));
  if (root * root != r_denominator || root % 2 != 0) return 0;
  return 2 * root;  // tile area 4 * D holds one 2x2 cluster
}

SensorLayout build_layout(SensorKind kind, int height, int width, int r_denominator, ColorOrder order) {
  SensorLayout l;
  l.kind_ = kind;
  l.height_ = height;
  l.width_ = width;
  if (kind == SensorKind::conventional) {
    if (r_denominator != 1) throw ParameterError("conventional layout requires r = 1");
    l.tile_ = 4;
  } else {
    l.tile_ = sparse_tile_side(r_denominator);
    if (l.tile_ == 0) {
      throw ParameterError("unsupported sparse ratio 1/" + std::to_string(r_denominator) +
                           " (denominator must be an even square, e.g. 4, 16, 64)");
    }
  }
  l.r_den_ = r_denominator;
  if (height <= 0 || width <= 0 || height % l.tile_ != 0 || width % l.tile_ != 0) {
    throw ParameterError("layout dimensions " + std::to_string(height) + "x" + std::to_string(width) +
                         " must be positive multiples of " + std::to_string(l.tile_));
  }

  const std::size_t n = static_cast<std::size_t>(height) * width;
  l.grid_.resize(n);
  l.color_.resize(n);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = l.idx(y, x);
      const FilterColor color = quad_color(order, y, x);
      if (kind == SensorKind::conventional) {
        l.grid_[i] = kCellAngles[y & 1][x & 1];
        l.color_[i] = color;
        continue;
      }
      const int ty = y % l.tile_;
      const int tx = x % l.tile_;
      if (ty < 2 && tx >= 2 && tx < 4) {
        l.grid_[i] = kCellAngles[ty][tx - 2];
        l.color_[i] = FilterColor::W;
      } else {
        l.grid_[i] = class_of_color(color);
        l.color_[i] = color;
      }
    }
  }
  return l;
}

SensorLayout layout_from_classes(SensorKind kind, int height, int width, const std::vector<PixelClass>& classes,
                                 ColorOrder order) {
  if (classes.size() != static_cast<std::size_t>(height) * width) {
    throw FormatError("class grid size does not match dimensions");
  }
  int r_den = 1;
  if (kind == SensorKind::sparse) {
    const auto pol = static_cast<std::size_t>(std::count_if(classes.begin(), classes.end(), is_polarized));
    if (pol == 0 || classes.size() % pol != 0) throw FormatError("class grid has no valid polarization ratio");
    r_den = static_cast<int>(classes.size() / pol);
  }
  SensorLayout l = build_layout(kind, height, width, r_den, order);
  if (l.grid_ != classes) throw FormatError("class grid does not match a supported layout");
  return l;
}

StokesImage gray_stokes(const ColorStokes& scene, const GrayWeights& w) {
  for (int c = 0; c < 3; ++c) scene.channel(c).check();
  require_same_shape({&scene.r.s0, &scene.g.s0, &scene.b.s0}, "ColorStokes");
  StokesImage out(scene.height(), scene.width());
  const Plane* in[3][3] = {{&scene.r.s0, &scene.g.s0, &scene.b.s0},
                           {&scene.r.s1, &scene.g.s1, &scene.b.s1},
                           {&scene.r.s2, &scene.g.s2, &scene.b.s2}};
  Plane* dst[3] = {&out.s0, &out.s1, &out.s2};
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < out.s0.size(); ++i) {
      (*dst[k])[i] = w.r * (*in[k][0])[i] + w.g * (*in[k][1])[i] + w.b * (*in[k][2])[i];
    }
  }
  return out;
}

RawFrame capture(const ColorStokes& scene, const SensorLayout& layout, const SensorConfig& config) {
  config.validate();
  for (int c = 0; c < 3; ++c) scene.channel(c).check();
  if (scene.height() != layout.height() || scene.width() != layout.width() || scene.g.height() != layout.height() ||
      scene.b.width() != layout.width()) {
    throw StructuralError("scene dimensions do not match sensor layout");
  }

  const StokesImage white = gray_stokes(scene, config.gray);
  RawFrame raw{Plane(layout.height(), layout.width()), layout, config};
  const double half_t = config.t / 2.0;
  const double fs = config.full_scale;

  for (int y = 0; y < layout.height(); ++y) {
    for (int x = 0; x < layout.width(); ++x) {
      const PixelClass cls = layout.at(y, x);
      const FilterColor color = layout.color_at(y, x);
      const StokesImage& src = color == FilterColor::W ? white : scene.channel(static_cast<int>(color));
      double v;
      if (is_polarized(cls)) {
        const auto l = angles_from_stokes<double>({src.s0.at(y, x), src.s1.at(y, x), src.s2.at(y, x)});
        const double li[4] = {l.l0, l.l45, l.l90, l.l135};
        v = half_t * li[angle_index(cls)];
      } else {
        v = src.s0.at(y, x);
      }
      if (config.f_n > 0.0) {
        const double photons = std::max(v, 0.0) * fs;
        const double sigma = config.f_n * std::sqrt(photons);
        v += sigma * keyed_normal(config.seed, 0x5EED0001u, static_cast<std::uint64_t>(y),
                                  static_cast<std::uint64_t>(x)) / fs;
      }
      raw.values.at(y, x) = std::max(v, 0.0);
    }
  }
  return raw;
}

SnrReport snr_analysis(const SensorConfig& config) {
  config.validate();
  const double s = config.full_scale;
  SnrReport r;
  r.snr_regular = std::sqrt(config.q_e * s);
  r.snr_polarized = std::sqrt(config.t * config.q_e * s / 2.0);
  r.snr_conventional_rgb = std::sqrt(2.0 * config.t * config.q_e * s);
  r.snr_sparse_rgb = r.snr_regular;
  r.rgb_snr_ratio = std::sqrt(1.0 / (2.0 * config.t));
  return r;
}

ResolutionReport resolution_analysis(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("r must be in [0, 1]");
  return {4.0 * (1.0 - r), r};
}

}  // namespace polarsim
