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

// Planar image containers shared by every module.
//
// All planes store double-precision samples in row-major order. Files on disk
// use float32 (see polr_io.hpp); the in-memory path keeps float64 so that the
// oracle comparisons and gradient checks run at full precision.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "polarsim/error.hpp"

namespace polarsim {

/// Single row-major plane of doubles.
class Plane {
 public:
  Plane() = default;
  Plane(int height, int width, double fill = 0.0)
      : height_(height), width_(width), data_(checked_size(height, width), fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int y, int x) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Plane& o) const { return height_ == o.height_ && width_ == o.width_; }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  static std::size_t checked_size(int h, int w) {
    if (h < 0 || w < 0) throw ParameterError("plane dimensions must be non-negative");
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Throws StructuralError unless every plane matches the first one.
void require_same_shape(std::initializer_list<const Plane*> planes, const char* what);

/// Per-pixel linear Stokes components; S3 is not represented.
struct StokesImage {
  Plane s0, s1, s2;

  StokesImage() = default;
  StokesImage(int height, int width) : s0(height, width), s1(height, width), s2(height, width) {}

  int height() const { return s0.height(); }
  int width() const { return s0.width(); }
  void check() const { require_same_shape({&s0, &s1, &s2}, "StokesImage"); }
};

enum class Density { dense, sparse };

/// Intensities behind polarizers at 0, 45, 90 and 135 degrees.
struct FourAngleImage {
  Plane l0, l45, l90, l135;
  Density density = Density::dense;

  FourAngleImage() = default;
  FourAngleImage(int height, int width, Density d = Density::dense)
      : l0(height, width), l45(height, width), l90(height, width), l135(height, width), density(d) {}

  int height() const { return l0.height(); }
  int width() const { return l0.width(); }
  void check() const { require_same_shape({&l0, &l45, &l90, &l135}, "FourAngleImage"); }
  Plane& angle(int index);
  const Plane& angle(int index) const;
};

struct RgbImage {
  Plane r, g, b;

  RgbImage() = default;
  RgbImage(int height, int width) : r(height, width), g(height, width), b(height, width) {}

  int height() const { return r.height(); }
  int width() const { return r.width(); }
  void check() const { require_same_shape({&r, &g, &b}, "RgbImage"); }
  Plane& channel(int c) { return c == 0 ? r : (c == 1 ? g : b); }
  const Plane& channel(int c) const { return c == 0 ? r : (c == 1 ? g : b); }
};

using GrayImage = Plane;

/// Binary mask, 1 where a polarization sample exists.
class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(int height, int width) : height_(height), width_(width), m_(static_cast<std::size_t>(height) * width, 0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  bool operator()(int y, int x) const { return m_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int y, int x, bool v) { m_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::size_t count() const;
  bool same_shape(const Plane& p) const { return p.height() == height_ && p.width() == width_; }
  const std::vector<std::uint8_t>& bits() const { return m_; }

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> m_;
};

/// Reflect-101 border index (…2 1 | 0 1 2 … n-1 | n-2 …).
inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace polarsim
