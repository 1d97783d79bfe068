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

#include "polarsim/raw_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace polarsim {

namespace {

struct Sample {
  int y, x;
  double inv_d2;
};

// Same-class samples around (y, x), searched in growing squares so that a
// sample is always found.
void gather(const SensorLayout& layout, PixelClass cls, int y, int x, int radius, std::vector<Sample>& out) {
  out.clear();
  const int h = layout.height(), w = layout.width();
  for (int r = radius; out.empty() && r <= std::max(h, w); r += 2) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dy == 0 && dx == 0) continue;
        const int sy = reflect101(y + dy, h);
        const int sx = reflect101(x + dx, w);
        if (layout.at(sy, sx) == cls) out.push_back({sy, sx, 1.0 / (dy * dy + dx * dx)});
      }
    }
  }
}

// Bilinear fill of a Bayer mosaic at cell level; `color` gives each cell's filter.
RgbImage demosaic_bayer(const Plane& mosaic, const std::vector<FilterColor>& color) {
  const int h = mosaic.height(), w = mosaic.width();
  RgbImage out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto own = static_cast<int>(color[static_cast<std::size_t>(y) * w + x]);
      for (int c = 0; c < 3; ++c) {
        if (c == own) {
          out.channel(c).at(y, x) = mosaic.at(y, x);
          continue;
        }
        double num = 0.0, den = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int sy = reflect101(y + dy, h), sx = reflect101(x + dx, w);
            if (static_cast<int>(color[static_cast<std::size_t>(sy) * w + sx]) != c) continue;
            const double wgt = 1.0 / (dy * dy + dx * dx);
            num += wgt * mosaic.at(sy, sx);
            den += wgt;
          }
        }
        out.channel(c).at(y, x) = num / den;
      }
    }
  }
  return out;
}

}  // namespace

SparseDemosaic demosaic_sparse(const RawFrame& raw, const DemosaicOptions& opts) {
  const SensorLayout& layout = raw.layout;
  if (layout.kind() != SensorKind::sparse) throw StructuralError("demosaic_sparse needs a sparse layout");
  if (raw.values.height() != layout.height() || raw.values.width() != layout.width()) {
    throw StructuralError("raw frame does not match its layout");
  }
  if (!(opts.range_sigma > 0.0)) throw ParameterError("range_sigma must be positive");
  const int h = layout.height(), w = layout.width();

  SparseDemosaic out{RgbImage(h, w), FourAngleImage(h, w, Density::sparse), layout.mask()};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const PixelClass cls = layout.at(y, x);
      if (is_polarized(cls)) out.angles.angle(angle_index(cls)).at(y, x) = raw.values.at(y, x);
    }
  }

  constexpr PixelClass kColors[3] = {PixelClass::R, PixelClass::G, PixelClass::B};
  std::vector<Sample> samples;

  // Pass 1: inverse-distance-squared fill.
  for (int c = 0; c < 3; ++c) {
    Plane& plane = out.rgb.channel(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (layout.at(y, x) == kColors[c]) {
          plane.at(y, x) = raw.values.at(y, x);
          continue;
        }
        gather(layout, kColors[c], y, x, 2, samples);
        double num = 0.0, den = 0.0;
        for (const Sample& s : samples) {
          num += s.inv_d2 * raw.values.at(s.y, s.x);
          den += s.inv_d2;
        }
        plane.at(y, x) = num / den;
      }
    }
  }

  // Pass 2: luminance-guided re-weighting.
  const Plane luma = rgb_to_gray(out.rgb);
  const double inv_2s2 = 1.0 / (2.0 * opts.range_sigma * opts.range_sigma);
  RgbImage refined = out.rgb;
  for (int c = 0; c < 3; ++c) {
    Plane& plane = refined.channel(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (layout.at(y, x) == kColors[c]) continue;
        gather(layout, kColors[c], y, x, 2, samples);
        const double yp = luma.at(y, x);
        double num = 0.0, den = 0.0;
        for (const Sample& s : samples) {
          const double dl = yp - luma.at(s.y, s.x);
          const double wgt = s.inv_d2 * std::exp(-dl * dl * inv_2s2);
          num += wgt * raw.values.at(s.y, s.x);
          den += wgt;
        }
        if (den > 0.0) plane.at(y, x) = num / den;
      }
    }
  }
  out.rgb = std::move(refined);
  return out;
}

BinnedFrame bin_conventional(const RawFrame& raw, const GrayWeights& gray) {
  const SensorLayout& layout = raw.layout;
  if (layout.kind() != SensorKind::conventional) throw StructuralError("bin_conventional needs a conventional layout");
  if (layout.height() % 4 != 0 || layout.width() % 4 != 0) {
    throw ParameterError("conventional frame dimensions must be divisible by 4");
  }
  if (raw.values.height() != layout.height() || raw.values.width() != layout.width()) {
    throw StructuralError("raw frame does not match its layout");
  }
  const int ch = layout.height() / 2, cw = layout.width() / 2;

  std::vector<FilterColor> cell_color(static_cast<std::size_t>(ch) * cw);
  Plane unpolarized(ch, cw);
  Plane per_angle[4] = {Plane(ch, cw), Plane(ch, cw), Plane(ch, cw), Plane(ch, cw)};
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      double sum = 0.0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int y = 2 * cy + dy, x = 2 * cx + dx;
          const double v = raw.values.at(y, x);
          sum += v;
          per_angle[angle_index(layout.at(y, x))].at(cy, cx) = v;
        }
      }
      unpolarized.at(cy, cx) = sum / 4.0;
      cell_color[static_cast<std::size_t>(cy) * cw + cx] = layout.color_at(2 * cy, 2 * cx);
    }
  }

  BinnedFrame out{demosaic_bayer(unpolarized, cell_color), FourAngleImage(ch, cw, Density::dense)};
  for (int a = 0; a < 4; ++a) out.angles.angle(a) = rgb_to_gray(demosaic_bayer(per_angle[a], cell_color), gray);
  return out;
}

Plane upsample_bilinear(const Plane& in, int factor) {
  if (factor < 1) throw ParameterError("upsampling factor must be >= 1");
  const int h = in.height(), w = in.width();
  Plane out(h * factor, w * factor);
  auto coord = [factor](int o, int n, int& i0, int& i1, double& f) {
    double s = (o + 0.5) / factor - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, n - 1);
    f = s - i0;
  };
  for (int oy = 0; oy < out.height(); ++oy) {
    int y0, y1;
    double fy;
    coord(oy, h, y0, y1, fy);
    for (int ox = 0; ox < out.width(); ++ox) {
      int x0, x1;
      double fx;
      coord(ox, w, x0, x1, fx);
      const double top = (1 - fx) * in.at(y0, x0) + fx * in.at(y0, x1);
      const double bot = (1 - fx) * in.at(y1, x0) + fx * in.at(y1, x1);
      out.at(oy, ox) = (1 - fy) * top + fy * bot;
    }
  }
  return out;
}

RgbImage upsample_bilinear(const RgbImage& in, int factor) {
  RgbImage out;
  out.r = upsample_bilinear(in.r, factor);
  out.g = upsample_bilinear(in.g, factor);
  out.b = upsample_bilinear(in.b, factor);
  return out;
}

StokesImage upsample_bilinear(const StokesImage& in, int factor) {
  StokesImage out;
  out.s0 = upsample_bilinear(in.s0, factor);
  out.s1 = upsample_bilinear(in.s1, factor);
  out.s2 = upsample_bilinear(in.s2, factor);
  return out;
}

Plane downsample_box(const Plane& in, int factor) {
  if (factor < 1 || in.height() % factor != 0 || in.width() % factor != 0) {
    throw ParameterError("downsampling factor must divide the plane dimensions");
  }
  Plane out(in.height() / factor, in.width() / factor);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      double s = 0.0;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx) s += in.at(y * factor + dy, x * factor + dx);
      out.at(y, x) = s * inv;
    }
  return out;
}

SparseStokes cluster_stokes(const FourAngleImage& sparse_angles, const SensorLayout& layout) {
  sparse_angles.check();
  if (layout.kind() != SensorKind::sparse) throw StructuralError("cluster_stokes needs a sparse layout");
  if (sparse_angles.height() != layout.height() || sparse_angles.width() != layout.width()) {
    throw StructuralError("four-angle image does not match layout");
  }
  SparseStokes out{StokesImage(layout.height(), layout.width()), layout.mask()};
  // Clusters are 2x2 blocks aligned to even coordinates.
  for (int y = 0; y < layout.height(); y += 2) {
    for (int x = 0; x < layout.width(); x += 2) {
      if (!is_polarized(layout.at(y, x))) continue;
      double l[4] = {0, 0, 0, 0};
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const int a = angle_index(layout.at(y + dy, x + dx));
          l[a] = sparse_angles.angle(a).at(y + dy, x + dx);
        }
      const auto s = stokes_from_angles<double>({l[0], l[1], l[2], l[3]});
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          out.stokes.s0.at(y + dy, x + dx) = s.s0;
          out.stokes.s1.at(y + dy, x + dx) = s.s1;
          out.stokes.s2.at(y + dy, x + dx) = s.s2;
        }
    }
  }
  return out;
}

}  // namespace polarsim
