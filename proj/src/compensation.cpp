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

#include "polarsim/compensation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>
#include <vector>

namespace polarsim {

namespace {

void check_inputs(const Plane& sparse, const PixelMask& mask) {
  if (!mask.same_shape(sparse)) throw StructuralError("mask and Stokes plane dimensions differ");
  if (mask.count() == 0) throw ParameterError("mask has no set pixels");
}

void check_inputs(const StokesImage& sparse, const PixelMask& mask) {
  sparse.check();
  check_inputs(sparse.s0, mask);
}

struct Site {
  long d2;
  int y, x;
  bool operator<(const Site& o) const { return std::tie(d2, y, x) < std::tie(o.d2, o.y, o.x); }
};

// The k nearest mask sites of (y, x), ordered by (distance, row, column).
// Rings of growing Chebyshev radius are scanned until no unseen pixel can
// beat or tie the k-th candidate.
void nearest_sites(const PixelMask& mask, int y, int x, std::size_t k, std::vector<Site>& best) {
  best.clear();
  const int h = mask.height(), w = mask.width();
  const int max_r = std::max(h, w);
  auto consider = [&](int sy, int sx) {
    if (sy < 0 || sx < 0 || sy >= h || sx >= w || !mask(sy, sx)) return;
    const long dy = sy - y, dx = sx - x;
    best.push_back({dy * dy + dx * dx, sy, sx});
  };
  for (int r = 0; r <= max_r; ++r) {
    if (r == 0) {
      consider(y, x);
    } else {
      for (int dx = -r; dx <= r; ++dx) {
        consider(y - r, x + dx);
        consider(y + r, x + dx);
      }
      for (int dy = -r + 1; dy <= r - 1; ++dy) {
        consider(y + dy, x - r);
        consider(y + dy, x + r);
      }
    }
    if (best.size() >= k) {
      std::sort(best.begin(), best.end());
      best.resize(k);
      const long next = static_cast<long>(r + 1) * (r + 1);
      if (best.back().d2 < next) return;
    }
  }
  std::sort(best.begin(), best.end());
  if (best.size() > k) best.resize(k);
}

struct Lattice {
  std::vector<int> rows, cols;
};

Lattice lattice_axes(const PixelMask& mask) {
  Lattice l;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(y, x)) {
        l.rows.push_back(y);
        break;
      }
  for (int x = 0; x < mask.width(); ++x)
    for (int y = 0; y < mask.height(); ++y)
      if (mask(y, x)) {
        l.cols.push_back(x);
        break;
      }
  return l;
}

// Bracketing indices and interpolation weight of coordinate v on sorted axis.
void bracket(const std::vector<int>& axis, int v, std::size_t& i0, std::size_t& i1, double& f) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), v);
  if (it == axis.begin()) {
    i0 = i1 = 0;
    f = 0.0;
  } else if (it == axis.end()) {
    i0 = i1 = axis.size() - 1;
    f = 0.0;
  } else if (*it == v) {
    i0 = i1 = static_cast<std::size_t>(it - axis.begin());
    f = 0.0;
  } else {
    i1 = static_cast<std::size_t>(it - axis.begin());
    i0 = i1 - 1;
    f = static_cast<double>(v - axis[i0]) / static_cast<double>(axis[i1] - axis[i0]);
  }
}

}  // namespace

Plane interp_nearest(const Plane& sparse, const PixelMask& mask) {
  check_inputs(sparse, mask);
  Plane out(sparse.height(), sparse.width());
  std::vector<Site> best;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      nearest_sites(mask, y, x, 1, best);
      out.at(y, x) = sparse.at(best[0].y, best[0].x);
    }
  return out;
}

StokesImage interp_nearest(const StokesImage& sparse, const PixelMask& mask) {
  check_inputs(sparse, mask);
  StokesImage out;
  out.s0 = interp_nearest(sparse.s0, mask);
  out.s1 = interp_nearest(sparse.s1, mask);
  out.s2 = interp_nearest(sparse.s2, mask);
  return out;
}

bool is_rectilinear_lattice(const PixelMask& mask) {
  const Lattice l = lattice_axes(mask);
  std::vector<char> row_on(mask.height(), 0), col_on(mask.width(), 0);
  for (int r : l.rows) row_on[r] = 1;
  for (int c : l.cols) col_on[c] = 1;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(y, x) != (row_on[y] && col_on[x])) return false;
  return true;
}

Plane interp_bilinear_scattered(const Plane& sparse, const PixelMask& mask) {
  check_inputs(sparse, mask);
  Plane out(sparse.height(), sparse.width());
  if (is_rectilinear_lattice(mask)) {
    const Lattice l = lattice_axes(mask);
    for (int y = 0; y < out.height(); ++y) {
      std::size_t r0, r1;
      double fy;
      bracket(l.rows, y, r0, r1, fy);
      for (int x = 0; x < out.width(); ++x) {
        std::size_t c0, c1;
        double fx;
        bracket(l.cols, x, c0, c1, fx);
        const double top = (1 - fx) * sparse.at(l.rows[r0], l.cols[c0]) + fx * sparse.at(l.rows[r0], l.cols[c1]);
        const double bot = (1 - fx) * sparse.at(l.rows[r1], l.cols[c0]) + fx * sparse.at(l.rows[r1], l.cols[c1]);
        out.at(y, x) = (1 - fy) * top + fy * bot;
      }
    }
    return out;
  }

  std::vector<Site> best;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      nearest_sites(mask, y, x, 4, best);
      if (best[0].d2 == 0) {
        out.at(y, x) = sparse.at(y, x);
        continue;
      }
      double num = 0.0, den = 0.0;
      for (const Site& s : best) {
        const double wgt = 1.0 / static_cast<double>(s.d2);
        num += wgt * sparse.at(s.y, s.x);
        den += wgt;
      }
      out.at(y, x) = num / den;
    }
  return out;
}

StokesImage interp_bilinear_scattered(const StokesImage& sparse, const PixelMask& mask) {
  check_inputs(sparse, mask);
  StokesImage out;
  out.s0 = interp_bilinear_scattered(sparse.s0, mask);
  out.s1 = interp_bilinear_scattered(sparse.s1, mask);
  out.s2 = interp_bilinear_scattered(sparse.s2, mask);
  return out;
}

StokesImage joint_bilateral(const StokesImage& sparse, const PixelMask& mask, const RgbImage& guide,
                            const BilateralParams& params) {
  check_inputs(sparse, mask);
  guide.check();
  if (!mask.same_shape(guide.r)) throw StructuralError("guide and Stokes dimensions differ");
  if (!(params.sigma_spatial > 0.0) || !(params.sigma_range > 0.0)) {
    throw ParameterError("bilateral sigmas must be positive");
  }
  const int h = sparse.height(), w = sparse.width();
  const int radius = static_cast<int>(std::ceil(3.0 * params.sigma_spatial));
  const double inv_s = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
  const double inv_r = 1.0 / (2.0 * params.sigma_range * params.sigma_range);

  StokesImage out(h, w);
  const Plane* in[3] = {&sparse.s0, &sparse.s1, &sparse.s2};
  Plane* dst[3] = {&out.s0, &out.s1, &out.s2};
  std::vector<Site> best;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(y, x)) {
        for (int k = 0; k < 3; ++k) dst[k]->at(y, x) = in[k]->at(y, x);
        continue;
      }
      const double gr = guide.r.at(y, x), gg = guide.g.at(y, x), gb = guide.b.at(y, x);
      double num[3] = {0, 0, 0};
      double den = 0.0;
      for (int qy = std::max(0, y - radius); qy <= std::min(h - 1, y + radius); ++qy) {
        for (int qx = std::max(0, x - radius); qx <= std::min(w - 1, x + radius); ++qx) {
          if (!mask(qy, qx)) continue;
          const double dy = qy - y, dx = qx - x;
          const double cr = gr - guide.r.at(qy, qx), cg = gg - guide.g.at(qy, qx), cb = gb - guide.b.at(qy, qx);
          const double wgt = std::exp(-(dy * dy + dx * dx) * inv_s) * std::exp(-(cr * cr + cg * cg + cb * cb) * inv_r);
          for (int k = 0; k < 3; ++k) num[k] += wgt * in[k]->at(qy, qx);
          den += wgt;
        }
      }
      if (den > 0.0) {
        for (int k = 0; k < 3; ++k) dst[k]->at(y, x) = num[k] / den;
      } else {
        nearest_sites(mask, y, x, 1, best);
        for (int k = 0; k < 3; ++k) dst[k]->at(y, x) = in[k]->at(best[0].y, best[0].x);
      }
    }
  }
  return out;
}

BilateralParams default_bilateral_params(int tile_side) {
  return {std::max(1.0, tile_side / 2.0), 0.1};
}

}  // namespace polarsim
