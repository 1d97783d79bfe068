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

// Toy-scale Stokes network.
//
// Dataflow for the default mode (stokes_s12):
//
//   demosaiced RGB G, sparse Stokes S, mask M
//     -> RGB refinement:   G^ = G + residual(G, S0, S1, S2, M)
//     -> compensation:     two U-shaped branches over (G^, S1, S2, M),
//                          blended per pixel by softmax of their confidences
//     -> S0^ = gain * B * G^   (never touched by the compensation weights)
//
// The two other modes replace the compensation target: four_angle predicts
// the four polarizer images and converts them with the Stokes matrix;
// stokes_full predicts S0, S1 and S2 directly.
//
// Both branches predict a residual over a dense prefill (bilinear
// interpolation of the sparse Stokes, expressed in the target domain). The
// heads start at zero, so an untrained network reproduces the prefill. The
// first branch also sees an edge-aware prefill (joint bilateral, guided by
// the demosaiced RGB) as an extra input feature.
//
// Branch layout (C = base_channels, level l has C * 2^l channels and 1/2^l
// resolution):
//
//   encoder  e0 = relu(conv(in)),  el = relu(conv_s2(e(l-1)))
//   decoder  d(D-1) = e(D-1)
//            dl = relu(conv(skip(el, relu(tconv(d(l+1))))))
//   head     conv(concat(d0, in)) -> k outputs + 1 confidence (no ReLU)
//
// The first branch uses attention-weighted skips (AFA) when enabled. The
// second branch adds the first branch's decoder features to its encoder
// features at every level, through a feature transfer block (FTB) when
// enabled.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polarsim/autodiff.hpp"
#include "polarsim/stokes.hpp"

namespace polarsim {

enum class SnaMode { four_angle, stokes_full, stokes_s12 };

std::string to_string(SnaMode m);
SnaMode sna_mode_from_string(const std::string& s);

struct ModelConfig {
  int base_channels = 8;
  int depth = 3;
  SnaMode mode = SnaMode::stokes_s12;
  bool use_rgbrn = true;
  bool use_ftb = true;
  bool use_afa = true;
  /// Sensitivity gain g; t/2 for the default transmittance.
  double gain = 0.35;
  bool learn_gain = false;
  std::uint64_t seed = 1;
  GrayWeights gray;

  void validate() const;
};

/// Named learnable tensors in registration order.
class ModelParams {
 public:
  /// Throws StructuralError if the name is already registered.
  ad::Var add(const std::string& name, ad::Tensor value);
  /// Throws StructuralError for unknown names.
  const ad::Var& get(const std::string& name) const;
  bool has(const std::string& name) const;

  const std::vector<std::pair<std::string, ad::Var>>& entries() const { return entries_; }
  std::size_t scalar_count() const;

  /// Independent copy of all values (gradients are not copied).
  ModelParams clone() const;
  void zero_grad();
  /// Copies values from another set with identical names and shapes.
  void assign(const ModelParams& other);

 private:
  std::vector<std::pair<std::string, ad::Var>> entries_;
};

/// Kaiming fan-in init; residual output heads start at zero.
ModelParams init_params(const ModelConfig& config);

// --- Blocks ----------------------------------------------------------------

/// conv with weights `<name>.w` and bias `<name>.b`.
ad::Var conv(const ModelParams& p, const std::string& name, const ad::Var& x, int stride = 1);

/// x + conv3x3(relu(conv1x1(x))).
ad::Var ftb(const ModelParams& p, const std::string& prefix, const ad::Var& x);

/// Channel weights in (0, 1) from the pooled encoder and decoder features.
ad::Var afa_weights(const ModelParams& p, const std::string& prefix, const ad::Var& enc, const ad::Var& dec);
/// decoder + w * encoder, with w broadcast over H and W.
ad::Var attention_fuse(const ad::Var& enc, const ad::Var& dec, const ad::Var& w);
ad::Var afa(const ModelParams& p, const std::string& prefix, const ad::Var& enc, const ad::Var& dec);

/// Softmax of (c1, c2) per pixel, then w1 x1 + w2 x2.
ad::Var confidence_blend(const ad::Var& x1, const ad::Var& c1, const ad::Var& x2, const ad::Var& c2);

ad::Var rgbrn_forward(const ModelParams& p, const ad::Var& rgb, const ad::Var& sparse_stokes, const ad::Var& mask);

struct PcnOutputs {
  ad::Var first, c_first, second, c_second, final;
};

/// Branch inputs with k channels each (2, 3 or 4 depending on the mode).
struct PcnInputs {
  ad::Var sparse;  // zero off the mask
  ad::Var base;    // dense prefill the branches correct
  ad::Var guided;  // edge-aware prefill
};

PcnOutputs pcn_forward(const ModelParams& p, const ModelConfig& config, const PcnInputs& in, const ad::Var& guide,
                       const ad::Var& mask);

// --- End to end -------------------------------------------------------------

/// Network inputs, each (N, C, H, W).
struct SnaInputs {
  ad::Tensor rgb;            // demosaiced, 3 channels
  ad::Tensor sparse_stokes;  // cluster Stokes, 3 channels, zero off-mask
  ad::Tensor sparse_angles;  // zero-filled four-angle image, 4 channels
  ad::Tensor mask;           // 1 channel
  ad::Tensor prefill;        // bilinear interpolation of sparse_stokes, 3 channels
  ad::Tensor guided;         // joint bilateral interpolation of sparse_stokes, 3 channels
};

struct SnaOutputs {
  ad::Var rgb;     // refined RGB (unclamped)
  ad::Var stokes;  // (N, 3, H, W) camera-referred
  ad::Var stokes_first, stokes_second;  // intermediate Stokes (channels as in `stokes`)
  ad::Var c_first, c_second;
};

SnaOutputs sna_forward(const ModelParams& p, const ModelConfig& config, const SnaInputs& in);

struct LossTerms {
  ad::Var total;
  double stokes = 0;        // final Stokes L1
  double intermediate = 0;  // sum of both intermediate L1 terms (unweighted)
  double rgb = 0;           // RGB L2
};

/// L1(S^) + lambda (L1(S^1st) + L1(S^2nd)) + L2(G^), with means as norms.
/// The L1 terms cover S1,S2 in stokes_s12 mode and S0,S1,S2 otherwise.
/// Throws ParameterError for lambda < 0.
LossTerms sna_loss(const SnaOutputs& out, const ModelConfig& config, const ad::Tensor& gt_stokes,
                   const ad::Tensor& gt_rgb, double lambda);

/// Lower-level form used by tests: predictions and targets given directly.
LossTerms stokes_loss(const ad::Var& s_final, const ad::Var& s_first, const ad::Var& s_second, const ad::Var& rgb,
                      const ad::Tensor& gt_s, const ad::Tensor& gt_rgb, double lambda);

}  // namespace polarsim
