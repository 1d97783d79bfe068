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

#include "polarsim/network.hpp"

#include <algorithm>
#include <cmath>

#include "polarsim/rng.hpp"

namespace polarsim {

using ad::Shape;
using ad::Tensor;
using ad::Var;

namespace {

constexpr int kRgbrnWidth = 2;  // hidden convs between input and output conv

int level_channels(const ModelConfig& c, int level) { return c.base_channels << level; }

int afa_hidden(int channels) { return std::max(2, channels / 2); }

// Channels predicted by the compensation network.
int target_channels(SnaMode m) {
  switch (m) {
    case SnaMode::four_angle: return 4;
    case SnaMode::stokes_full: return 3;
    case SnaMode::stokes_s12: return 2;
  }
  return 2;
}

const std::vector<std::vector<double>> kStokesMatrix = {
    {0.25, 0.25, 0.25, 0.25},
    {0.5, 0.0, -0.5, 0.0},
    {0.0, 0.5, 0.0, -0.5},
};

// Forward model rows for 0, 45, 90 and 135 degrees.
const std::vector<std::vector<double>> kAngleMatrix = {
    {1.0, 1.0, 0.0},
    {1.0, 0.0, 1.0},
    {1.0, -1.0, 0.0},
    {1.0, 0.0, -1.0},
};

class Initializer {
 public:
  Initializer(ModelParams& p, std::uint64_t seed) : p_(p), rng_(hash_key(seed, 0x1417)) {}

  void conv(const std::string& name, int in_c, int out_c, int k, double gain = 1.0) {
    Tensor w({out_c, in_c, k, k});
    const double std = gain * std::sqrt(2.0 / (in_c * k * k));
    for (double& v : w.values()) v = std * rng_.normal();
    p_.add(name + ".w", std::move(w));
    p_.add(name + ".b", Tensor({1, out_c, 1, 1}));
  }

  void tconv(const std::string& name, int in_c, int out_c) {
    Tensor w({in_c, out_c, 2, 2});
    const double std = std::sqrt(2.0 / in_c);
    for (double& v : w.values()) v = std * rng_.normal();
    p_.add(name + ".w", std::move(w));
    p_.add(name + ".b", Tensor({1, out_c, 1, 1}));
  }

  void zero_conv(const std::string& name, int in_c, int out_c, int k) {
    p_.add(name + ".w", Tensor({out_c, in_c, k, k}));
    p_.add(name + ".b", Tensor({1, out_c, 1, 1}));
  }

 private:
  ModelParams& p_;
  Rng rng_;
};

void init_branch(Initializer& init, const ModelConfig& c, const std::string& prefix, int in_c, int out_c,
                 bool with_afa, bool with_ftb) {
  init.conv(prefix + ".enc0", in_c, level_channels(c, 0), 3);
  for (int l = 1; l < c.depth; ++l) init.conv(prefix + ".enc" + std::to_string(l), level_channels(c, l - 1), level_channels(c, l), 3);
  for (int l = c.depth - 2; l >= 0; --l) {
    const int ch = level_channels(c, l);
    init.tconv(prefix + ".up" + std::to_string(l), level_channels(c, l + 1), ch);
    init.conv(prefix + ".dec" + std::to_string(l), ch, ch, 3);
    if (with_afa) {
      init.conv(prefix + ".afa" + std::to_string(l) + ".fc1", 2 * ch, afa_hidden(ch), 1);
      init.conv(prefix + ".afa" + std::to_string(l) + ".fc2", afa_hidden(ch), ch, 1);
    }
  }
  if (with_ftb) {
    for (int l = 0; l < c.depth; ++l) {
      const int ch = level_channels(c, l);
      init.conv(prefix + ".ftb" + std::to_string(l) + ".c1", ch, ch, 1);
      init.zero_conv(prefix + ".ftb" + std::to_string(l) + ".c2", ch, ch, 3);
    }
  }
  init.zero_conv(prefix + ".head", level_channels(c, 0) + in_c, out_c + 1, 3);
}

struct BranchResult {
  Var out;                    // k + 1 channels
  std::vector<Var> decoder;   // per level, finest first
};

BranchResult run_branch(const ModelParams& p, const ModelConfig& c, const std::string& prefix, const Var& input,
                        bool use_afa, const std::vector<Var>* transfer) {
  std::vector<Var> enc(static_cast<std::size_t>(c.depth));
  auto inject = [&](int l, Var e) {
    if (!transfer) return e;
    const Var& d = (*transfer)[static_cast<std::size_t>(l)];
    return ad::add(e, c.use_ftb ? ftb(p, prefix + ".ftb" + std::to_string(l), d) : d);
  };
  enc[0] = inject(0, ad::relu(conv(p, prefix + ".enc0", input)));
  for (int l = 1; l < c.depth; ++l) {
    enc[static_cast<std::size_t>(l)] =
        inject(l, ad::relu(conv(p, prefix + ".enc" + std::to_string(l), enc[static_cast<std::size_t>(l - 1)], 2)));
  }
  std::vector<Var> dec(static_cast<std::size_t>(c.depth));
  dec.back() = enc.back();
  for (int l = c.depth - 2; l >= 0; --l) {
    const std::string ls = std::to_string(l);
    const Var& up_w = p.get(prefix + ".up" + ls + ".w");
    const Var& up_b = p.get(prefix + ".up" + ls + ".b");
    Var up = ad::relu(ad::conv_transpose2x(dec[static_cast<std::size_t>(l + 1)], up_w, up_b));
    const Var& e = enc[static_cast<std::size_t>(l)];
    Var skip = use_afa ? afa(p, prefix + ".afa" + ls, e, up) : ad::add(up, e);
    dec[static_cast<std::size_t>(l)] = ad::relu(conv(p, prefix + ".dec" + ls, skip));
  }
  return {conv(p, prefix + ".head", ad::concat({dec[0], input})), dec};
}

Tensor stokes_channel_subset(const Tensor& t, int begin, int end) {
  const Shape s = t.shape();
  Tensor out({s.n, end - begin, s.h, s.w});
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n)
    std::copy_n(t.ptr(n, begin, 0, 0), (end - begin) * plane, out.ptr(n, 0, 0, 0));
  return out;
}

}  // namespace

std::string to_string(SnaMode m) {
  switch (m) {
    case SnaMode::four_angle: return "four_angle";
    case SnaMode::stokes_full: return "stokes_full";
    case SnaMode::stokes_s12: return "stokes_s12";
  }
  return "?";
}

SnaMode sna_mode_from_string(const std::string& s) {
  if (s == "four_angle") return SnaMode::four_angle;
  if (s == "stokes_full") return SnaMode::stokes_full;
  if (s == "stokes_s12") return SnaMode::stokes_s12;
  throw ParameterError("unknown network mode '" + s + "'");
}

void ModelConfig::validate() const {
  if (base_channels < 2) throw ParameterError("base_channels must be >= 2");
  if (depth < 1) throw ParameterError("depth must be >= 1");
  if (!(gain > 0.0)) throw ParameterError("gain must be positive");
}

Var ModelParams::add(const std::string& name, Tensor value) {
  if (has(name)) throw StructuralError("parameter '" + name + "' registered twice");
  Var v = ad::parameter(std::move(value));
  entries_.emplace_back(name, v);
  return v;
}

const Var& ModelParams::get(const std::string& name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return v;
  throw StructuralError("unknown parameter '" + name + "'");
}

bool ModelParams::has(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second->value.size();
  return n;
}

ModelParams ModelParams::clone() const {
  ModelParams out;
  for (const auto& [n, v] : entries_) out.add(n, v->value);
  return out;
}

void ModelParams::zero_grad() {
  for (auto& e : entries_) e.second->grad = Tensor();
}

void ModelParams::assign(const ModelParams& other) {
  if (other.entries_.size() != entries_.size()) throw StructuralError("parameter sets differ in size");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first) throw StructuralError("parameter names differ");
    ad::require_shape(other.entries_[i].second->value.shape(), entries_[i].second->value.shape(), "assign");
    entries_[i].second->value = other.entries_[i].second->value;
  }
}

ModelParams init_params(const ModelConfig& c) {
  c.validate();
  ModelParams p;
  Initializer init(p, c.seed);
  const int width = c.base_channels;
  // RGB refinement: G, S0, S1, S2, M in; residual out.
  init.conv("rgbrn.in", 7, width, 3);
  for (int i = 0; i < kRgbrnWidth; ++i) init.conv("rgbrn.hidden" + std::to_string(i), width, width, 3);
  init.zero_conv("rgbrn.out", width, 3, 3);

  const int k = target_channels(c.mode);
  init_branch(init, c, "pcn.b1", 3 + 3 * k + 1, k, c.use_afa, false);
  init_branch(init, c, "pcn.b2", 2 * k + 1, k, false, c.use_ftb);
  if (c.learn_gain) p.add("gain", Tensor({1, 1, 1, 1}, c.gain));
  return p;
}

Var conv(const ModelParams& p, const std::string& name, const Var& x, int stride) {
  return ad::conv2d(x, p.get(name + ".w"), p.get(name + ".b"), stride);
}

Var ftb(const ModelParams& p, const std::string& prefix, const Var& x) {
  Var h = ad::relu(conv(p, prefix + ".c1", x));
  return ad::add(x, conv(p, prefix + ".c2", h));
}

Var afa_weights(const ModelParams& p, const std::string& prefix, const Var& enc, const Var& dec) {
  ad::require_shape(dec->value.shape(), enc->value.shape(), "afa");
  Var desc = ad::channel_attention_pool(ad::concat({enc, dec}));
  Var hidden = ad::relu(conv(p, prefix + ".fc1", desc));
  return ad::sigmoid(conv(p, prefix + ".fc2", hidden));
}

Var attention_fuse(const Var& enc, const Var& dec, const Var& w) {
  ad::require_shape(dec->value.shape(), enc->value.shape(), "attention_fuse");
  return ad::add(dec, ad::mul(w, enc));
}

Var afa(const ModelParams& p, const std::string& prefix, const Var& enc, const Var& dec) {
  return attention_fuse(enc, dec, afa_weights(p, prefix, enc, dec));
}

Var confidence_blend(const Var& x1, const Var& c1, const Var& x2, const Var& c2) {
  ad::require_shape(x2->value.shape(), x1->value.shape(), "confidence_blend");
  ad::require_shape(c2->value.shape(), c1->value.shape(), "confidence_blend");
  const Shape xs = x1->value.shape(), cs = c1->value.shape();
  if (cs.n != xs.n || cs.h != xs.h || cs.w != xs.w || cs.c != 1) {
    throw StructuralError("confidence_blend: confidence maps must be (N, 1, H, W) matching the inputs");
  }
  Var w = ad::pixelwise_softmax2(c1, c2);
  return ad::add(ad::mul(ad::slice_channels(w, 0, 1), x1), ad::mul(ad::slice_channels(w, 1, 2), x2));
}

Var rgbrn_forward(const ModelParams& p, const Var& rgb, const Var& sparse_stokes, const Var& mask) {
  const Shape s = rgb->value.shape();
  if (s.c != 3) throw StructuralError("rgbrn: RGB input must have 3 channels");
  ad::require_shape(sparse_stokes->value.shape(), {s.n, 3, s.h, s.w}, "rgbrn sparse Stokes");
  ad::require_shape(mask->value.shape(), {s.n, 1, s.h, s.w}, "rgbrn mask");
  Var h = ad::relu(conv(p, "rgbrn.in", ad::concat({rgb, sparse_stokes, mask})));
  for (int i = 0; i < kRgbrnWidth; ++i) h = ad::relu(conv(p, "rgbrn.hidden" + std::to_string(i), h));
  return ad::add(rgb, conv(p, "rgbrn.out", h));
}

PcnOutputs pcn_forward(const ModelParams& p, const ModelConfig& c, const PcnInputs& in, const Var& guide,
                       const Var& mask) {
  const Var& sparse = in.sparse;
  const Var& base = in.base;
  const Shape s = sparse->value.shape();
  const int k = s.c;
  if (k != target_channels(c.mode)) throw StructuralError("pcn: input channel count does not match the mode");
  ad::require_shape(base->value.shape(), s, "pcn prefill");
  ad::require_shape(in.guided->value.shape(), s, "pcn guided prefill");
  ad::require_shape(guide->value.shape(), {s.n, 3, s.h, s.w}, "pcn guide");
  ad::require_shape(mask->value.shape(), {s.n, 1, s.h, s.w}, "pcn mask");
  const int period = 1 << (c.depth - 1);
  if (s.h % period != 0 || s.w % period != 0) {
    throw StructuralError("pcn: spatial size must be divisible by " + std::to_string(period));
  }

  BranchResult b1 = run_branch(p, c, "pcn.b1", ad::concat({guide, sparse, base, in.guided, mask}), c.use_afa, nullptr);
  PcnOutputs out;
  out.first = ad::add(base, ad::slice_channels(b1.out, 0, k));
  out.c_first = ad::slice_channels(b1.out, k, k + 1);
  BranchResult b2 = run_branch(p, c, "pcn.b2", ad::concat({out.first, sparse, mask}), false, &b1.decoder);
  out.second = ad::add(base, ad::slice_channels(b2.out, 0, k));
  out.c_second = ad::slice_channels(b2.out, k, k + 1);
  out.final = confidence_blend(out.first, out.c_first, out.second, out.c_second);
  return out;
}

SnaOutputs sna_forward(const ModelParams& p, const ModelConfig& c, const SnaInputs& in) {
  c.validate();
  const Shape s = in.rgb.shape();
  ad::require_shape(in.sparse_stokes.shape(), {s.n, 3, s.h, s.w}, "sna sparse Stokes");
  ad::require_shape(in.sparse_angles.shape(), {s.n, 4, s.h, s.w}, "sna sparse angles");
  ad::require_shape(in.mask.shape(), {s.n, 1, s.h, s.w}, "sna mask");
  ad::require_shape(in.prefill.shape(), {s.n, 3, s.h, s.w}, "sna prefill");
  ad::require_shape(in.guided.shape(), {s.n, 3, s.h, s.w}, "sna guided prefill");

  Var rgb = ad::constant(in.rgb);
  Var mask = ad::constant(in.mask);
  Var sparse_stokes = ad::constant(in.sparse_stokes);

  SnaOutputs out;
  // Polarization inputs enter the network in scene-referred units.
  const double to_net = 1.0 / c.gain;
  out.rgb = c.use_rgbrn ? rgbrn_forward(p, rgb, ad::scale(sparse_stokes, to_net), mask) : rgb;

  // Dense Stokes prefills expressed in the domain the network predicts.
  auto to_target = [&](const Tensor& stokes) -> Var {
    switch (c.mode) {
      case SnaMode::four_angle: return ad::channel_mix(ad::constant(stokes), kAngleMatrix);
      case SnaMode::stokes_full: return ad::constant(stokes);
      case SnaMode::stokes_s12: break;
    }
    return ad::constant(stokes_channel_subset(stokes, 1, 3));
  };
  Var sparse;
  switch (c.mode) {
    case SnaMode::four_angle: sparse = ad::constant(in.sparse_angles); break;
    case SnaMode::stokes_full: sparse = sparse_stokes; break;
    case SnaMode::stokes_s12: sparse = ad::constant(stokes_channel_subset(in.sparse_stokes, 1, 3)); break;
  }
  const PcnInputs pin{ad::scale(sparse, to_net), ad::scale(to_target(in.prefill), to_net),
                      ad::scale(to_target(in.guided), to_net)};
  PcnOutputs pcn = pcn_forward(p, c, pin, out.rgb, mask);
  out.c_first = pcn.c_first;
  out.c_second = pcn.c_second;

  auto to_stokes = [&](const Var& net_out) -> Var {
    Var v = ad::scale(net_out, c.gain);
    return c.mode == SnaMode::four_angle ? ad::channel_mix(v, kStokesMatrix) : v;
  };
  Var fin = to_stokes(pcn.final);
  out.stokes_first = to_stokes(pcn.first);
  out.stokes_second = to_stokes(pcn.second);

  if (c.mode == SnaMode::stokes_s12) {
    const std::vector<std::vector<double>> gray = {{c.gray.r, c.gray.g, c.gray.b}};
    Var s0 = ad::channel_mix(out.rgb, gray);
    s0 = c.learn_gain ? ad::mul(s0, p.get("gain")) : ad::scale(s0, c.gain);
    out.stokes = ad::concat({s0, fin});
  } else {
    out.stokes = fin;
  }
  return out;
}

LossTerms stokes_loss(const Var& s_final, const Var& s_first, const Var& s_second, const Var& rgb, const Tensor& gt_s,
                      const Tensor& gt_rgb, double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  ad::require_shape(s_final->value.shape(), gt_s.shape(), "loss Stokes");
  ad::require_shape(rgb->value.shape(), gt_rgb.shape(), "loss RGB");
  Var gs = ad::constant(gt_s);
  Var l_final = ad::mean_abs(ad::sub(s_final, gs));
  Var l_first = ad::mean_abs(ad::sub(s_first, gs));
  Var l_second = ad::mean_abs(ad::sub(s_second, gs));
  Var l_rgb = ad::mean_square(ad::sub(rgb, ad::constant(gt_rgb)));
  LossTerms t;
  t.total = ad::add(ad::add(l_final, ad::scale(ad::add(l_first, l_second), lambda)), l_rgb);
  t.stokes = l_final->value[0];
  t.intermediate = l_first->value[0] + l_second->value[0];
  t.rgb = l_rgb->value[0];
  return t;
}

LossTerms sna_loss(const SnaOutputs& out, const ModelConfig& c, const Tensor& gt_stokes, const Tensor& gt_rgb,
                   double lambda) {
  const Shape s = out.stokes->value.shape();
  ad::require_shape(gt_stokes.shape(), s, "loss Stokes target");
  if (c.mode == SnaMode::stokes_s12) {
    Tensor gt12 = stokes_channel_subset(gt_stokes, 1, 3);
    LossTerms t = stokes_loss(ad::slice_channels(out.stokes, 1, 3), out.stokes_first, out.stokes_second, out.rgb,
                              gt12, gt_rgb, lambda);
    if (c.learn_gain) {
      Var l0 = ad::mean_abs(ad::sub(ad::slice_channels(out.stokes, 0, 1),
                                    ad::constant(stokes_channel_subset(gt_stokes, 0, 1))));
      t.total = ad::add(t.total, l0);
    }
    return t;
  }
  return stokes_loss(out.stokes, out.stokes_first, out.stokes_second, out.rgb, gt_stokes, gt_rgb, lambda);
}

}  // namespace polarsim
