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

#include "polarsim/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "polarsim/compensation.hpp"
#include "polarsim/metrics.hpp"
#include "polarsim/raw_pipeline.hpp"
#include "polarsim/rng.hpp"

namespace polarsim {

using ad::Shape;
using ad::Tensor;

namespace {

void put_plane(Tensor& t, int c, const Plane& p) {
  std::copy(p.values().begin(), p.values().end(), t.ptr(0, c, 0, 0));
}

Plane get_plane(const Tensor& t, int n, int c) {
  const Shape s = t.shape();
  Plane p(s.h, s.w);
  std::copy_n(t.ptr(n, c, 0, 0), p.size(), p.data());
  return p;
}

struct OptimizerState {
  std::vector<std::vector<double>> m, v;
  long step = 0;
};

void apply_update(ModelParams& params, OptimizerState& st, const TrainConfig& c, double lr) {
  const auto& entries = params.entries();
  if (st.m.empty()) {
    for (const auto& e : entries) {
      st.m.emplace_back(e.second->value.size(), 0.0);
      st.v.emplace_back(c.optimizer == Optimizer::adam ? e.second->value.size() : 0, 0.0);
    }
  }
  ++st.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    ad::Node& node = *entries[i].second;
    if (node.grad.size() == 0) continue;
    auto& w = node.value.values();
    const auto& g = node.grad.values();
    auto& m = st.m[i];
    if (c.optimizer == Optimizer::adam) {
      auto& v = st.v[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
        v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
        w[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + c.adam_eps);
      }
    } else {
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = c.momentum * m[j] + g[j];
        w[j] -= lr * m[j];
      }
    }
  }
}

void require_finite(double v, int epoch, const char* what) {
  if (!std::isfinite(v)) {
    throw DivergenceError("training diverged in epoch " + std::to_string(epoch) + ": " + what + " is not finite");
  }
}

struct ValScore {
  double loss = 0, rmse_s12 = 0, rmse_s012 = 0;
};

ValScore evaluate(const ModelParams& p, const ModelConfig& m, const std::vector<Sample>& set) {
  ValScore s;
  for (const Sample& smp : set) {
    SnaOutputs out = sna_forward(p, m, smp.inputs);
    s.loss += sna_loss(out, m, smp.gt_stokes, smp.gt_rgb, 0.0).total->value[0];
    const StokesImage est = stokes_from_tensor(out.stokes->value);
    const StokesImage gt = stokes_from_tensor(smp.gt_stokes);
    s.rmse_s12 += rmse(est, gt, StokesChannels::s12_only);
    s.rmse_s012 += rmse(est, gt, StokesChannels::all);
  }
  const double n = static_cast<double>(set.size());
  s.loss /= n;
  s.rmse_s12 /= n;
  s.rmse_s012 /= n;
  return s;
}

}  // namespace

Tensor to_tensor(const RgbImage& img) {
  img.check();
  Tensor t({1, 3, img.height(), img.width()});
  for (int c = 0; c < 3; ++c) put_plane(t, c, img.channel(c));
  return t;
}

Tensor to_tensor(const StokesImage& img) {
  img.check();
  Tensor t({1, 3, img.height(), img.width()});
  put_plane(t, 0, img.s0);
  put_plane(t, 1, img.s1);
  put_plane(t, 2, img.s2);
  return t;
}

Tensor to_tensor(const FourAngleImage& img) {
  img.check();
  Tensor t({1, 4, img.height(), img.width()});
  for (int c = 0; c < 4; ++c) put_plane(t, c, img.angle(c));
  return t;
}

Tensor to_tensor(const PixelMask& mask) {
  Tensor t({1, 1, mask.height(), mask.width()});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = mask.bits()[i] ? 1.0 : 0.0;
  return t;
}

RgbImage rgb_from_tensor(const Tensor& t, int n) {
  if (t.shape().c != 3) throw StructuralError("RGB tensor must have 3 channels");
  RgbImage img;
  img.r = get_plane(t, n, 0);
  img.g = get_plane(t, n, 1);
  img.b = get_plane(t, n, 2);
  return img;
}

StokesImage stokes_from_tensor(const Tensor& t, int n) {
  if (t.shape().c != 3) throw StructuralError("Stokes tensor must have 3 channels");
  StokesImage img;
  img.s0 = get_plane(t, n, 0);
  img.s1 = get_plane(t, n, 1);
  img.s2 = get_plane(t, n, 2);
  return img;
}

SnaInputs inputs_from_raw(const RawFrame& raw) {
  if (raw.layout.kind() != SensorKind::sparse) throw ParameterError("the network expects a sparse sensor frame");
  const SparseDemosaic d = demosaic_sparse(raw);
  const SparseStokes sp = cluster_stokes(d.angles, raw.layout);
  const StokesImage guided =
      joint_bilateral(sp.stokes, sp.mask, d.rgb, default_bilateral_params(raw.layout.tile()));
  return {to_tensor(d.rgb),  to_tensor(sp.stokes),
          to_tensor(d.angles), to_tensor(sp.mask),
          to_tensor(interp_bilinear_scattered(sp.stokes, sp.mask)), to_tensor(guided)};
}

Sample make_sample(const Scene& scene, const SensorLayout& layout, const SensorConfig& sensor) {
  const RawFrame raw = capture(color_stokes(scene), layout, sensor);
  Sample s;
  s.inputs = inputs_from_raw(raw);
  s.gt_stokes = to_tensor(scaled(scene.stokes, sensor.t / 2.0));
  s.gt_rgb = to_tensor(scene.rgb);
  return s;
}

Sample stack(const std::vector<const Sample*>& samples) {
  if (samples.empty()) throw ParameterError("cannot stack an empty batch");
  auto cat = [&](auto member) {
    const Shape s0 = (samples[0]->*member).shape();
    Tensor out({static_cast<int>(samples.size()) * s0.n, s0.c, s0.h, s0.w});
    std::size_t off = 0;
    for (const Sample* s : samples) {
      const Tensor& t = s->*member;
      ad::require_shape(t.shape(), s0, "stack");
      std::copy(t.values().begin(), t.values().end(), out.data() + off);
      off += t.size();
    }
    return out;
  };
  auto cat_in = [&](Tensor SnaInputs::*member) {
    const Shape s0 = (samples[0]->inputs.*member).shape();
    Tensor out({static_cast<int>(samples.size()) * s0.n, s0.c, s0.h, s0.w});
    std::size_t off = 0;
    for (const Sample* s : samples) {
      const Tensor& t = s->inputs.*member;
      ad::require_shape(t.shape(), s0, "stack");
      std::copy(t.values().begin(), t.values().end(), out.data() + off);
      off += t.size();
    }
    return out;
  };
  Sample out;
  out.inputs = {cat_in(&SnaInputs::rgb), cat_in(&SnaInputs::sparse_stokes), cat_in(&SnaInputs::sparse_angles),
                cat_in(&SnaInputs::mask), cat_in(&SnaInputs::prefill), cat_in(&SnaInputs::guided)};
  out.gt_stokes = cat(&Sample::gt_stokes);
  out.gt_rgb = cat(&Sample::gt_rgb);
  return out;
}

std::string to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "momentum"; }

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "adam") return Optimizer::adam;
  if (s == "momentum") return Optimizer::momentum;
  throw ParameterError("unknown optimizer '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw ParameterError("lr must be >= 0");
  if (!(lr_decay > 0.0)) throw ParameterError("lr_decay must be positive");
  if (!(lambda0 >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ParameterError("betas must be in [0, 1)");
}

double lambda_at(const TrainConfig& c, int epoch) {
  if (c.epochs <= 1) return c.lambda0;
  return c.lambda0 * (1.0 - static_cast<double>(epoch) / (c.epochs - 1));
}

TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set, const ModelConfig& model,
                  const TrainConfig& config) {
  return train(init_params(model), train_set, val_set, model, config);
}

TrainResult train(ModelParams params, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const ModelConfig& model, const TrainConfig& config) {
  model.validate();
  config.validate();
  if (train_set.empty()) throw ParameterError("training set is empty");

  TrainResult result;
  result.params = params.clone();
  double best = std::numeric_limits<double>::infinity();
  OptimizerState state;
  std::vector<std::size_t> order(train_set.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    log.lr = config.lr * std::pow(config.lr_decay, epoch);
    log.lambda = lambda_at(config, epoch);

    std::iota(order.begin(), order.end(), 0);
    Rng rng(hash_key(config.seed, 0x5117FF1E, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      std::vector<const Sample*> members;
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i)
        members.push_back(&train_set[order[i]]);
      const Sample batch = stack(members);
      params.zero_grad();
      SnaOutputs out = sna_forward(params, model, batch.inputs);
      LossTerms loss = sna_loss(out, model, batch.gt_stokes, batch.gt_rgb, log.lambda);
      require_finite(loss.total->value[0], epoch, "training loss");
      ad::backward(loss.total);
      apply_update(params, state, config, log.lr);
      log.train_loss += loss.total->value[0];
      log.train_stokes += loss.stokes;
      log.train_rgb += loss.rgb;
      ++batches;
    }
    log.train_loss /= batches;
    log.train_stokes /= batches;
    log.train_rgb /= batches;

    double score = log.train_loss;
    if (!val_set.empty()) {
      const ValScore v = evaluate(params, model, val_set);
      require_finite(v.loss, epoch, "validation loss");
      log.val_loss = v.loss;
      log.val_rmse_s12 = v.rmse_s12;
      log.val_rmse_s012 = v.rmse_s012;
      score = v.loss;
    }
    if (score < best) {
      best = score;
      result.best_epoch = epoch;
      result.params.assign(params);
    }
    result.log.push_back(log);
  }
  return result;
}

std::string log_to_csv(const std::vector<EpochLog>& log) {
  std::ostringstream os;
  os << "epoch,lr,lambda,train_loss,train_stokes,train_rgb,val_loss,val_rmse_s12,val_rmse_s012\n";
  char buf[512];
  for (const EpochLog& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", e.epoch, e.lr, e.lambda,
                  e.train_loss, e.train_stokes, e.train_rgb, e.val_loss, e.val_rmse_s12, e.val_rmse_s012);
    os << buf;
  }
  return os.str();
}

Prediction predict(const ModelParams& params, const ModelConfig& model, const SnaInputs& inputs) {
  SnaOutputs out = sna_forward(params, model, inputs);
  RgbImage rgb = rgb_from_tensor(out.rgb->value);
  if (model.use_rgbrn) {
    for (int c = 0; c < 3; ++c)
      for (double& v : rgb.channel(c).values()) v = std::clamp(v, 0.0, 1.0);
  }
  return {stokes_from_tensor(out.stokes->value), std::move(rgb)};
}

}  // namespace polarsim
