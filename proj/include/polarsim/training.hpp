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

// Dataset assembly, optimization loop and inference for the toy network.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarsim/network.hpp"
#include "polarsim/scenegen.hpp"
#include "polarsim/sensor.hpp"

namespace polarsim {

/// One training example with batch size 1.
struct Sample {
  SnaInputs inputs;
  ad::Tensor gt_stokes;  // camera-referred: t/2 * scene Stokes
  ad::Tensor gt_rgb;
};

/// Network inputs from a sparse raw frame (demosaic, then cluster Stokes).
SnaInputs inputs_from_raw(const RawFrame& raw);

/// Captures the scene with the given sensor, demosaics it and attaches the
/// ground truth.
Sample make_sample(const Scene& scene, const SensorLayout& layout, const SensorConfig& sensor);

/// Concatenates samples along the batch axis.
Sample stack(const std::vector<const Sample*>& samples);

ad::Tensor to_tensor(const RgbImage& img);
ad::Tensor to_tensor(const StokesImage& img);
ad::Tensor to_tensor(const FourAngleImage& img);
ad::Tensor to_tensor(const PixelMask& mask);
RgbImage rgb_from_tensor(const ad::Tensor& t, int n = 0);
StokesImage stokes_from_tensor(const ad::Tensor& t, int n = 0);

enum class Optimizer { adam, momentum };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 2;
  double lr = 1e-3;
  /// Multiplicative learning-rate decay per epoch.
  double lr_decay = 0.95;
  /// Intermediate-loss weight at epoch 0, decreased linearly to 0.
  double lambda0 = 0.2;
  Optimizer optimizer = Optimizer::adam;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  void validate() const;
};

/// Lambda used in epoch `epoch` (0-based) of `epochs`.
double lambda_at(const TrainConfig& c, int epoch);

struct EpochLog {
  int epoch = 0;
  double lr = 0;
  double lambda = 0;
  double train_loss = 0;   // mean over batches of the total loss
  double train_stokes = 0;
  double train_rgb = 0;
  double val_loss = 0;     // total loss with lambda = 0
  double val_rmse_s12 = 0;
  double val_rmse_s012 = 0;
};

struct TrainResult {
  ModelParams params;  // best validation epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

/// Throws ParameterError for an empty training set and DivergenceError when a
/// loss becomes non-finite. With an empty validation set the training loss
/// selects the epoch. Deterministic for fixed seeds.
TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set, const ModelConfig& model,
                  const TrainConfig& config);

/// Same as above, continuing from given parameters.
TrainResult train(ModelParams params, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const ModelConfig& model, const TrainConfig& config);

/// CSV text of a training log with a header row.
std::string log_to_csv(const std::vector<EpochLog>& log);

struct Prediction {
  StokesImage stokes;
  RgbImage rgb;
};

/// Inference: with RGB refinement enabled its output is clamped to [0, 1].
Prediction predict(const ModelParams& params, const ModelConfig& model, const SnaInputs& inputs);

}  // namespace polarsim
