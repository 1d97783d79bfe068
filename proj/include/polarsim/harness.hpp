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

// End-to-end helpers shared by the C API, the benchmark and the tests:
// image conversion to POLR channel sets, reconstruction by method, quality
// scores, procedural datasets and the analytic tables.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polarsim/compensation.hpp"
#include "polarsim/io.hpp"
#include "polarsim/scenegen.hpp"
#include "polarsim/sensor.hpp"
#include "polarsim/training.hpp"

namespace polarsim {

// --- POLR channel sets -------------------------------------------------------

/// r,g,b,s0,s1,s2,l0,l45,l90,l135,dolp,aolp
PolrImage scene_to_polr(const Scene& scene);
/// Rebuilds a scene from its r,g,b,dolp,aolp channels.
Scene scene_from_polr(const PolrImage& img);

/// raw,class (class holds the PixelClass code of each pixel).
PolrImage raw_to_polr(const RawFrame& raw);
/// The sensor kind is inferred from the class grid; `config` supplies the
/// remaining capture settings (t, gray weights).
RawFrame raw_from_polr(const PolrImage& img, const SensorConfig& config);

// --- Reconstruction ----------------------------------------------------------

enum class Method { nearest, bilinear, joint_bilateral, toy_sna };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Scene-referred Stokes (camera values divided by t/2) and RGB.
struct Reconstruction {
  StokesImage stokes;
  RgbImage rgb;
};

/// Sparse frames: demosaic, cluster Stokes, then the chosen fill.
/// Conventional frames: 2x2 binning and bilinear upsampling to full size;
/// only `bilinear` is accepted. toy_sna needs a model.
Reconstruction reconstruct(const RawFrame& raw, Method method, const Checkpoint* model = nullptr,
                           std::optional<BilateralParams> bilateral = {});

/// r,g,b,s0,s1,s2,dolp,aolp
PolrImage reconstruction_to_polr(const Reconstruction& rec);
/// Reads s0,s1,s2 and, when present, r,g,b.
Reconstruction reconstruction_from_polr(const PolrImage& img);

// --- Quality -----------------------------------------------------------------

struct Quality {
  double rmse_s012 = 0;
  double rmse_s12 = 0;
  double dolp_psnr_db = 0;
  double aolp_err_deg = 0;
  double rgb_psnr_db = 0;
  double rgb_ssim = 0;
};

/// AoLP error is taken over all pixels (no DoLP gate).
Quality assess(const Reconstruction& est, const StokesImage& truth, const RgbImage& truth_rgb);

/// "%.6f" with "inf" for infinities.
std::string format_metric(double v);

/// Header plus one row.
std::string quality_csv(const Quality& q);

// --- Procedural datasets -----------------------------------------------------

struct DatasetSpec {
  int n_scenes = 64;
  int size = 64;
  int r_denominator = 16;
  double t = 0.7;
  double f_n = 0.72;
  double train_ratio = 0.75;
  double val_ratio = 0.125;
  std::uint64_t seed = 1;
};

struct ProceduralData {
  std::vector<Sample> train, val, test;
  std::vector<Scene> test_scenes;
  SensorLayout layout;
  SensorConfig sensor;
};

/// Scenes from make_dataset, captured with per-scene noise seeds.
ProceduralData build_dataset(const DatasetSpec& spec);

/// Sensor settings used for scene index `scene_seed` of a dataset.
SensorConfig dataset_sensor(const DatasetSpec& spec, std::uint64_t scene_seed);

// --- Benchmark ---------------------------------------------------------------

struct BenchConfig {
  int size = 64;
  int test_scenes = 4;
  int train_scenes = 16;
  std::vector<int> r_denominators = {4, 16, 64};
  std::vector<double> noise_factors = {0.72, 3.6};
  double t = 0.7;
  std::uint64_t seed = 1;
  bool include_conventional = true;
  bool include_sna = true;
  /// When set, this model is used at every sparse grid point instead of
  /// training one per point.
  std::optional<Checkpoint> model;
  ModelConfig model_config;
  TrainConfig train_config;
  /// 0: POLARSIM_THREADS or the hardware concurrency.
  int threads = 0;
};

struct BenchRow {
  std::string sensor;
  int r_denominator = 1;
  double f_n = 0;
  std::string method;
  Quality quality;
};

/// Grid points run in a work pool; rows come back sorted by
/// (sensor, r, F_n, method).
std::vector<BenchRow> run_bench(const BenchConfig& config);

/// Versioned CSV with a `# schema=` comment line.
std::string bench_csv(const std::vector<BenchRow>& rows);

/// Worker count: POLARSIM_THREADS when set and positive, else hardware
/// concurrency, never more than `jobs` and never less than 1.
int pool_size(int requested, int jobs);

// --- Analytic tables ---------------------------------------------------------

/// r, rgb_factor, pol_factor.
std::string resolution_csv();
/// t, snr_ratio for a grid of t values that includes `t`.
std::string snr_csv(double t);

}  // namespace polarsim
