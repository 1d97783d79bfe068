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

#include "polarsim/polarsim.h"

#include <cstdlib>
#include <cstring>
#include <limits>
#include <optional>
#include <new>
#include <string>

#include "polarsim/harness.hpp"
#include "polarsim/io.hpp"
#include "polarsim/metrics.hpp"

struct ps_image {
  polarsim::PolrImage img;
};

struct ps_model {
  polarsim::Checkpoint ck;
};

struct ps_config {
  polarsim::ConfigMap map;
  std::vector<std::string> keys;
};

namespace {

thread_local std::string g_last_error;

ps_status fail(ps_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `fn` and maps library exceptions to status codes.
template <typename Fn>
ps_status guarded(Fn&& fn) {
  try {
    fn();
    return PS_OK;
  } catch (const polarsim::StructuralError& e) {
    return fail(PS_ERR_STRUCTURAL, e.what());
  } catch (const polarsim::ParameterError& e) {
    return fail(PS_ERR_PARAMETER, e.what());
  } catch (const polarsim::ValidationError& e) {
    return fail(PS_ERR_VALIDATION, e.what());
  } catch (const polarsim::IoError& e) {
    return fail(PS_ERR_IO, e.what());
  } catch (const polarsim::FormatError& e) {
    return fail(PS_ERR_FORMAT, e.what());
  } catch (const polarsim::DivergenceError& e) {
    return fail(PS_ERR_DIVERGED, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PS_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw polarsim::ParameterError(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

polarsim::SensorConfig sensor_from(const ps_sensor_params& p) {
  polarsim::SensorConfig s;
  s.r_denominator = p.r_denominator;
  s.t = p.t;
  s.f_n = p.f_n;
  s.q_e = p.q_e;
  s.full_scale = p.full_scale;
  s.seed = p.seed;
  return s;
}

}  // namespace

extern "C" {

const char* ps_version(void) { return "1.0.0"; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

const char* ps_status_name(ps_status s) {
  switch (s) {
    case PS_OK: return "ok";
    case PS_ERR_STRUCTURAL: return "structural error";
    case PS_ERR_PARAMETER: return "parameter error";
    case PS_ERR_VALIDATION: return "validation error";
    case PS_ERR_IO: return "I/O error";
    case PS_ERR_FORMAT: return "format error";
    case PS_ERR_DIVERGED: return "training diverged";
    case PS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ps_string_free(char* s) { std::free(s); }

ps_status ps_image_read(const char* path, ps_image** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ps_image{polarsim::read_polr(path)};
  });
}

ps_status ps_image_write(const ps_image* img, const char* path) {
  return guarded([&] {
    require(img, "image");
    require(path, "path");
    polarsim::write_polr(path, img->img);
  });
}

void ps_image_free(ps_image* img) { delete img; }

int ps_image_width(const ps_image* img) { return img ? img->img.width : 0; }
int ps_image_height(const ps_image* img) { return img ? img->img.height : 0; }
int ps_image_channels(const ps_image* img) { return img ? static_cast<int>(img->img.names.size()) : 0; }

const char* ps_image_channel_name(const ps_image* img, int index) {
  if (!img || index < 0 || index >= static_cast<int>(img->img.names.size())) return nullptr;
  return img->img.names[static_cast<std::size_t>(index)].c_str();
}

ps_status ps_image_get_channel(const ps_image* img, const char* name, double* dst, size_t capacity) {
  return guarded([&] {
    require(img, "image");
    require(name, "name");
    require(dst, "dst");
    const polarsim::Plane& p = img->img.get(name);
    if (capacity < p.size()) throw polarsim::ParameterError("destination buffer is too small");
    std::memcpy(dst, p.data(), p.size() * sizeof(double));
  });
}

ps_status ps_image_write_png(const ps_image* img, const char* channels, const char* path) {
  return guarded([&] {
    require(img, "image");
    require(channels, "channels");
    require(path, "path");
    const std::string ch = channels;
    if (ch.find(',') != std::string::npos) {
      const auto a = ch.find(','), b = ch.find(',', a + 1);
      if (b == std::string::npos || ch.find(',', b + 1) != std::string::npos) {
        throw polarsim::ParameterError("PNG export takes one channel or three comma-separated channels");
      }
      polarsim::RgbImage rgb;
      rgb.r = img->img.get(ch.substr(0, a));
      rgb.g = img->img.get(ch.substr(a + 1, b - a - 1));
      rgb.b = img->img.get(ch.substr(b + 1));
      polarsim::write_png(path, rgb);
    } else {
      polarsim::write_png(path, img->img.get(ch));
    }
  });
}

void ps_scene_params_default(ps_scene_params* p) {
  if (!p) return;
  const polarsim::SceneParams d;
  *p = {"shapes", d.height, d.width, d.dolp_max, d.correlation, d.texture, 1};
}

ps_status ps_generate_scene(const ps_scene_params* p, ps_image** out) {
  return guarded([&] {
    require(p, "params");
    require(out, "out");
    polarsim::SceneParams sp;
    sp.kind = polarsim::scene_kind_from_string(p->kind ? p->kind : "");
    sp.height = p->height;
    sp.width = p->width;
    sp.dolp_max = p->dolp_max;
    sp.correlation = p->correlation;
    sp.texture = p->texture;
    *out = new ps_image{polarsim::scene_to_polr(polarsim::generate_scene(sp, p->seed))};
  });
}

void ps_sensor_params_default(ps_sensor_params* p) {
  if (!p) return;
  const polarsim::SensorConfig d;
  *p = {"sparse", d.r_denominator, d.t, d.f_n, d.q_e, d.full_scale, d.seed};
}

ps_status ps_capture(const ps_image* scene, const ps_sensor_params* p, ps_image** out) {
  return guarded([&] {
    require(scene, "scene");
    require(p, "params");
    require(out, "out");
    const polarsim::SensorKind kind = polarsim::sensor_kind_from_string(p->layout ? p->layout : "");
    polarsim::SensorConfig cfg = sensor_from(*p);
    if (kind == polarsim::SensorKind::conventional) cfg.r_denominator = 1;
    cfg.validate();
    const polarsim::Scene s = polarsim::scene_from_polr(scene->img);
    const polarsim::SensorLayout layout = polarsim::build_layout(kind, s.rgb.height(), s.rgb.width(), cfg.r_denominator);
    *out = new ps_image{polarsim::raw_to_polr(polarsim::capture(polarsim::color_stokes(s), layout, cfg))};
  });
}

void ps_compensate_params_default(ps_compensate_params* p) {
  if (!p) return;
  *p = {"bilinear", polarsim::SensorConfig{}.t, 0.0, 0.0, nullptr};
}

ps_status ps_compensate(const ps_image* raw, const ps_compensate_params* p, ps_image** out) {
  return guarded([&] {
    require(raw, "raw");
    require(p, "params");
    require(out, "out");
    polarsim::SensorConfig cfg;
    cfg.t = p->t;
    const polarsim::RawFrame frame = polarsim::raw_from_polr(raw->img, cfg);
    const polarsim::Method m = polarsim::method_from_string(p->method ? p->method : "");
    std::optional<polarsim::BilateralParams> bp;
    if (p->sigma_spatial > 0.0 || p->sigma_range > 0.0) {
      bp = polarsim::default_bilateral_params(frame.layout.tile());
      if (p->sigma_spatial > 0.0) bp->sigma_spatial = p->sigma_spatial;
      if (p->sigma_range > 0.0) bp->sigma_range = p->sigma_range;
    }
    const polarsim::Reconstruction rec = polarsim::reconstruct(frame, m, p->model ? &p->model->ck : nullptr, bp);
    *out = new ps_image{polarsim::reconstruction_to_polr(rec)};
  });
}

ps_status ps_evaluate(const ps_image* prediction, const ps_image* truth, char** csv) {
  return guarded([&] {
    require(prediction, "prediction");
    require(truth, "truth");
    require(csv, "csv");
    const polarsim::Reconstruction est = polarsim::reconstruction_from_polr(prediction->img);
    const polarsim::Reconstruction gt = polarsim::reconstruction_from_polr(truth->img);
    polarsim::Quality q;
    if (est.rgb.r.empty() || gt.rgb.r.empty()) {
      q.rmse_s012 = polarsim::rmse(est.stokes, gt.stokes, polarsim::StokesChannels::all);
      q.rmse_s12 = polarsim::rmse(est.stokes, gt.stokes, polarsim::StokesChannels::s12_only);
      q.dolp_psnr_db = polarsim::dolp_psnr(est.stokes, gt.stokes);
      q.aolp_err_deg = polarsim::aolp_error(est.stokes, gt.stokes);
      q.rgb_psnr_db = q.rgb_ssim = std::numeric_limits<double>::quiet_NaN();
    } else {
      q = polarsim::assess(est, gt.stokes, gt.rgb);
    }
    *csv = dup_string(polarsim::quality_csv(q));
  });
}

void ps_train_params_default(ps_train_params* p) {
  if (!p) return;
  const polarsim::DatasetSpec ds;
  const polarsim::TrainConfig tc;
  const polarsim::ModelConfig mc;
  *p = {ds.n_scenes, ds.size, ds.r_denominator, ds.t, ds.f_n, 10, tc.batch_size, tc.lr, tc.lr_decay, tc.lambda0,
        "adam", "stokes_s12", mc.base_channels, 1, 1, 1, 0, 1};
}

ps_status ps_train(const ps_train_params* p, ps_model** out, char** log_csv) {
  return guarded([&] {
    require(p, "params");
    require(out, "out");
    polarsim::DatasetSpec ds;
    ds.n_scenes = p->n_scenes;
    ds.size = p->size;
    ds.r_denominator = p->r_denominator;
    ds.t = p->t;
    ds.f_n = p->f_n;
    ds.seed = p->seed;
    polarsim::ModelConfig mc;
    mc.base_channels = p->base_channels;
    mc.mode = polarsim::sna_mode_from_string(p->mode ? p->mode : "");
    mc.use_rgbrn = p->use_rgbrn != 0;
    mc.use_ftb = p->use_ftb != 0;
    mc.use_afa = p->use_afa != 0;
    mc.learn_gain = p->learn_gain != 0;
    mc.gain = p->t / 2.0;
    mc.seed = p->seed;
    mc.validate();
    polarsim::TrainConfig tc;
    tc.epochs = p->epochs;
    tc.batch_size = p->batch_size;
    tc.lr = p->lr;
    tc.lr_decay = p->lr_decay;
    tc.lambda0 = p->lambda0;
    tc.optimizer = polarsim::optimizer_from_string(p->optimizer ? p->optimizer : "");
    tc.seed = p->seed;
    tc.validate();
    const polarsim::ProceduralData data = polarsim::build_dataset(ds);
    polarsim::TrainResult r = polarsim::train(data.train, data.val, mc, tc);
    if (log_csv) *log_csv = dup_string(polarsim::log_to_csv(r.log));
    *out = new ps_model{{mc, std::move(r.params)}};
  });
}

ps_status ps_model_save(const ps_model* m, const char* path) {
  return guarded([&] {
    require(m, "model");
    require(path, "path");
    polarsim::save_checkpoint(path, m->ck.config, m->ck.params);
  });
}

ps_status ps_model_load(const char* path, ps_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ps_model{polarsim::load_checkpoint(path)};
  });
}

void ps_model_free(ps_model* m) { delete m; }

size_t ps_model_parameter_count(const ps_model* m) { return m ? m->ck.params.scalar_count() : 0; }

void ps_bench_params_default(ps_bench_params* p) {
  if (!p) return;
  const polarsim::BenchConfig d;
  *p = {d.size, d.test_scenes, d.train_scenes, 3, d.t, nullptr, 0, nullptr, 0, 1, 1, nullptr, d.seed, 0};
}

ps_status ps_bench(const ps_bench_params* p, char** csv) {
  return guarded([&] {
    require(p, "params");
    require(csv, "csv");
    polarsim::BenchConfig c;
    c.size = p->size;
    c.test_scenes = p->test_scenes;
    c.train_scenes = p->train_scenes;
    c.t = p->t;
    c.seed = p->seed;
    c.threads = p->threads;
    c.include_conventional = p->include_conventional != 0;
    c.include_sna = p->include_sna != 0;
    if (p->noise_factors) c.noise_factors.assign(p->noise_factors, p->noise_factors + p->n_noise_factors);
    if (p->r_denominators) c.r_denominators.assign(p->r_denominators, p->r_denominators + p->n_r_denominators);
    if (p->model) c.model = polarsim::Checkpoint{p->model->ck.config, p->model->ck.params.clone()};
    c.train_config.epochs = p->epochs;
    c.train_config.seed = p->seed;
    c.model_config.seed = p->seed;
    *csv = dup_string(polarsim::bench_csv(polarsim::run_bench(c)));
  });
}

ps_status ps_analyze(double t, char** resolution_csv, char** snr_csv) {
  return guarded([&] {
    require(resolution_csv, "resolution_csv");
    require(snr_csv, "snr_csv");
    const std::string snr = polarsim::snr_csv(t);
    *resolution_csv = dup_string(polarsim::resolution_csv());
    *snr_csv = dup_string(snr);
  });
}

ps_status ps_config_read(const char* path, ps_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto* c = new ps_config{polarsim::read_config(path), {}};
    for (const auto& kv : c->map) c->keys.push_back(kv.first);
    *out = c;
  });
}

ps_status ps_config_parse(const char* text, ps_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    auto* c = new ps_config{polarsim::parse_config(text), {}};
    for (const auto& kv : c->map) c->keys.push_back(kv.first);
    *out = c;
  });
}

void ps_config_free(ps_config* c) { delete c; }

const char* ps_config_get(const ps_config* c, const char* key) {
  if (!c || !key) return nullptr;
  const auto it = c->map.find(key);
  return it == c->map.end() ? nullptr : it->second.c_str();
}

int ps_config_size(const ps_config* c) { return c ? static_cast<int>(c->keys.size()) : 0; }

const char* ps_config_key(const ps_config* c, int index) {
  if (!c || index < 0 || index >= static_cast<int>(c->keys.size())) return nullptr;
  return c->keys[static_cast<std::size_t>(index)].c_str();
}

}  // extern "C"
