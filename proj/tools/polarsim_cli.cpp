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

// polarsim command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polarsim/polarsim.h"

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ps_status s, const char* what) {
  if (s != PS_OK) throw CliError(std::string(what) + ": " + ps_status_name(s) + ": " + ps_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ImagePtr = std::unique_ptr<ps_image, Deleter<ps_image, ps_image_free>>;
using ModelPtr = std::unique_ptr<ps_model, Deleter<ps_model, ps_model_free>>;
using ConfigPtr = std::unique_ptr<ps_config, Deleter<ps_config, ps_config_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  ps_string_free(s);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw CliError("error writing '" + path + "'");
}

// Values come from flags first, then the config file, then defaults.
class Settings {
 public:

  void add(CLI::App* cmd, const std::string& key, const std::string& help) {
    auto& slot = values_[cmd][key];
    options_[cmd][key] = cmd->add_option("--" + key, slot, help);
    known_.insert(key);
  }

  void load_config(const std::string& path) {
    if (path.empty()) return;
    ps_config* raw = nullptr;
    check(ps_config_read(path.c_str(), &raw), "config");
    config_.reset(raw);
    for (int i = 0; i < ps_config_size(raw); ++i) {
      std::string key = ps_config_key(raw, i);
      std::string norm = key;
      for (char& c : norm)
        if (c == '_') c = '-';
      if (!known_.count(norm)) throw CliError("config: unknown key '" + key + "'");
      config_values_[norm] = ps_config_get(raw, key.c_str());
    }
  }

  std::string str(CLI::App* cmd, const std::string& key, const std::string& def) const {
    const auto& opt = options_.at(cmd).at(key);
    if (opt->count() > 0) return values_.at(cmd).at(key);
    const auto it = config_values_.find(key);
    return it != config_values_.end() ? it->second : def;
  }

  double num(CLI::App* cmd, const std::string& key, double def) const {
    const std::string v = str(cmd, key, "");
    if (v.empty()) return def;
    return parse_double(key, v);
  }

  long long integer(CLI::App* cmd, const std::string& key, long long def) const {
    const std::string v = str(cmd, key, "");
    if (v.empty()) return def;
    return parse_int(key, v);
  }

  std::string required(CLI::App* cmd, const std::string& key) const {
    const std::string v = str(cmd, key, "");
    if (v.empty()) throw CliError("--" + key + " is required");
    return v;
  }

  static double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw CliError("--" + key + ": expected a number, got '" + v + "'");
    return d;
  }

  static long long parse_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long d = 0;
    try {
      d = std::stoll(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw CliError("--" + key + ": expected an integer, got '" + v + "'");
    return d;
  }

 private:
  std::map<CLI::App*, std::map<std::string, std::string>> values_;
  std::map<CLI::App*, std::map<std::string, CLI::Option*>> options_;
  std::set<std::string> known_;
  std::map<std::string, std::string> config_values_;
  ConfigPtr config_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

ImagePtr read_image(const std::string& path) {
  ps_image* img = nullptr;
  check(ps_image_read(path.c_str(), &img), "read");
  return ImagePtr(img);
}

ModelPtr read_model(const std::string& path) {
  ps_model* m = nullptr;
  check(ps_model_load(path.c_str(), &m), "model");
  return ModelPtr(m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse polarization sensor simulator"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value settings file; flags take precedence");
  Settings s;

  auto* gen = app.add_subcommand("gen", "generate a procedural scene");
  s.add(gen, "scene", "gradient | checker | shapes | perlin");
  s.add(gen, "size", "image side in pixels");
  s.add(gen, "dolp-max", "upper bound of the DoLP field");
  s.add(gen, "correlation", "RGB / polarization edge correlation in [0, 1]");
  s.add(gen, "texture", "RGB texture amplitude");
  s.add(gen, "seed", "scene seed");
  s.add(gen, "out", "output POLR file");

  auto* cap = app.add_subcommand("capture", "simulate a sensor exposure");
  s.add(cap, "scene", "scene POLR file");
  s.add(cap, "layout", "conventional | sparse");
  s.add(cap, "r", "polarization ratio denominator: 4, 16 or 64");
  s.add(cap, "t", "polarizer transmittance");
  s.add(cap, "noise", "shot noise factor F_n");
  s.add(cap, "seed", "noise seed");
  s.add(cap, "out", "output POLR file (raw, class)");

  auto* comp = app.add_subcommand("compensate", "reconstruct dense Stokes and RGB from a raw frame");
  s.add(comp, "in", "raw POLR file");
  s.add(comp, "method", "nearest | bilinear | joint-bilateral | toy-SNA");
  s.add(comp, "model", "model checkpoint for toy-SNA");
  s.add(comp, "t", "transmittance used at capture");
  s.add(comp, "sigma-s", "joint bilateral spatial sigma");
  s.add(comp, "sigma-r", "joint bilateral range sigma");
  s.add(comp, "out", "output POLR file");

  auto* tr = app.add_subcommand("train", "train the toy network on procedural scenes");
  for (const char* k : {"scenes", "size", "r", "t", "noise", "epochs", "batch", "lr", "lr-decay", "lambda", "optimizer",
                        "mode", "channels", "rgbrn", "ftb", "afa", "learn-gain", "seed", "out", "log"}) {
    s.add(tr, k, k);
  }

  auto* ev = app.add_subcommand("eval", "score a prediction against ground truth");
  s.add(ev, "pred", "prediction POLR file");
  s.add(ev, "gt", "ground-truth POLR file");
  s.add(ev, "out", "CSV output (stdout if omitted)");

  auto* bench = app.add_subcommand("bench", "sensor x ratio x noise x method grid");
  for (const char* k : {"size", "test-scenes", "train-scenes", "epochs", "t", "noise", "r", "conventional", "sna",
                        "model", "seed", "threads", "out"}) {
    s.add(bench, k, k);
  }

  auto* an = app.add_subcommand("analyze", "analytic resolution and SNR tables");
  s.add(an, "t", "transmittance");
  s.add(an, "out", "output directory");

  auto* png = app.add_subcommand("png", "export channels of a POLR file as PNG");
  s.add(png, "in", "POLR file");
  s.add(png, "channels", "one channel or r,g,b");
  s.add(png, "out", "PNG file");

  CLI11_PARSE(app, argc, argv);

  try {
    s.load_config(config_path);

    if (*gen) {
      ps_scene_params p;
      ps_scene_params_default(&p);
      const std::string kind = s.str(gen, "scene", p.kind);
      p.kind = kind.c_str();
      p.height = p.width = static_cast<int>(s.integer(gen, "size", p.height));
      p.dolp_max = s.num(gen, "dolp-max", p.dolp_max);
      p.correlation = s.num(gen, "correlation", p.correlation);
      p.texture = s.num(gen, "texture", p.texture);
      p.seed = static_cast<uint64_t>(s.integer(gen, "seed", 1));
      ps_image* img = nullptr;
      check(ps_generate_scene(&p, &img), "gen");
      ImagePtr hold(img);
      check(ps_image_write(img, s.required(gen, "out").c_str()), "write");
    } else if (*cap) {
      ImagePtr scene = read_image(s.required(cap, "scene"));
      ps_sensor_params p;
      ps_sensor_params_default(&p);
      const std::string layout = s.str(cap, "layout", p.layout);
      p.layout = layout.c_str();
      p.r_denominator = static_cast<int>(s.integer(cap, "r", p.r_denominator));
      p.t = s.num(cap, "t", p.t);
      p.f_n = s.num(cap, "noise", p.f_n);
      p.seed = static_cast<uint64_t>(s.integer(cap, "seed", 1));
      ps_image* raw = nullptr;
      check(ps_capture(scene.get(), &p, &raw), "capture");
      ImagePtr hold(raw);
      check(ps_image_write(raw, s.required(cap, "out").c_str()), "write");
    } else if (*comp) {
      ImagePtr raw = read_image(s.required(comp, "in"));
      ps_compensate_params p;
      ps_compensate_params_default(&p);
      const std::string method = s.str(comp, "method", p.method);
      p.method = method.c_str();
      p.t = s.num(comp, "t", p.t);
      p.sigma_spatial = s.num(comp, "sigma-s", 0.0);
      p.sigma_range = s.num(comp, "sigma-r", 0.0);
      ModelPtr model;
      const std::string model_path = s.str(comp, "model", "");
      if (!model_path.empty()) model = read_model(model_path);
      p.model = model.get();
      ps_image* out = nullptr;
      check(ps_compensate(raw.get(), &p, &out), "compensate");
      ImagePtr hold(out);
      check(ps_image_write(out, s.required(comp, "out").c_str()), "write");
    } else if (*tr) {
      ps_train_params p;
      ps_train_params_default(&p);
      p.n_scenes = static_cast<int>(s.integer(tr, "scenes", p.n_scenes));
      p.size = static_cast<int>(s.integer(tr, "size", p.size));
      p.r_denominator = static_cast<int>(s.integer(tr, "r", p.r_denominator));
      p.t = s.num(tr, "t", p.t);
      p.f_n = s.num(tr, "noise", p.f_n);
      p.epochs = static_cast<int>(s.integer(tr, "epochs", p.epochs));
      p.batch_size = static_cast<int>(s.integer(tr, "batch", p.batch_size));
      p.lr = s.num(tr, "lr", p.lr);
      p.lr_decay = s.num(tr, "lr-decay", p.lr_decay);
      p.lambda0 = s.num(tr, "lambda", p.lambda0);
      const std::string opt = s.str(tr, "optimizer", p.optimizer);
      const std::string mode = s.str(tr, "mode", p.mode);
      p.optimizer = opt.c_str();
      p.mode = mode.c_str();
      p.base_channels = static_cast<int>(s.integer(tr, "channels", p.base_channels));
      p.use_rgbrn = static_cast<int>(s.integer(tr, "rgbrn", p.use_rgbrn));
      p.use_ftb = static_cast<int>(s.integer(tr, "ftb", p.use_ftb));
      p.use_afa = static_cast<int>(s.integer(tr, "afa", p.use_afa));
      p.learn_gain = static_cast<int>(s.integer(tr, "learn-gain", p.learn_gain));
      p.seed = static_cast<uint64_t>(s.integer(tr, "seed", 1));
      const std::string out = s.required(tr, "out");
      ps_model* m = nullptr;
      char* log = nullptr;
      check(ps_train(&p, &m, &log), "train");
      ModelPtr hold(m);
      const std::string log_text = take_string(log);
      check(ps_model_save(m, out.c_str()), "save");
      const std::string log_path = s.str(tr, "log", "");
      if (!log_path.empty()) write_text(log_path, log_text);
    } else if (*ev) {
      ImagePtr pred = read_image(s.required(ev, "pred"));
      ImagePtr gt = read_image(s.required(ev, "gt"));
      char* csv = nullptr;
      check(ps_evaluate(pred.get(), gt.get(), &csv), "eval");
      write_text(s.str(ev, "out", ""), take_string(csv));
    } else if (*bench) {
      ps_bench_params p;
      ps_bench_params_default(&p);
      p.size = static_cast<int>(s.integer(bench, "size", p.size));
      p.test_scenes = static_cast<int>(s.integer(bench, "test-scenes", p.test_scenes));
      p.train_scenes = static_cast<int>(s.integer(bench, "train-scenes", p.train_scenes));
      p.epochs = static_cast<int>(s.integer(bench, "epochs", p.epochs));
      p.t = s.num(bench, "t", p.t);
      p.include_conventional = static_cast<int>(s.integer(bench, "conventional", 1));
      p.include_sna = static_cast<int>(s.integer(bench, "sna", 1));
      p.seed = static_cast<uint64_t>(s.integer(bench, "seed", 1));
      p.threads = static_cast<int>(s.integer(bench, "threads", 0));
      std::vector<double> noise;
      for (const std::string& v : split_list(s.str(bench, "noise", ""))) noise.push_back(Settings::parse_double("noise", v));
      std::vector<int> rs;
      for (const std::string& v : split_list(s.str(bench, "r", "")))
        rs.push_back(static_cast<int>(Settings::parse_int("r", v)));
      if (!noise.empty()) {
        p.noise_factors = noise.data();
        p.n_noise_factors = noise.size();
      }
      if (!rs.empty()) {
        p.r_denominators = rs.data();
        p.n_r_denominators = rs.size();
      }
      ModelPtr model;
      const std::string model_path = s.str(bench, "model", "");
      if (!model_path.empty()) model = read_model(model_path);
      p.model = model.get();
      char* csv = nullptr;
      check(ps_bench(&p, &csv), "bench");
      write_text(s.str(bench, "out", ""), take_string(csv));
    } else if (*an) {
      char* res = nullptr;
      char* snr = nullptr;
      check(ps_analyze(s.num(an, "t", 0.7), &res, &snr), "analyze");
      const std::string res_text = take_string(res), snr_text = take_string(snr);
      const std::string dir = s.str(an, "out", "");
      if (dir.empty()) {
        std::cout << res_text << "\n" << snr_text;
      } else {
        std::filesystem::create_directories(dir);
        write_text((std::filesystem::path(dir) / "resolution.csv").string(), res_text);
        write_text((std::filesystem::path(dir) / "snr.csv").string(), snr_text);
      }
    } else if (*png) {
      ImagePtr img = read_image(s.required(png, "in"));
      check(ps_image_write_png(img.get(), s.str(png, "channels", "r,g,b").c_str(), s.required(png, "out").c_str()),
            "png");
    }
  } catch (const std::exception& e) {
    std::cerr << "polarsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
