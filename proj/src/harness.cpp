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

#include "polarsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <thread>
#include <tuple>

#include "polarsim/metrics.hpp"
#include "polarsim/raw_pipeline.hpp"
#include "polarsim/rng.hpp"
#include "polarsim/stokes.hpp"

namespace polarsim {

namespace {

RgbImage scaled_rgb(RgbImage img, double k) {
  for (int c = 0; c < 3; ++c)
    for (double& v : img.channel(c).values()) v *= k;
  return img;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

PolrImage scene_to_polr(const Scene& s) {
  PolrImage img;
  img.add("r", s.rgb.r);
  img.add("g", s.rgb.g);
  img.add("b", s.rgb.b);
  img.add("s0", s.stokes.s0);
  img.add("s1", s.stokes.s1);
  img.add("s2", s.stokes.s2);
  img.add("l0", s.angles.l0);
  img.add("l45", s.angles.l45);
  img.add("l90", s.angles.l90);
  img.add("l135", s.angles.l135);
  img.add("dolp", s.dolp);
  img.add("aolp", s.aolp);
  return img;
}

Scene scene_from_polr(const PolrImage& img) {
  RgbImage rgb;
  rgb.r = img.get("r");
  rgb.g = img.get("g");
  rgb.b = img.get("b");
  return scene_from_fields(std::move(rgb), img.get("dolp"), img.get("aolp"));
}

PolrImage raw_to_polr(const RawFrame& raw) {
  const SensorLayout& l = raw.layout;
  Plane cls(l.height(), l.width());
  for (int y = 0; y < l.height(); ++y)
    for (int x = 0; x < l.width(); ++x) cls.at(y, x) = static_cast<double>(l.at(y, x));
  PolrImage img;
  img.add("raw", raw.values);
  img.add("class", std::move(cls));
  return img;
}

RawFrame raw_from_polr(const PolrImage& img, const SensorConfig& config) {
  const Plane& cls = img.get("class");
  std::vector<PixelClass> classes(cls.size());
  bool all_polarized = true;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const double v = cls[i];
    if (!(v >= 0.0 && v <= 6.0) || v != std::floor(v)) throw FormatError("raw frame has an invalid class code");
    classes[i] = static_cast<PixelClass>(static_cast<int>(v));
    all_polarized = all_polarized && is_polarized(classes[i]);
  }
  const SensorKind kind = all_polarized ? SensorKind::conventional : SensorKind::sparse;
  RawFrame raw;
  raw.values = img.get("raw");
  raw.layout = layout_from_classes(kind, img.height, img.width, classes, config.color_order);
  raw.config = config;
  raw.config.r_denominator = raw.layout.r_denominator();
  raw.config.validate();
  return raw;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::nearest: return "nearest";
    case Method::bilinear: return "bilinear";
    case Method::joint_bilateral: return "joint-bilateral";
    case Method::toy_sna: return "toy-SNA";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "nearest") return Method::nearest;
  if (s == "bilinear") return Method::bilinear;
  if (s == "joint-bilateral" || s == "joint_bilateral" || s == "bilateral") return Method::joint_bilateral;
  if (s == "toy-SNA" || s == "toy-sna" || s == "sna") return Method::toy_sna;
  throw ParameterError("unknown method '" + s + "'");
}

Reconstruction reconstruct(const RawFrame& raw, Method method, const Checkpoint* model,
                           std::optional<BilateralParams> bilateral) {
  const double gain = raw.config.t / 2.0;
  Reconstruction rec;
  if (raw.layout.kind() == SensorKind::conventional) {
    if (method != Method::bilinear) throw ParameterError("conventional frames support only bilinear reconstruction");
    const BinnedFrame bin = bin_conventional(raw, raw.config.gray);
    rec.stokes = scaled(upsample_bilinear(stokes_from_four_angles(bin.angles), 2), 1.0 / gain);
    rec.rgb = upsample_bilinear(scaled_rgb(bin.rgb, 1.0 / gain), 2);
    return rec;
  }

  if (method == Method::toy_sna) {
    if (!model) throw ParameterError("toy-SNA reconstruction needs a model");
    const Prediction p = predict(model->params, model->config, inputs_from_raw(raw));
    rec.stokes = scaled(p.stokes, 1.0 / gain);
    rec.rgb = p.rgb;
    return rec;
  }

  const SparseDemosaic d = demosaic_sparse(raw);
  const SparseStokes sp = cluster_stokes(d.angles, raw.layout);
  StokesImage dense;
  switch (method) {
    case Method::nearest: dense = interp_nearest(sp.stokes, sp.mask); break;
    case Method::bilinear: dense = interp_bilinear_scattered(sp.stokes, sp.mask); break;
    case Method::joint_bilateral:
      dense = joint_bilateral(sp.stokes, sp.mask, d.rgb,
                              bilateral.value_or(default_bilateral_params(raw.layout.tile())));
      break;
    case Method::toy_sna: break;
  }
  rec.stokes = scaled(dense, 1.0 / gain);
  rec.rgb = d.rgb;
  return rec;
}

PolrImage reconstruction_to_polr(const Reconstruction& rec) {
  PolrImage img;
  img.add("r", rec.rgb.r);
  img.add("g", rec.rgb.g);
  img.add("b", rec.rgb.b);
  img.add("s0", rec.stokes.s0);
  img.add("s1", rec.stokes.s1);
  img.add("s2", rec.stokes.s2);
  img.add("dolp", dolp(rec.stokes));
  img.add("aolp", aolp(rec.stokes));
  return img;
}

Reconstruction reconstruction_from_polr(const PolrImage& img) {
  Reconstruction rec;
  rec.stokes.s0 = img.get("s0");
  rec.stokes.s1 = img.get("s1");
  rec.stokes.s2 = img.get("s2");
  if (img.has("r") && img.has("g") && img.has("b")) {
    rec.rgb.r = img.get("r");
    rec.rgb.g = img.get("g");
    rec.rgb.b = img.get("b");
  }
  return rec;
}

Quality assess(const Reconstruction& est, const StokesImage& truth, const RgbImage& truth_rgb) {
  Quality q;
  q.rmse_s012 = rmse(est.stokes, truth, StokesChannels::all);
  q.rmse_s12 = rmse(est.stokes, truth, StokesChannels::s12_only);
  q.dolp_psnr_db = dolp_psnr(est.stokes, truth);
  q.aolp_err_deg = aolp_error(est.stokes, truth);
  q.rgb_psnr_db = psnr(est.rgb, truth_rgb);
  q.rgb_ssim = ssim(est.rgb, truth_rgb);
  return q;
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt6(v);
}

std::string quality_csv(const Quality& q) {
  return "rmse_s012,rmse_s12,dolp_psnr_db,aolp_err_deg,rgb_psnr_db,rgb_ssim\n" + format_metric(q.rmse_s012) + "," +
         format_metric(q.rmse_s12) + "," + format_metric(q.dolp_psnr_db) + "," + format_metric(q.aolp_err_deg) + "," +
         format_metric(q.rgb_psnr_db) + "," + format_metric(q.rgb_ssim) + "\n";
}

SensorConfig dataset_sensor(const DatasetSpec& spec, std::uint64_t scene_seed) {
  SensorConfig s;
  s.r_denominator = spec.r_denominator;
  s.t = spec.t;
  s.f_n = spec.f_n;
  s.seed = hash_key(spec.seed, 0xCA97, scene_seed);
  s.validate();
  return s;
}

ProceduralData build_dataset(const DatasetSpec& spec) {
  DatasetConfig dc;
  dc.seed = spec.seed;
  const Manifest m = make_dataset(spec.n_scenes, spec.train_ratio, spec.val_ratio, dc);
  ProceduralData data;
  data.layout = build_layout(SensorKind::sparse, spec.size, spec.size, spec.r_denominator);
  data.sensor = dataset_sensor(spec, 0);
  SceneParams sp;
  sp.height = sp.width = spec.size;
  auto fill = [&](const std::vector<SceneEntry>& entries, std::vector<Sample>& out, std::vector<Scene>* scenes) {
    for (const SceneEntry& e : entries) {
      sp.kind = e.kind;
      Scene scene = generate_scene(sp, e.seed);
      out.push_back(make_sample(scene, data.layout, dataset_sensor(spec, e.seed)));
      if (scenes) scenes->push_back(std::move(scene));
    }
  };
  fill(m.train, data.train, nullptr);
  fill(m.val, data.val, nullptr);
  fill(m.test, data.test, &data.test_scenes);
  return data;
}

int pool_size(int requested, int jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("POLARSIM_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, jobs));
}

namespace {

struct GridPoint {
  SensorKind kind;
  int r_den;
  int noise_index;
};

Scene bench_scene(const BenchConfig& c, std::uint64_t purpose, int index) {
  static const SceneKind kinds[] = {SceneKind::shapes, SceneKind::checker, SceneKind::perlin, SceneKind::gradient};
  SceneParams sp;
  sp.height = sp.width = c.size;
  sp.kind = kinds[index % 4];
  return generate_scene(sp, hash_key(c.seed, purpose, static_cast<std::uint64_t>(index)));
}

SensorConfig bench_sensor(const BenchConfig& c, const GridPoint& g, std::uint64_t purpose, int index) {
  SensorConfig s;
  s.r_denominator = g.r_den;
  s.t = c.t;
  s.f_n = c.noise_factors[static_cast<std::size_t>(g.noise_index)];
  s.seed = hash_key(c.seed, purpose, static_cast<std::uint64_t>(g.noise_index) * 1000 + g.r_den,
                    static_cast<std::uint64_t>(index));
  s.validate();
  return s;
}

std::vector<BenchRow> run_point(const BenchConfig& c, const GridPoint& g, const std::vector<Scene>& tests) {
  const bool conventional = g.kind == SensorKind::conventional;
  const SensorLayout layout = build_layout(g.kind, c.size, c.size, g.r_den);

  std::vector<Method> methods = {Method::bilinear};
  std::optional<Checkpoint> model;
  if (!conventional) {
    methods.push_back(Method::joint_bilateral);
    if (c.model) {
      model = c.model;
    } else if (c.include_sna) {
      std::vector<Sample> train_set;
      for (int i = 0; i < c.train_scenes; ++i) {
        const Scene s = bench_scene(c, 0x7A1, i);
        train_set.push_back(make_sample(s, layout, bench_sensor(c, g, 0x7A2, i)));
      }
      ModelConfig mc = c.model_config;
      mc.gain = c.t / 2.0;
      model = Checkpoint{mc, train(train_set, {}, mc, c.train_config).params};
    }
    if (model) methods.push_back(Method::toy_sna);
  }

  std::vector<Quality> sums(methods.size());
  for (int i = 0; i < static_cast<int>(tests.size()); ++i) {
    const Scene& scene = tests[static_cast<std::size_t>(i)];
    const RawFrame raw = capture(color_stokes(scene), layout, bench_sensor(c, g, 0x7E5, i));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const Quality q = assess(reconstruct(raw, methods[m], model ? &*model : nullptr), scene.stokes, scene.rgb);
      Quality& s = sums[m];
      s.rmse_s012 += q.rmse_s012;
      s.rmse_s12 += q.rmse_s12;
      s.dolp_psnr_db += q.dolp_psnr_db;
      s.aolp_err_deg += q.aolp_err_deg;
      s.rgb_psnr_db += q.rgb_psnr_db;
      s.rgb_ssim += q.rgb_ssim;
    }
  }
  std::vector<BenchRow> rows;
  const double n = static_cast<double>(tests.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    Quality q = sums[m];
    q.rmse_s012 /= n;
    q.rmse_s12 /= n;
    q.dolp_psnr_db /= n;
    q.aolp_err_deg /= n;
    q.rgb_psnr_db /= n;
    q.rgb_ssim /= n;
    rows.push_back({to_string(g.kind), g.r_den, c.noise_factors[static_cast<std::size_t>(g.noise_index)],
                    to_string(methods[m]), q});
  }
  return rows;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& c) {
  if (c.test_scenes < 1) throw ParameterError("bench needs at least one test scene");
  if (c.include_sna && !c.model && c.train_scenes < 1) throw ParameterError("bench needs training scenes");
  if (c.noise_factors.empty()) throw ParameterError("bench needs at least one noise factor");

  std::vector<GridPoint> grid;
  for (int ni = 0; ni < static_cast<int>(c.noise_factors.size()); ++ni) {
    if (c.include_conventional) grid.push_back({SensorKind::conventional, 1, ni});
    for (int r : c.r_denominators) grid.push_back({SensorKind::sparse, r, ni});
  }
  for (const GridPoint& g : grid) {
    if (c.size % (g.kind == SensorKind::conventional ? 4 : std::max(1, sparse_tile_side(g.r_den))) != 0 ||
        (g.kind == SensorKind::sparse && sparse_tile_side(g.r_den) == 0)) {
      throw ParameterError("bench size " + std::to_string(c.size) + " does not fit r = 1/" + std::to_string(g.r_den));
    }
  }

  std::vector<Scene> tests;
  for (int i = 0; i < c.test_scenes; ++i) tests.push_back(bench_scene(c, 0x7E57, i));

  std::vector<std::vector<BenchRow>> results(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        results[i] = run_point(c, grid[i], tests);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = pool_size(c.threads, static_cast<int>(grid.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<BenchRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.sensor, a.r_denominator, a.f_n, a.method) < std::tie(b.sensor, b.r_denominator, b.f_n, b.method);
  });
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "# schema=polarsim.bench/1\n";
  out += "sensor,r,F_n,method,rmse_s012,rmse_s12,dolp_psnr_db,aolp_err_deg,rgb_psnr_db,rgb_ssim\n";
  for (const BenchRow& r : rows) {
    const Quality& q = r.quality;
    out += r.sensor + "," + fmt6(1.0 / r.r_denominator) + "," + fmt6(r.f_n) + "," + r.method + "," +
           format_metric(q.rmse_s012) + "," + format_metric(q.rmse_s12) + "," + format_metric(q.dolp_psnr_db) + "," +
           format_metric(q.aolp_err_deg) + "," + format_metric(q.rgb_psnr_db) + "," + format_metric(q.rgb_ssim) + "\n";
  }
  return out;
}

std::string resolution_csv() {
  std::vector<double> rs = {1.0 / 16.0, 1.0 / 64.0};
  for (int k = 0; k <= 20; ++k) rs.push_back(k / 20.0);
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  std::string out = "r,rgb_factor,pol_factor\n";
  for (double r : rs) {
    const ResolutionReport rep = resolution_analysis(r);
    out += fmt6(r) + "," + fmt6(rep.rgb_factor) + "," + fmt6(rep.pol_factor) + "\n";
  }
  return out;
}

std::string snr_csv(double t) {
  SensorConfig probe;
  probe.t = t;
  probe.validate();
  std::vector<double> ts = {t};
  for (int k = 1; k <= 20; ++k) ts.push_back(k / 20.0);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::string out = "t,snr_ratio\n";
  for (double v : ts) {
    SensorConfig c;
    c.t = v;
    out += fmt6(v) + "," + fmt6(snr_analysis(c).rgb_snr_ratio) + "\n";
  }
  return out;
}

}  // namespace polarsim
