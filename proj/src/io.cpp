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

#include "polarsim/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace polarsim {

namespace {

constexpr const char* kPolrMagic = "POLR1\n";
constexpr const char* kCkptMagic = "POLRCKPT1\n";

void put_f32(std::string& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
  char b[4];
  std::memcpy(b, &u, 4);
  out.append(b, 4);
}

double get_f32(const char* p) {
  std::uint32_t u;
  std::memcpy(&u, p, 4);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

// Sequential reader over a byte string.
class Cursor {
 public:
  Cursor(const std::string& s, const char* what) : s_(s), what_(what) {}

  std::string line() {
    const std::size_t end = s_.find('\n', pos_);
    if (end == std::string::npos) fail("truncated header");
    std::string l = s_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return l;
  }

  void expect(const std::string& literal) {
    if (s_.compare(pos_, literal.size(), literal) != 0) fail("bad magic");
    pos_ += literal.size();
  }

  const char* take(std::size_t n) {
    if (s_.size() - pos_ < n) fail("truncated data");
    const char* p = s_.data() + pos_;
    pos_ += n;
    return p;
  }

  bool done() const { return pos_ == s_.size(); }

  [[noreturn]] void fail(const std::string& msg) const { throw FormatError(std::string(what_) + ": " + msg); }

 private:
  const std::string& s_;
  const char* what_;
  std::size_t pos_ = 0;
};

int parse_int(const std::string& text, const Cursor& c) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    c.fail("expected an integer, got '" + text + "'");
  }
  if (used != text.size() || v < 0 || v > (1L << 30)) c.fail("bad integer '" + text + "'");
  return static_cast<int>(v);
}

int header_int(Cursor& c, const std::string& key) {
  const std::string l = c.line();
  if (l.rfind(key + " ", 0) != 0) c.fail("expected '" + key + "' line, got '" + l + "'");
  return parse_int(l.substr(key.size() + 1), c);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw FormatError("checkpoint: bad boolean '" + v + "'");
}

}  // namespace

void PolrImage::add(const std::string& name, Plane plane) {
  if (name.empty() || name.find_first_of(",\n ") != std::string::npos) {
    throw ParameterError("invalid channel name '" + name + "'");
  }
  if (names.empty() && width == 0 && height == 0) {
    width = plane.width();
    height = plane.height();
  }
  if (plane.width() != width || plane.height() != height) {
    throw StructuralError("channel '" + name + "' does not match the image size");
  }
  if (has(name)) throw StructuralError("duplicate channel '" + name + "'");
  names.push_back(name);
  planes.push_back(std::move(plane));
}

bool PolrImage::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const Plane& PolrImage::get(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw FormatError("image has no channel '" + name + "'");
  return planes[static_cast<std::size_t>(it - names.begin())];
}

std::string encode_polr(const PolrImage& img) {
  if (img.names.size() != img.planes.size() || img.names.empty()) {
    throw StructuralError("POLR image needs at least one named channel");
  }
  std::string out = kPolrMagic;
  out += "width " + std::to_string(img.width) + "\n";
  out += "height " + std::to_string(img.height) + "\n";
  out += "channels " + std::to_string(img.names.size()) + "\n";
  out += "names ";
  for (std::size_t i = 0; i < img.names.size(); ++i) out += (i ? "," : "") + img.names[i];
  out += "\n\n";
  out.reserve(out.size() + img.planes.size() * static_cast<std::size_t>(img.width) * img.height * 4);
  for (const Plane& p : img.planes) {
    if (p.width() != img.width || p.height() != img.height) throw StructuralError("POLR plane size mismatch");
    for (double v : p.values()) put_f32(out, v);
  }
  return out;
}

PolrImage decode_polr(const std::string& bytes) {
  Cursor c(bytes, "POLR");
  c.expect(kPolrMagic);
  const int w = header_int(c, "width");
  const int h = header_int(c, "height");
  const int ch = header_int(c, "channels");
  const std::string names_line = c.line();
  if (names_line.rfind("names ", 0) != 0) c.fail("expected 'names' line");
  const std::vector<std::string> names = split(names_line.substr(6), ',');
  if (ch < 1 || static_cast<int>(names.size()) != ch) c.fail("channel count does not match names");
  if (!c.line().empty()) c.fail("missing blank line after header");
  PolrImage img;
  img.width = w;
  img.height = h;
  for (const std::string& name : names) {
    Plane p(h, w);
    const char* data = c.take(p.size() * 4);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = get_f32(data + 4 * i);
    try {
      img.add(name, std::move(p));
    } catch (const std::exception& e) {
      c.fail(e.what());
    }
  }
  if (!c.done()) c.fail("trailing bytes");
  return img;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path + "'");
}

void write_polr(const std::string& path, const PolrImage& img) { write_file(path, encode_polr(img)); }

PolrImage read_polr(const std::string& path) { return decode_polr(read_file(path)); }

std::string encode_checkpoint(const ModelConfig& c, const ModelParams& params) {
  std::string out = kCkptMagic;
  out += "base_channels=" + std::to_string(c.base_channels) + "\n";
  out += "depth=" + std::to_string(c.depth) + "\n";
  out += "mode=" + to_string(c.mode) + "\n";
  out += "use_rgbrn=" + std::to_string(c.use_rgbrn ? 1 : 0) + "\n";
  out += "use_ftb=" + std::to_string(c.use_ftb ? 1 : 0) + "\n";
  out += "use_afa=" + std::to_string(c.use_afa ? 1 : 0) + "\n";
  out += "gain=" + fmt_double(c.gain) + "\n";
  out += "learn_gain=" + std::to_string(c.learn_gain ? 1 : 0) + "\n";
  out += "seed=" + std::to_string(c.seed) + "\n";
  out += "gray=" + fmt_double(c.gray.r) + "," + fmt_double(c.gray.g) + "," + fmt_double(c.gray.b) + "\n";
  out += "\ntensors " + std::to_string(params.entries().size()) + "\n";
  for (const auto& [name, var] : params.entries()) {
    const ad::Shape s = var->value.shape();
    out += name + " 4 " + std::to_string(s.n) + " " + std::to_string(s.c) + " " + std::to_string(s.h) + " " +
           std::to_string(s.w) + "\n";
    for (double v : var->value.values()) put_f32(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Cursor c(bytes, "checkpoint");
  c.expect(kCkptMagic);
  ConfigMap kv;
  for (std::string l = c.line(); !l.empty(); l = c.line()) {
    const auto eq = l.find('=');
    if (eq == std::string::npos) c.fail("bad config line '" + l + "'");
    kv[l.substr(0, eq)] = l.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) c.fail(std::string("missing key '") + key + "'");
    return it->second;
  };
  Checkpoint ck;
  ModelConfig& m = ck.config;
  try {
    m.base_channels = std::stoi(need("base_channels"));
    m.depth = std::stoi(need("depth"));
    m.mode = sna_mode_from_string(need("mode"));
    m.use_rgbrn = parse_bool(need("use_rgbrn"));
    m.use_ftb = parse_bool(need("use_ftb"));
    m.use_afa = parse_bool(need("use_afa"));
    m.gain = std::stod(need("gain"));
    m.learn_gain = parse_bool(need("learn_gain"));
    m.seed = std::stoull(need("seed"));
    const std::vector<std::string> g = split(need("gray"), ',');
    if (g.size() != 3) c.fail("bad gray weights");
    m.gray = {std::stod(g[0]), std::stod(g[1]), std::stod(g[2])};
    m.validate();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    c.fail(std::string("bad configuration: ") + e.what());
  }

  const std::string tl = c.line();
  if (tl.rfind("tensors ", 0) != 0) c.fail("expected 'tensors' line");
  const int count = parse_int(tl.substr(8), c);
  ModelParams reference = init_params(m);
  if (static_cast<std::size_t>(count) != reference.entries().size()) c.fail("tensor count does not match the model");
  for (int i = 0; i < count; ++i) {
    const std::vector<std::string> f = split(c.line(), ' ');
    if (f.size() != 6 || f[1] != "4") c.fail("bad tensor record");
    const ad::Shape s{parse_int(f[2], c), parse_int(f[3], c), parse_int(f[4], c), parse_int(f[5], c)};
    const auto& expected = reference.entries()[static_cast<std::size_t>(i)];
    if (f[0] != expected.first) c.fail("unexpected tensor '" + f[0] + "'");
    if (!(s == expected.second->value.shape())) c.fail("tensor '" + f[0] + "' has the wrong shape");
    ad::Tensor t(s);
    const char* data = c.take(s.size() * 4);
    for (std::size_t j = 0; j < s.size(); ++j) t[j] = get_f32(data + 4 * j);
    ck.params.add(f[0], std::move(t));
  }
  if (!c.done()) c.fail("trailing bytes");
  return ck;
}

void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParams& params) {
  write_file(path, encode_checkpoint(config, params));
}

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

ConfigMap parse_config(const std::string& text) {
  ConfigMap out;
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(n) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("config line " + std::to_string(n) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap read_config(const std::string& path) { return parse_config(read_file(path)); }

namespace {

std::uint8_t encode_8bit(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(std::pow(c, 1.0 / 2.2) * 255.0));
}

void write_png_rows(const std::string& path, int width, int height, int channels,
                    const std::vector<std::uint8_t>& pixels) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("error writing PNG '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_gAMA(png, info, 1.0 / 2.2);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, pixels.data() + static_cast<std::size_t>(y) * width * channels);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::string& path, const RgbImage& img) {
  img.check();
  std::vector<std::uint8_t> px(img.r.size() * 3);
  for (std::size_t i = 0; i < img.r.size(); ++i)
    for (int c = 0; c < 3; ++c) px[3 * i + c] = encode_8bit(img.channel(c)[i]);
  write_png_rows(path, img.width(), img.height(), 3, px);
}

void write_png(const std::string& path, const Plane& gray) {
  std::vector<std::uint8_t> px(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) px[i] = encode_8bit(gray[i]);
  write_png_rows(path, gray.width(), gray.height(), 1, px);
}

}  // namespace polarsim
