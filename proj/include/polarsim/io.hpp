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

// File formats.
//
// POLR image:
//
//   POLR1\n
//   width W\n
//   height H\n
//   channels C\n
//   names a,b,c\n
//   \n
//   C planes of W*H float32 little-endian samples, row-major
//
// Model checkpoint:
//
//   POLRCKPT1\n
//   key=value\n ...        model configuration
//   \n
//   tensors K\n
//   then K records of: "<name> 4 n c h w\n" followed by n*c*h*w float32 LE
//
// Config: one key=value per line; '#' starts a comment; blank lines ignored.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "polarsim/image.hpp"
#include "polarsim/network.hpp"

namespace polarsim {

/// Named single-channel planes of equal size.
struct PolrImage {
  int width = 0;
  int height = 0;
  std::vector<std::string> names;
  std::vector<Plane> planes;

  /// Throws StructuralError if the plane does not match the image size.
  void add(const std::string& name, Plane plane);
  bool has(const std::string& name) const;
  /// Throws FormatError for a missing channel.
  const Plane& get(const std::string& name) const;
};

std::string encode_polr(const PolrImage& img);
/// Throws FormatError on malformed input.
PolrImage decode_polr(const std::string& bytes);
/// Throws IoError when the file cannot be read or written.
void write_polr(const std::string& path, const PolrImage& img);
PolrImage read_polr(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

std::string encode_checkpoint(const ModelConfig& config, const ModelParams& params);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParams& params);
Checkpoint load_checkpoint(const std::string& path);

using ConfigMap = std::map<std::string, std::string>;

/// Throws FormatError for lines without '=' or with an empty key.
ConfigMap parse_config(const std::string& text);
ConfigMap read_config(const std::string& path);

/// 8-bit PNG with gamma 2.2 encoding of values clamped to [0, 1].
void write_png(const std::string& path, const RgbImage& img);
void write_png(const std::string& path, const Plane& gray);

}  // namespace polarsim
