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

// Minimal reverse-mode automatic differentiation over NCHW tensors.
//
// Every op builds a node holding its output and a closure that pushes the
// output gradient back to its inputs. `backward` walks the graph in reverse
// topological order. Parameters are ordinary leaf nodes that persist across
// graphs; their gradients accumulate until the optimizer clears them.

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace polarsim::ad {

struct Shape {
  int n = 1, c = 1, h = 1, w = 1;
  std::size_t size() const { return static_cast<std::size_t>(n) * c * h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape_(s), data_(s.size(), fill) {}

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }
  double* ptr(int n, int c, int y, int x) { return data_.data() + index(n, c, y, x); }
  const double* ptr(int n, int c, int y, int x) const { return data_.data() + index(n, c, y, x); }
  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  /// Adds g into grad, allocating it on first use.
  void accumulate(const Tensor& g);
  Tensor& grad_buffer();
};

/// Leaf holding a constant input.
Var constant(Tensor t);
/// Leaf whose gradient is tracked.
Var parameter(Tensor t);

/// Throws polarsim::StructuralError on shape mismatch.
void require_shape(const Shape& got, const Shape& want, const char* op);

/// When enabled (default), every op checks its output for NaN/Inf and
/// throws polarsim::DivergenceError.
void set_finite_check(bool enabled);
bool finite_check_enabled();

// --- Ops -------------------------------------------------------------------

/// 2-D cross-correlation. weight: (out_c, in_c, k, k), bias: (1, out_c, 1, 1)
/// or null. Padding is k/2 so stride 1 preserves size and stride 2 halves it.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride = 1);

/// Transposed convolution with kernel 2 and stride 2 (exact x2 upsampling).
/// weight: (in_c, out_c, 2, 2), bias: (1, out_c, 1, 1) or null.
Var conv_transpose2x(const Var& x, const Var& weight, const Var& bias);

Var relu(const Var& x);
Var sigmoid(const Var& x);

/// Elementwise with broadcasting over dimensions of size 1.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double k);

/// Channel concatenation.
Var concat(const std::vector<Var>& xs);
/// Channels [begin, end).
Var slice_channels(const Var& x, int begin, int end);

/// Global average over H and W: (N, C, H, W) -> (N, C, 1, 1).
Var channel_attention_pool(const Var& x);

/// Per-pixel softmax over two single-channel maps; returns (N, 2, H, W)
/// holding the weights of a and b.
Var pixelwise_softmax2(const Var& a, const Var& b);

/// Fixed linear mix of channels: out[c_out] = sum_k m[c_out][k] * x[k].
Var channel_mix(const Var& x, const std::vector<std::vector<double>>& m);

/// Scalar means, returned as a (1,1,1,1) tensor.
Var mean_abs(const Var& x);
Var mean_square(const Var& x);

/// Reverse sweep from a scalar output.
void backward(const Var& root);

}  // namespace polarsim::ad
