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

#include "polarsim/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

#include "polarsim/error.hpp"

namespace polarsim::ad {

namespace {

std::atomic<bool> g_finite_check{true};

void check_finite(const Tensor& t, const char* op) {
  if (!g_finite_check.load(std::memory_order_relaxed)) return;
  for (double v : t.values()) {
    if (!std::isfinite(v)) throw DivergenceError(std::string("non-finite value produced by ") + op);
  }
}

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> fn, const char* op) {
  check_finite(value, op);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p && p->requires_grad; });
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(fn);
  }
  return node;
}

bool wants(const Var& v) { return v && v->requires_grad; }

// Broadcast bookkeeping: strides of an operand inside the output shape,
// zero along dimensions where the operand has size 1.
struct Strides {
  std::size_t n, c, h, w;
};

Strides broadcast_strides(const Shape& s, const Shape& out) {
  Strides st{static_cast<std::size_t>(s.c) * s.h * s.w, static_cast<std::size_t>(s.h) * s.w,
             static_cast<std::size_t>(s.w), 1};
  if (s.n == 1 && out.n != 1) st.n = 0;
  if (s.c == 1 && out.c != 1) st.c = 0;
  if (s.h == 1 && out.h != 1) st.h = 0;
  if (s.w == 1 && out.w != 1) st.w = 0;
  return st;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  auto dim = [op, &a, &b](int x, int y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    throw StructuralError(std::string(op) + ": cannot broadcast " + to_string(a) + " with " + to_string(b));
  };
  return {dim(a.n, b.n), dim(a.c, b.c), dim(a.h, b.h), dim(a.w, b.w)};
}

template <typename F>
void for_each_broadcast(const Shape& out, const Strides& sa, const Strides& sb, F&& f) {
  std::size_t o = 0;
  for (int n = 0; n < out.n; ++n)
    for (int c = 0; c < out.c; ++c)
      for (int y = 0; y < out.h; ++y) {
        const std::size_t ia = n * sa.n + c * sa.c + y * sa.h;
        const std::size_t ib = n * sb.n + c * sb.c + y * sb.h;
        for (int x = 0; x < out.w; ++x, ++o) f(o, ia + x * sa.w, ib + x * sb.w);
      }
}

}  // namespace

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

void set_finite_check(bool enabled) { g_finite_check = enabled; }
bool finite_check_enabled() { return g_finite_check; }

Tensor& Node::grad_buffer() {
  if (grad.size() != value.size()) grad = Tensor(value.shape());
  return grad;
}

void Node::accumulate(const Tensor& g) {
  Tensor& dst = grad_buffer();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

Var constant(Tensor t) {
  auto node = std::make_shared<Node>();
  node->value = std::move(t);
  return node;
}

Var parameter(Tensor t) {
  auto node = std::make_shared<Node>();
  node->value = std::move(t);
  node->requires_grad = true;
  return node;
}

void require_shape(const Shape& got, const Shape& want, const char* op) {
  if (!(got == want)) {
    throw StructuralError(std::string(op) + ": expected shape " + to_string(want) + ", got " + to_string(got));
  }
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride) {
  const Shape xs = x->value.shape();
  const Shape ws = weight->value.shape();
  if (ws.h != ws.w || ws.h % 2 == 0) throw StructuralError("conv2d: kernel must be square with odd size");
  if (ws.c != xs.c) {
    throw StructuralError("conv2d: weight expects " + std::to_string(ws.c) + " input channels, got " +
                          std::to_string(xs.c));
  }
  if (stride != 1 && stride != 2) throw StructuralError("conv2d: stride must be 1 or 2");
  if (bias) require_shape(bias->value.shape(), {1, ws.n, 1, 1}, "conv2d bias");
  const int k = ws.h, pad = k / 2;
  const int oh = (xs.h + 2 * pad - k) / stride + 1;
  const int ow = (xs.w + 2 * pad - k) / stride + 1;
  const Shape os{xs.n, ws.n, oh, ow};

  // Valid output column range for a kernel column offset.
  auto col_range = [=](int kx, int& lo, int& hi) {
    lo = std::max(0, (pad - kx + stride - 1) / stride);
    hi = std::min(ow - 1, (xs.w - 1 + pad - kx) / stride);
  };

  Tensor out(os);
  const double* in = x->value.data();
  const double* w = weight->value.data();
  for (int n = 0; n < xs.n; ++n) {
    for (int oc = 0; oc < ws.n; ++oc) {
      double* o = &out.at(n, oc, 0, 0);
      if (bias) std::fill(o, o + static_cast<std::size_t>(oh) * ow, bias->value[static_cast<std::size_t>(oc)]);
      for (int ic = 0; ic < xs.c; ++ic) {
        const double* ip = in + x->value.index(n, ic, 0, 0);
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const double wv = w[((static_cast<std::size_t>(oc) * ws.c + ic) * k + ky) * k + kx];
            int lo, hi;
            col_range(kx, lo, hi);
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= xs.h) continue;
              double* orow = o + static_cast<std::size_t>(oy) * ow;
              const double* irow = ip + static_cast<std::size_t>(iy) * xs.w;
              const int shift = kx - pad;
              if (stride == 1) {
                for (int ox = lo; ox <= hi; ++ox) orow[ox] += wv * irow[ox + shift];
              } else {
                for (int ox = lo; ox <= hi; ++ox) orow[ox] += wv * irow[2 * ox + shift];
              }
            }
          }
        }
      }
    }
  }

  auto fn = [x, weight, bias, stride, k, pad, oh, ow, xs, ws, col_range](Node& self) {
    const Tensor& dy = self.grad;
    const bool need_x = wants(x), need_w = wants(weight);
    double* dx = need_x ? x->grad_buffer().data() : nullptr;
    double* dw = need_w ? weight->grad_buffer().data() : nullptr;
    const double* in = x->value.data();
    const double* w = weight->value.data();
    if (wants(bias)) {
      double* db = bias->grad_buffer().data();
      for (int n = 0; n < xs.n; ++n)
        for (int oc = 0; oc < ws.n; ++oc) {
          const double* g = dy.ptr(n, oc, 0, 0);
          double s = 0.0;
          for (int i = 0; i < oh * ow; ++i) s += g[i];
          db[oc] += s;
        }
    }
    if (!need_x && !need_w) return;
    for (int n = 0; n < xs.n; ++n) {
      for (int oc = 0; oc < ws.n; ++oc) {
        const double* g = dy.ptr(n, oc, 0, 0);
        for (int ic = 0; ic < xs.c; ++ic) {
          const std::size_t in_off = x->value.index(n, ic, 0, 0);
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const std::size_t wi = ((static_cast<std::size_t>(oc) * ws.c + ic) * k + ky) * k + kx;
              const double wv = w[wi];
              int lo, hi;
              col_range(kx, lo, hi);
              double acc = 0.0;
              for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy * stride + ky - pad;
                if (iy < 0 || iy >= xs.h) continue;
                const double* grow = g + static_cast<std::size_t>(oy) * ow;
                const std::size_t row_off = in_off + static_cast<std::size_t>(iy) * xs.w;
                const double* irow = in + row_off;
                const int shift = kx - pad;
                if (stride == 1) {
                  if (need_w)
                    for (int ox = lo; ox <= hi; ++ox) acc += grow[ox] * irow[ox + shift];
                  if (need_x) {
                    double* dxrow = dx + row_off;
                    for (int ox = lo; ox <= hi; ++ox) dxrow[ox + shift] += wv * grow[ox];
                  }
                } else {
                  if (need_w)
                    for (int ox = lo; ox <= hi; ++ox) acc += grow[ox] * irow[2 * ox + shift];
                  if (need_x) {
                    double* dxrow = dx + row_off;
                    for (int ox = lo; ox <= hi; ++ox) dxrow[2 * ox + shift] += wv * grow[ox];
                  }
                }
              }
              if (need_w) dw[wi] += acc;
            }
          }
        }
      }
    }
  };
  return make_node(std::move(out), {x, weight, bias}, fn, "conv2d");
}

Var conv_transpose2x(const Var& x, const Var& weight, const Var& bias) {
  const Shape xs = x->value.shape();
  const Shape ws = weight->value.shape();
  if (ws.n != xs.c || ws.h != 2 || ws.w != 2) {
    throw StructuralError("conv_transpose2x: weight must be (in_c, out_c, 2, 2) with in_c = " + std::to_string(xs.c));
  }
  const int oc_n = ws.c;
  if (bias) require_shape(bias->value.shape(), {1, oc_n, 1, 1}, "conv_transpose2x bias");
  const Shape os{xs.n, oc_n, xs.h * 2, xs.w * 2};
  Tensor out(os);
  const Tensor& w = weight->value;
  for (int n = 0; n < xs.n; ++n)
    for (int oc = 0; oc < oc_n; ++oc) {
      if (bias) {
        double* o = &out.at(n, oc, 0, 0);
        std::fill(o, o + static_cast<std::size_t>(os.h) * os.w, bias->value[static_cast<std::size_t>(oc)]);
      }
      for (int ic = 0; ic < xs.c; ++ic)
        for (int ky = 0; ky < 2; ++ky)
          for (int kx = 0; kx < 2; ++kx) {
            const double wv = w.at(ic, oc, ky, kx);
            for (int y = 0; y < xs.h; ++y) {
              const double* irow = x->value.ptr(n, ic, y, 0);
              double* orow = &out.at(n, oc, 2 * y + ky, 0);
              for (int xx = 0; xx < xs.w; ++xx) orow[2 * xx + kx] += wv * irow[xx];
            }
          }
    }

  auto fn = [x, weight, bias, xs, oc_n](Node& self) {
    const Tensor& dy = self.grad;
    if (wants(bias)) {
      Tensor& db = bias->grad_buffer();
      for (int n = 0; n < xs.n; ++n)
        for (int oc = 0; oc < oc_n; ++oc) {
          const double* g = dy.ptr(n, oc, 0, 0);
          double s = 0.0;
          for (int i = 0; i < 4 * xs.h * xs.w; ++i) s += g[i];
          db[static_cast<std::size_t>(oc)] += s;
        }
    }
    const bool need_x = wants(x), need_w = wants(weight);
    if (!need_x && !need_w) return;
    Tensor* dx = need_x ? &x->grad_buffer() : nullptr;
    Tensor* dw = need_w ? &weight->grad_buffer() : nullptr;
    const Tensor& w = weight->value;
    for (int n = 0; n < xs.n; ++n)
      for (int oc = 0; oc < oc_n; ++oc)
        for (int ic = 0; ic < xs.c; ++ic)
          for (int ky = 0; ky < 2; ++ky)
            for (int kx = 0; kx < 2; ++kx) {
              const double wv = w.at(ic, oc, ky, kx);
              double acc = 0.0;
              for (int y = 0; y < xs.h; ++y) {
                const double* grow = dy.ptr(n, oc, 2 * y + ky, 0);
                const double* irow = x->value.ptr(n, ic, y, 0);
                if (need_w)
                  for (int xx = 0; xx < xs.w; ++xx) acc += grow[2 * xx + kx] * irow[xx];
                if (need_x) {
                  double* dxrow = &dx->at(n, ic, y, 0);
                  for (int xx = 0; xx < xs.w; ++xx) dxrow[xx] += wv * grow[2 * xx + kx];
                }
              }
              if (need_w) dw->at(ic, oc, ky, kx) += acc;
            }
  };
  return make_node(std::move(out), {x, weight, bias}, fn, "conv_transpose2x");
}

Var relu(const Var& x) {
  Tensor out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] > 0.0 ? x->value[i] : 0.0;
  auto fn = [x](Node& self) {
    Tensor& dx = x->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (x->value[i] > 0.0) dx[i] += self.grad[i];
  };
  return make_node(std::move(out), {x}, fn, "relu");
}

Var sigmoid(const Var& x) {
  Tensor out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x->value[i]));
  auto fn = [x](Node& self) {
    Tensor& dx = x->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double s = self.value[i];
      dx[i] += self.grad[i] * s * (1.0 - s);
    }
  };
  return make_node(std::move(out), {x}, fn, "sigmoid");
}

namespace {

// Shared implementation of broadcasting binary ops. `da`/`db` give the
// partial derivatives with respect to each operand.
template <typename Op, typename DA, typename DB>
Var binary(const Var& a, const Var& b, const char* name, Op op, DA da, DB db) {
  const Shape os = broadcast_shape(a->value.shape(), b->value.shape(), name);
  const Strides sa = broadcast_strides(a->value.shape(), os);
  const Strides sb = broadcast_strides(b->value.shape(), os);
  Tensor out(os);
  const double* av = a->value.data();
  const double* bv = b->value.data();
  if (a->value.shape() == os && b->value.shape() == os) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(av[i], bv[i]);
  } else {
    for_each_broadcast(os, sa, sb, [&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = op(av[ia], bv[ib]); });
  }
  auto fn = [a, b, os, sa, sb, da, db](Node& self) {
    const double* av = a->value.data();
    const double* bv = b->value.data();
    double* ga = wants(a) ? a->grad_buffer().data() : nullptr;
    double* gb = wants(b) ? b->grad_buffer().data() : nullptr;
    for_each_broadcast(os, sa, sb, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      const double g = self.grad[o];
      if (ga) ga[ia] += g * da(av[ia], bv[ib]);
      if (gb) gb[ib] += g * db(av[ia], bv[ib]);
    });
  };
  return make_node(std::move(out), {a, b}, fn, name);
}

}  // namespace

Var add(const Var& a, const Var& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var scale(const Var& x, double k) {
  Tensor out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = k * x->value[i];
  auto fn = [x, k](Node& self) {
    Tensor& dx = x->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += k * self.grad[i];
  };
  return make_node(std::move(out), {x}, fn, "scale");
}

Var concat(const std::vector<Var>& xs) {
  if (xs.empty()) throw StructuralError("concat: no inputs");
  const Shape first = xs.front()->value.shape();
  int channels = 0;
  for (const Var& v : xs) {
    const Shape s = v->value.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw StructuralError("concat: " + to_string(s) + " incompatible with " + to_string(first));
    }
    channels += s.c;
  }
  const Shape os{first.n, channels, first.h, first.w};
  const std::size_t plane = static_cast<std::size_t>(first.h) * first.w;
  Tensor out(os);
  for (int n = 0; n < os.n; ++n) {
    int c0 = 0;
    for (const Var& v : xs) {
      const int c = v->value.shape().c;
      std::copy_n(&v->value.at(n, 0, 0, 0), c * plane, &out.at(n, c0, 0, 0));
      c0 += c;
    }
  }
  auto fn = [xs, plane](Node& self) {
    for (int n = 0; n < self.value.shape().n; ++n) {
      int c0 = 0;
      for (const Var& v : xs) {
        const int c = v->value.shape().c;
        if (wants(v)) {
          double* dst = &v->grad_buffer().at(n, 0, 0, 0);
          const double* src = &self.grad.at(n, c0, 0, 0);
          for (std::size_t i = 0; i < c * plane; ++i) dst[i] += src[i];
        }
        c0 += c;
      }
    }
  };
  return make_node(std::move(out), xs, fn, "concat");
}

Var slice_channels(const Var& x, int begin, int end) {
  const Shape xs = x->value.shape();
  if (begin < 0 || end > xs.c || begin >= end) throw StructuralError("slice_channels: invalid range");
  const Shape os{xs.n, end - begin, xs.h, xs.w};
  const std::size_t count = static_cast<std::size_t>(end - begin) * xs.h * xs.w;
  Tensor out(os);
  for (int n = 0; n < xs.n; ++n) std::copy_n(x->value.ptr(n, begin, 0, 0), count, &out.at(n, 0, 0, 0));
  auto fn = [x, begin, count](Node& self) {
    Tensor& dx = x->grad_buffer();
    for (int n = 0; n < self.value.shape().n; ++n) {
      double* dst = &dx.at(n, begin, 0, 0);
      const double* src = &self.grad.at(n, 0, 0, 0);
      for (std::size_t i = 0; i < count; ++i) dst[i] += src[i];
    }
  };
  return make_node(std::move(out), {x}, fn, "slice_channels");
}

Var channel_attention_pool(const Var& x) {
  const Shape xs = x->value.shape();
  const std::size_t plane = static_cast<std::size_t>(xs.h) * xs.w;
  Tensor out({xs.n, xs.c, 1, 1});
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c) {
      const double* p = x->value.ptr(n, c, 0, 0);
      double s = 0.0;
      for (std::size_t i = 0; i < plane; ++i) s += p[i];
      out.at(n, c, 0, 0) = s / static_cast<double>(plane);
    }
  auto fn = [x, plane](Node& self) {
    Tensor& dx = x->grad_buffer();
    const Shape xs = x->value.shape();
    for (int n = 0; n < xs.n; ++n)
      for (int c = 0; c < xs.c; ++c) {
        const double g = self.grad.at(n, c, 0, 0) / static_cast<double>(plane);
        double* d = &dx.at(n, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) d[i] += g;
      }
  };
  return make_node(std::move(out), {x}, fn, "channel_attention_pool");
}

Var pixelwise_softmax2(const Var& a, const Var& b) {
  const Shape as = a->value.shape();
  if (as.c != 1) throw StructuralError("pixelwise_softmax2: inputs must have one channel");
  require_shape(b->value.shape(), as, "pixelwise_softmax2");
  const std::size_t plane = static_cast<std::size_t>(as.h) * as.w;
  Tensor out({as.n, 2, as.h, as.w});
  for (int n = 0; n < as.n; ++n) {
    const double* pa = &a->value.at(n, 0, 0, 0);
    const double* pb = &b->value.at(n, 0, 0, 0);
    double* wa = &out.at(n, 0, 0, 0);
    double* wb = &out.at(n, 1, 0, 0);
    for (std::size_t i = 0; i < plane; ++i) {
      // Logistic form of the two-way softmax; stable for large gaps.
      const double d = pa[i] - pb[i];
      const double s = d >= 0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d));
      wa[i] = s;
      wb[i] = 1.0 - s;
    }
  }
  auto fn = [a, b, plane](Node& self) {
    const int nn = self.value.shape().n;
    for (int n = 0; n < nn; ++n) {
      const double* wa = &self.value.at(n, 0, 0, 0);
      const double* ga = &self.grad.at(n, 0, 0, 0);
      const double* gb = &self.grad.at(n, 1, 0, 0);
      double* da = wants(a) ? &a->grad_buffer().at(n, 0, 0, 0) : nullptr;
      double* db = wants(b) ? &b->grad_buffer().at(n, 0, 0, 0) : nullptr;
      for (std::size_t i = 0; i < plane; ++i) {
        // d wa / d a = s (1 - s); d wb / d a = -s (1 - s); symmetric for b.
        const double s = wa[i];
        const double j = s * (1.0 - s) * (ga[i] - gb[i]);
        if (da) da[i] += j;
        if (db) db[i] -= j;
      }
    }
  };
  return make_node(std::move(out), {a, b}, fn, "pixelwise_softmax2");
}

Var channel_mix(const Var& x, const std::vector<std::vector<double>>& m) {
  const Shape xs = x->value.shape();
  for (const auto& row : m)
    if (static_cast<int>(row.size()) != xs.c) throw StructuralError("channel_mix: matrix width != channels");
  const int oc = static_cast<int>(m.size());
  const std::size_t plane = static_cast<std::size_t>(xs.h) * xs.w;
  Tensor out({xs.n, oc, xs.h, xs.w});
  for (int n = 0; n < xs.n; ++n)
    for (int o = 0; o < oc; ++o) {
      double* dst = &out.at(n, o, 0, 0);
      for (int k = 0; k < xs.c; ++k) {
        const double coef = m[static_cast<std::size_t>(o)][static_cast<std::size_t>(k)];
        if (coef == 0.0) continue;
        const double* src = x->value.ptr(n, k, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) dst[i] += coef * src[i];
      }
    }
  auto fn = [x, m, plane](Node& self) {
    Tensor& dx = x->grad_buffer();
    const Shape xs = x->value.shape();
    for (int n = 0; n < xs.n; ++n)
      for (std::size_t o = 0; o < m.size(); ++o) {
        const double* g = &self.grad.at(n, static_cast<int>(o), 0, 0);
        for (int k = 0; k < xs.c; ++k) {
          const double coef = m[o][static_cast<std::size_t>(k)];
          if (coef == 0.0) continue;
          double* d = &dx.at(n, k, 0, 0);
          for (std::size_t i = 0; i < plane; ++i) d[i] += coef * g[i];
        }
      }
  };
  return make_node(std::move(out), {x}, fn, "channel_mix");
}

Var mean_abs(const Var& x) {
  const double n = static_cast<double>(x->value.size());
  double s = 0.0;
  for (double v : x->value.values()) s += std::abs(v);
  Tensor out({1, 1, 1, 1}, s / n);
  auto fn = [x, n](Node& self) {
    Tensor& dx = x->grad_buffer();
    const double g = self.grad[0] / n;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double v = x->value[i];
      dx[i] += g * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
    }
  };
  return make_node(std::move(out), {x}, fn, "mean_abs");
}

Var mean_square(const Var& x) {
  const double n = static_cast<double>(x->value.size());
  double s = 0.0;
  for (double v : x->value.values()) s += v * v;
  Tensor out({1, 1, 1, 1}, s / n);
  auto fn = [x, n](Node& self) {
    Tensor& dx = x->grad_buffer();
    const double g = 2.0 * self.grad[0] / n;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * x->value[i];
  };
  return make_node(std::move(out), {x}, fn, "mean_square");
}

void backward(const Var& root) {
  if (root->value.size() != 1) throw StructuralError("backward: root must be a scalar");
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p && p->requires_grad && p->backward_fn && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->grad.size() != n->value.size()) continue;  // no gradient reached this node
    n->backward_fn(*n);
  }
}

}  // namespace polarsim::ad
