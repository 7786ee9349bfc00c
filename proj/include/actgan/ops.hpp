#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "actgan/conv_kernels.hpp"
#include "actgan/tensor.hpp"

namespace actgan {

struct Conv2dGeom {
  int stride = 1;
  int dilation = 1;
  int padding = 0;
};

struct TConv2dGeom {
  int stride = 1;
  int padding = 0;
  int output_padding = 0;
};

namespace detail {

template <typename T>
Conv2dDims conv_dims(const Tensor<T>& x, const Tensor<T>& k, const Conv2dGeom& g) {
  if (x.ndim() != 4 || k.ndim() != 4)
    fail_invalid("conv2d: expected 4-d input and kernel, got " + shape_str(x.shape()) + " and " +
                 shape_str(k.shape()));
  if (g.stride < 1 || g.dilation < 1 || g.padding < 0)
    fail_invalid("conv2d: stride/dilation must be >= 1 and padding >= 0");
  Conv2dDims d;
  d.batch = x.dim(0);
  d.in_ch = x.dim(1);
  d.in_h = x.dim(2);
  d.in_w = x.dim(3);
  d.out_ch = k.dim(0);
  d.kh = k.dim(2);
  d.kw = k.dim(3);
  d.stride = g.stride;
  d.dilation = g.dilation;
  d.padding = g.padding;
  if (k.dim(1) != d.in_ch)
    fail_invalid("conv2d: kernel expects " + std::to_string(k.dim(1)) + " input channels, input " +
                 shape_str(x.shape()) + " has " + std::to_string(d.in_ch));
  const int eff_h = d.dilation * (d.kh - 1) + 1;
  const int eff_w = d.dilation * (d.kw - 1) + 1;
  if (d.in_h + 2 * d.padding < eff_h || d.in_w + 2 * d.padding < eff_w)
    fail_invalid("conv2d: padded input " + shape_str(x.shape()) +
                 " smaller than dilated kernel footprint");
  d.out_h = (d.in_h + 2 * d.padding - eff_h) / d.stride + 1;
  d.out_w = (d.in_w + 2 * d.padding - eff_w) / d.stride + 1;
  if (d.out_h <= 0 || d.out_w <= 0) fail_invalid("conv2d: zero-sized output");
  return d;
}

template <typename T>
void check_bias(const Tensor<T>& bias, int out_ch, const char* op) {
  if (bias.size() == 0) return;
  if (bias.ndim() != 1 || bias.dim(0) != out_ch)
    fail_invalid(std::string(op) + ": bias shape " + shape_str(bias.shape()) + " != [" +
                 std::to_string(out_ch) + "]");
}

}  // namespace detail

// Direct 2-d convolution with zero padding.
// out[b,o,i,j] = bias[o] + sum_{c,u,v} in[b,c, i*s+u*d-p, j*s+v*d-p] * k[o,c,u,v]
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& bias,
                 const Conv2dGeom& geom) {
  const detail::Conv2dDims d = detail::conv_dims(x, k, geom);
  detail::check_bias(bias, d.out_ch, "conv2d");
  Tensor<T> y = Tensor<T>::zeros({d.batch, d.out_ch, d.out_h, d.out_w});
  detail::conv_forward_core(x.data().data(), k.data().data(),
                            bias.size() ? bias.data().data() : nullptr, d,
                            y.mutable_data().data());
  debug_check_finite("conv2d", y.data());

  Tape<T>* tape = common_tape<T>({&x, &k, &bias});
  if (!tape) return y;
  auto xs = x.storage();
  auto ks = k.storage();
  const int xn = x.node(), kn = k.node(), bn = bias.node();
  int node = tape->record(
      {xn, kn, bn},
      [xs, ks, d, xn, kn, bn](const std::vector<T>& gout, GradSink<T>& sink) {
        if (xn >= 0) {
          auto& dx = sink.buffer(xn, static_cast<int64_t>(xs->size()));
          std::vector<T> tmp(xs->size());
          detail::conv_backward_input_core(gout.data(), ks->data(), d, tmp.data());
          for (size_t i = 0; i < tmp.size(); ++i) dx[i] += tmp[i];
        }
        if (kn >= 0) {
          auto& dk = sink.buffer(kn, static_cast<int64_t>(ks->size()));
          std::vector<T> tmp(ks->size());
          detail::conv_backward_kernel_core(gout.data(), xs->data(), d, tmp.data());
          for (size_t i = 0; i < tmp.size(); ++i) dk[i] += tmp[i];
        }
        if (bn >= 0) {
          auto& db = sink.buffer(bn, d.out_ch);
          std::vector<T> tmp(static_cast<size_t>(d.out_ch));
          detail::sum_per_channel(gout.data(), d.batch, d.out_ch, d.out_spatial(), tmp.data());
          for (size_t i = 0; i < tmp.size(); ++i) db[i] += tmp[i];
        }
      });
  return tape->attach(std::move(y), node);
}

// Transposed convolution (gradient of conv2d w.r.t. its input, as a forward
// op). Kernel layout is [Cin, Cout, Kh, Kw].
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& bias,
                           const TConv2dGeom& geom) {
  if (x.ndim() != 4 || k.ndim() != 4)
    fail_invalid("conv_transpose2d: expected 4-d input and kernel");
  if (geom.stride < 1 || geom.padding < 0 || geom.output_padding < 0 ||
      geom.output_padding >= geom.stride)
    fail_invalid("conv_transpose2d: need stride >= 1 and 0 <= output_padding < stride");
  if (k.dim(0) != x.dim(1))
    fail_invalid("conv_transpose2d: kernel expects " + std::to_string(k.dim(0)) +
                 " input channels, input has " + std::to_string(x.dim(1)));
  const int out_ch = k.dim(1);
  const int out_h = (x.dim(2) - 1) * geom.stride - 2 * geom.padding + k.dim(2) +
                    geom.output_padding;
  const int out_w = (x.dim(3) - 1) * geom.stride - 2 * geom.padding + k.dim(3) +
                    geom.output_padding;
  if (out_h <= 0 || out_w <= 0) fail_invalid("conv_transpose2d: negative or zero output size");
  detail::check_bias(bias, out_ch, "conv_transpose2d");

  // View as the forward conv this op is the input-gradient of.
  detail::Conv2dDims d;
  d.batch = x.dim(0);
  d.in_ch = out_ch;
  d.in_h = out_h;
  d.in_w = out_w;
  d.out_ch = x.dim(1);
  d.kh = k.dim(2);
  d.kw = k.dim(3);
  d.stride = geom.stride;
  d.dilation = 1;
  d.padding = geom.padding;
  d.out_h = x.dim(2);
  d.out_w = x.dim(3);

  Tensor<T> y = Tensor<T>::zeros({d.batch, out_ch, out_h, out_w});
  detail::conv_backward_input_core(x.data().data(), k.data().data(), d, y.mutable_data().data());
  if (bias.size()) {
    const int64_t spatial = static_cast<int64_t>(out_h) * out_w;
    auto& yd = y.mutable_data();
    for (int b = 0; b < d.batch; ++b)
      for (int o = 0; o < out_ch; ++o) {
        T* row = yd.data() + (static_cast<int64_t>(b) * out_ch + o) * spatial;
        for (int64_t t = 0; t < spatial; ++t) row[t] += bias.data()[static_cast<size_t>(o)];
      }
  }
  debug_check_finite("conv_transpose2d", y.data());

  Tape<T>* tape = common_tape<T>({&x, &k, &bias});
  if (!tape) return y;
  auto xs = x.storage();
  auto ks = k.storage();
  const int xn = x.node(), kn = k.node(), bn = bias.node();
  const int64_t out_spatial = static_cast<int64_t>(out_h) * out_w;
  int node = tape->record(
      {xn, kn, bn},
      [xs, ks, d, xn, kn, bn, out_ch, out_spatial](const std::vector<T>& gout, GradSink<T>& sink) {
        if (xn >= 0) {
          auto& dx = sink.buffer(xn, static_cast<int64_t>(xs->size()));
          std::vector<T> tmp(xs->size());
          detail::conv_forward_core(gout.data(), ks->data(), static_cast<const T*>(nullptr), d,
                                    tmp.data());
          for (size_t i = 0; i < tmp.size(); ++i) dx[i] += tmp[i];
        }
        if (kn >= 0) {
          auto& dk = sink.buffer(kn, static_cast<int64_t>(ks->size()));
          std::vector<T> tmp(ks->size());
          detail::conv_backward_kernel_core(xs->data(), gout.data(), d, tmp.data());
          for (size_t i = 0; i < tmp.size(); ++i) dk[i] += tmp[i];
        }
        if (bn >= 0) {
          auto& db = sink.buffer(bn, out_ch);
          std::vector<T> tmp(static_cast<size_t>(out_ch));
          detail::sum_per_channel(gout.data(), d.batch, out_ch, out_spatial, tmp.data());
          for (size_t i = 0; i < tmp.size(); ++i) db[i] += tmp[i];
        }
      });
  return tape->attach(std::move(y), node);
}

namespace detail {

// Unary pointwise op with a backward that only needs input and output values.
template <typename T, typename Fwd, typename Bwd>
Tensor<T> pointwise_unary(const char* name, const Tensor<T>& x, Fwd fwd, Bwd bwd) {
  std::vector<T> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(x.data()[i]);
  Tensor<T> y(x.shape(), std::move(out));
  debug_check_finite(name, y.data());
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  auto xs = x.storage();
  auto ys = y.storage();
  const int xn = x.node();
  int node = tape->record({xn}, [xs, ys, xn, bwd](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, static_cast<int64_t>(xs->size()));
    for (size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * bwd((*xs)[i], (*ys)[i]);
  });
  return tape->attach(std::move(y), node);
}

}  // namespace detail

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return detail::pointwise_unary(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T alpha) {
  return detail::pointwise_unary(
      "leaky_relu", x, [alpha](T v) { return v > T(0) ? v : alpha * v; },
      [alpha](T v, T) { return v > T(0) ? T(1) : alpha; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return detail::pointwise_unary(
      "sigmoid", x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

// log(1 + exp(x)), numerically stable.
template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
  return detail::pointwise_unary(
      "softplus", x,
      [](T v) { return std::max(v, T(0)) + std::log1p(std::exp(-std::fabs(v))); },
      [](T v, T) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
  return detail::pointwise_unary(
      "abs", x, [](T v) { return std::fabs(v); },
      [](T v, T) { return v >= T(0) ? T(1) : T(-1); });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return detail::pointwise_unary(
      "square", x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Tensor<T> sqrt(const Tensor<T>& x) {
  return detail::pointwise_unary(
      "sqrt", x, [](T v) { return std::sqrt(v); },
      [](T, T y) { return T(1) / (T(2) * y); });
}

// y = a*x + b elementwise with scalar constants.
template <typename T>
Tensor<T> affine(const Tensor<T>& x, T a, T b) {
  return detail::pointwise_unary(
      "affine", x, [a, b](T v) { return a * v + b; }, [a](T, T) { return a; });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T a) {
  return affine(x, a, T(0));
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (!same_shape(a.shape(), b.shape()))
    fail_invalid("add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> out(a.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  Tensor<T> y(a.shape(), std::move(out));
  Tape<T>* tape = common_tape<T>({&a, &b});
  if (!tape) return y;
  const int an = a.node(), bn = b.node();
  const int64_t n = a.size();
  int node = tape->record({an, bn}, [an, bn, n](const std::vector<T>& g, GradSink<T>& sink) {
    if (an >= 0) sink.add(an, g);
    if (bn >= 0) sink.add(bn, g);
    (void)n;
  });
  return tape->attach(std::move(y), node);
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  if (!same_shape(a.shape(), b.shape()))
    fail_invalid("sub: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> out(a.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  Tensor<T> y(a.shape(), std::move(out));
  Tape<T>* tape = common_tape<T>({&a, &b});
  if (!tape) return y;
  const int an = a.node(), bn = b.node();
  int node = tape->record({an, bn}, [an, bn](const std::vector<T>& g, GradSink<T>& sink) {
    if (an >= 0) sink.add(an, g);
    if (bn >= 0) {
      auto& db = sink.buffer(bn, static_cast<int64_t>(g.size()));
      for (size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
    }
  });
  return tape->attach(std::move(y), node);
}

// Elementwise product. `b` may share `a`'s shape, or broadcast as a per-channel
// map [B,C,1,1] or a per-pixel map [B,1,H,W] against a 4-d `a`.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  enum class Mode { same, per_channel, per_pixel };
  Mode mode;
  if (same_shape(a.shape(), b.shape())) {
    mode = Mode::same;
  } else if (a.ndim() == 4 && b.ndim() == 4 && b.dim(0) == a.dim(0) && b.dim(1) == a.dim(1) &&
             b.dim(2) == 1 && b.dim(3) == 1) {
    mode = Mode::per_channel;
  } else if (a.ndim() == 4 && b.ndim() == 4 && b.dim(0) == a.dim(0) && b.dim(1) == 1 &&
             b.dim(2) == a.dim(2) && b.dim(3) == a.dim(3)) {
    mode = Mode::per_pixel;
  } else {
    fail_invalid("mul: incompatible shapes " + shape_str(a.shape()) + " vs " +
                 shape_str(b.shape()));
  }

  const int B = a.ndim() == 4 ? a.dim(0) : 1;
  const int C = a.ndim() == 4 ? a.dim(1) : 1;
  const int64_t hw = a.ndim() == 4 ? static_cast<int64_t>(a.dim(2)) * a.dim(3) : a.size();
  std::vector<T> out(a.data().size());
  const auto& ad = a.data();
  const auto& bd = b.data();
  if (mode == Mode::same) {
    for (size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  } else if (mode == Mode::per_channel) {
    for (int bi = 0; bi < B; ++bi)
      for (int c = 0; c < C; ++c) {
        const T s = bd[static_cast<size_t>(bi * C + c)];
        const int64_t base = (static_cast<int64_t>(bi) * C + c) * hw;
        for (int64_t t = 0; t < hw; ++t) out[static_cast<size_t>(base + t)] = ad[static_cast<size_t>(base + t)] * s;
      }
  } else {
    for (int bi = 0; bi < B; ++bi)
      for (int c = 0; c < C; ++c) {
        const int64_t base = (static_cast<int64_t>(bi) * C + c) * hw;
        const int64_t bbase = static_cast<int64_t>(bi) * hw;
        for (int64_t t = 0; t < hw; ++t)
          out[static_cast<size_t>(base + t)] =
              ad[static_cast<size_t>(base + t)] * bd[static_cast<size_t>(bbase + t)];
      }
  }
  Tensor<T> y(a.shape(), std::move(out));
  Tape<T>* tape = common_tape<T>({&a, &b});
  if (!tape) return y;
  auto as = a.storage();
  auto bs = b.storage();
  const int an = a.node(), bn = b.node();
  int node = tape->record(
      {an, bn}, [as, bs, an, bn, mode, B, C, hw](const std::vector<T>& g, GradSink<T>& sink) {
        const auto& ad = *as;
        const auto& bd = *bs;
        if (an >= 0) {
          auto& da = sink.buffer(an, static_cast<int64_t>(ad.size()));
          if (mode == Mode::same) {
            for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bd[i];
          } else if (mode == Mode::per_channel) {
            for (int bi = 0; bi < B; ++bi)
              for (int c = 0; c < C; ++c) {
                const T s = bd[static_cast<size_t>(bi * C + c)];
                const int64_t base = (static_cast<int64_t>(bi) * C + c) * hw;
                for (int64_t t = 0; t < hw; ++t)
                  da[static_cast<size_t>(base + t)] += g[static_cast<size_t>(base + t)] * s;
              }
          } else {
            for (int bi = 0; bi < B; ++bi)
              for (int c = 0; c < C; ++c) {
                const int64_t base = (static_cast<int64_t>(bi) * C + c) * hw;
                const int64_t bbase = static_cast<int64_t>(bi) * hw;
                for (int64_t t = 0; t < hw; ++t)
                  da[static_cast<size_t>(base + t)] +=
                      g[static_cast<size_t>(base + t)] * bd[static_cast<size_t>(bbase + t)];
              }
          }
        }
        if (bn >= 0) {
          auto& db = sink.buffer(bn, static_cast<int64_t>(bd.size()));
          if (mode == Mode::same) {
            for (size_t i = 0; i < g.size(); ++i) db[i] += g[i] * ad[i];
          } else if (mode == Mode::per_channel) {
            for (int bi = 0; bi < B; ++bi)
              for (int c = 0; c < C; ++c) {
                const int64_t base = (static_cast<int64_t>(bi) * C + c) * hw;
                T acc = T(0);
                for (int64_t t = 0; t < hw; ++t)
                  acc += g[static_cast<size_t>(base + t)] * ad[static_cast<size_t>(base + t)];
                db[static_cast<size_t>(bi * C + c)] += acc;
              }
          } else {
            for (int bi = 0; bi < B; ++bi)
              for (int c = 0; c < C; ++c) {
                const int64_t base = (static_cast<int64_t>(bi) * C + c) * hw;
                const int64_t bbase = static_cast<int64_t>(bi) * hw;
                for (int64_t t = 0; t < hw; ++t)
                  db[static_cast<size_t>(bbase + t)] +=
                      g[static_cast<size_t>(base + t)] * ad[static_cast<size_t>(base + t)];
              }
          }
        }
      });
  return tape->attach(std::move(y), node);
}

// Concatenates 4-d tensors along the channel dimension.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) fail_invalid("concat_channels: no inputs");
  const int B = parts[0].dim(0), H = parts[0].dim(2), W = parts[0].dim(3);
  int total_c = 0;
  for (const auto& p : parts) {
    if (p.ndim() != 4 || p.dim(0) != B || p.dim(2) != H || p.dim(3) != W)
      fail_invalid("concat_channels: non-channel dims differ: " + shape_str(parts[0].shape()) +
                   " vs " + shape_str(p.shape()));
    total_c += p.dim(1);
  }
  const int64_t hw = static_cast<int64_t>(H) * W;
  Tensor<T> y = Tensor<T>::zeros({B, total_c, H, W});
  auto& yd = y.mutable_data();
  int c_off = 0;
  for (const auto& p : parts) {
    const int pc = p.dim(1);
    for (int b = 0; b < B; ++b) {
      std::copy(p.data().begin() + static_cast<int64_t>(b) * pc * hw,
                p.data().begin() + static_cast<int64_t>(b + 1) * pc * hw,
                yd.begin() + (static_cast<int64_t>(b) * total_c + c_off) * hw);
    }
    c_off += pc;
  }

  Tape<T>* tape = nullptr;
  for (const auto& p : parts)
    if (p.on_tape()) {
      if (tape && tape != p.tape()) fail_invalid("concat_channels: operands on different tapes");
      tape = p.tape();
    }
  if (!tape) return y;
  struct Piece {
    int node;
    int channels;
  };
  std::vector<Piece> pieces;
  pieces.reserve(parts.size());
  for (const auto& p : parts) pieces.push_back({p.on_tape() ? p.node() : -1, p.dim(1)});
  std::vector<int> parents;
  for (const auto& pc : pieces)
    if (pc.node >= 0) parents.push_back(pc.node);
  int node = tape->record(
      parents, [pieces, B, total_c, hw](const std::vector<T>& g, GradSink<T>& sink) {
        int c_off = 0;
        for (const auto& pc : pieces) {
          if (pc.node >= 0) {
            auto& dp = sink.buffer(pc.node, static_cast<int64_t>(B) * pc.channels * hw);
            for (int b = 0; b < B; ++b) {
              const int64_t src = (static_cast<int64_t>(b) * total_c + c_off) * hw;
              const int64_t dst = static_cast<int64_t>(b) * pc.channels * hw;
              for (int64_t t = 0; t < static_cast<int64_t>(pc.channels) * hw; ++t)
                dp[static_cast<size_t>(dst + t)] += g[static_cast<size_t>(src + t)];
            }
          }
          c_off += pc.channels;
        }
      });
  return tape->attach(std::move(y), node);
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  return concat_channels<T>({a, b});
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = T(0);
  for (T v : x.data()) acc += v;
  Tensor<T> y = Tensor<T>::scalar(acc);
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  const int xn = x.node();
  const int64_t n = x.size();
  int node = tape->record({xn}, [xn, n](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, n);
    for (auto& v : dx) v += g[0];
  });
  return tape->attach(std::move(y), node);
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  const int64_t n = x.size();
  if (n == 0) fail_invalid("mean: empty tensor");
  T acc = T(0);
  for (T v : x.data()) acc += v;
  Tensor<T> y = Tensor<T>::scalar(acc / static_cast<T>(n));
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  const int xn = x.node();
  int node = tape->record({xn}, [xn, n](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, n);
    const T gi = g[0] / static_cast<T>(n);
    for (auto& v : dx) v += gi;
  });
  return tape->attach(std::move(y), node);
}

// [B,C,H,W] -> [B,C,1,1] spatial mean.
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  if (x.ndim() != 4) fail_invalid("global_avg_pool: expected 4-d input");
  const int B = x.dim(0), C = x.dim(1);
  const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  std::vector<T> out(static_cast<size_t>(B) * C);
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const int64_t base = (static_cast<int64_t>(b) * C + c) * hw;
      T acc = T(0);
      for (int64_t t = 0; t < hw; ++t) acc += x.data()[static_cast<size_t>(base + t)];
      out[static_cast<size_t>(b * C + c)] = acc / static_cast<T>(hw);
    }
  Tensor<T> y({B, C, 1, 1}, std::move(out));
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  const int xn = x.node();
  const int64_t n = x.size();
  int node = tape->record({xn}, [xn, B, C, hw, n](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, n);
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < C; ++c) {
        const T gi = g[static_cast<size_t>(b * C + c)] / static_cast<T>(hw);
        const int64_t base = (static_cast<int64_t>(b) * C + c) * hw;
        for (int64_t t = 0; t < hw; ++t) dx[static_cast<size_t>(base + t)] += gi;
      }
  });
  return tape->attach(std::move(y), node);
}

// [B,C,H,W] -> [B,C,1,1] spatial max; ties keep the first index.
template <typename T>
Tensor<T> global_max_pool(const Tensor<T>& x) {
  if (x.ndim() != 4) fail_invalid("global_max_pool: expected 4-d input");
  const int B = x.dim(0), C = x.dim(1);
  const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  if (hw == 0) fail_invalid("global_max_pool: empty spatial dims");
  std::vector<T> out(static_cast<size_t>(B) * C);
  auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(B) * C);
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const int64_t base = (static_cast<int64_t>(b) * C + c) * hw;
      T best = x.data()[static_cast<size_t>(base)];
      int64_t best_t = 0;
      for (int64_t t = 1; t < hw; ++t) {
        const T v = x.data()[static_cast<size_t>(base + t)];
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      out[static_cast<size_t>(b * C + c)] = best;
      (*argmax)[static_cast<size_t>(b * C + c)] = base + best_t;
    }
  Tensor<T> y({B, C, 1, 1}, std::move(out));
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  const int xn = x.node();
  const int64_t n = x.size();
  int node = tape->record({xn}, [xn, argmax, n](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, n);
    for (size_t i = 0; i < argmax->size(); ++i)
      dx[static_cast<size_t>((*argmax)[i])] += g[i];
  });
  return tape->attach(std::move(y), node);
}

// [B,C,H,W] -> [B,1,H,W] mean over channels.
template <typename T>
Tensor<T> channel_mean(const Tensor<T>& x) {
  if (x.ndim() != 4) fail_invalid("channel_mean: expected 4-d input");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t hw = static_cast<int64_t>(H) * W;
  std::vector<T> out(static_cast<size_t>(B) * hw, T(0));
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const int64_t base = (static_cast<int64_t>(b) * C + c) * hw;
      for (int64_t t = 0; t < hw; ++t)
        out[static_cast<size_t>(b * hw + t)] += x.data()[static_cast<size_t>(base + t)];
    }
  for (auto& v : out) v /= static_cast<T>(C);
  Tensor<T> y({B, 1, H, W}, std::move(out));
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  const int xn = x.node();
  const int64_t n = x.size();
  int node = tape->record({xn}, [xn, B, C, hw, n](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, n);
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < C; ++c) {
        const int64_t base = (static_cast<int64_t>(b) * C + c) * hw;
        for (int64_t t = 0; t < hw; ++t)
          dx[static_cast<size_t>(base + t)] += g[static_cast<size_t>(b * hw + t)] / static_cast<T>(C);
      }
  });
  return tape->attach(std::move(y), node);
}

// [B,C,H,W] -> [B,1,H,W] max over channels; ties keep the lowest channel.
template <typename T>
Tensor<T> channel_max(const Tensor<T>& x) {
  if (x.ndim() != 4) fail_invalid("channel_max: expected 4-d input");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t hw = static_cast<int64_t>(H) * W;
  std::vector<T> out(static_cast<size_t>(B) * hw);
  auto argmax = std::make_shared<std::vector<int>>(static_cast<size_t>(B) * hw);
  for (int b = 0; b < B; ++b) {
    for (int64_t t = 0; t < hw; ++t) {
      T best = x.data()[static_cast<size_t>(static_cast<int64_t>(b) * C * hw + t)];
      int best_c = 0;
      for (int c = 1; c < C; ++c) {
        const T v = x.data()[static_cast<size_t>((static_cast<int64_t>(b) * C + c) * hw + t)];
        if (v > best) {
          best = v;
          best_c = c;
        }
      }
      out[static_cast<size_t>(b * hw + t)] = best;
      (*argmax)[static_cast<size_t>(b * hw + t)] = best_c;
    }
  }
  Tensor<T> y({B, 1, H, W}, std::move(out));
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  const int xn = x.node();
  const int64_t n = x.size();
  int node = tape->record({xn}, [xn, argmax, B, C, hw, n](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, n);
    for (int b = 0; b < B; ++b)
      for (int64_t t = 0; t < hw; ++t) {
        const int c = (*argmax)[static_cast<size_t>(b * hw + t)];
        dx[static_cast<size_t>((static_cast<int64_t>(b) * C + c) * hw + t)] +=
            g[static_cast<size_t>(b * hw + t)];
      }
  });
  return tape->attach(std::move(y), node);
}

// Per-batch channel Gram matrix, normalized by C*H*W:
// G[b,p,q] = sum_hw x[b,p,hw]*x[b,q,hw] / (C*H*W).
template <typename T>
Tensor<T> gram_matrix(const Tensor<T>& x) {
  if (x.ndim() != 4) fail_invalid("gram_matrix: expected 4-d input");
  const int B = x.dim(0), C = x.dim(1);
  const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  const T norm = T(1) / static_cast<T>(static_cast<int64_t>(C) * hw);
  Tensor<T> y = Tensor<T>::zeros({B, C, C});
  for (int b = 0; b < B; ++b) {
    const T* xb = x.data().data() + static_cast<int64_t>(b) * C * hw;
    T* yb = y.mutable_data().data() + static_cast<int64_t>(b) * C * C;
    detail::gemm(false, true, C, C, static_cast<int>(hw), norm, xb, static_cast<int>(hw), xb,
                 static_cast<int>(hw), T(0), yb, C);
  }
  if (!x.on_tape()) return y;
  Tape<T>* tape = x.tape();
  auto xs = x.storage();
  const int xn = x.node();
  int node = tape->record({xn}, [xs, xn, B, C, hw, norm](const std::vector<T>& g, GradSink<T>& sink) {
    auto& dx = sink.buffer(xn, static_cast<int64_t>(xs->size()));
    // dX[b] = (dG[b] + dG[b]^T) * X[b] * norm
    std::vector<T> sym(static_cast<size_t>(C) * C);
    std::vector<T> tmp(static_cast<size_t>(C) * hw);
    for (int b = 0; b < B; ++b) {
      const T* gb = g.data() + static_cast<int64_t>(b) * C * C;
      for (int p = 0; p < C; ++p)
        for (int q = 0; q < C; ++q)
          sym[static_cast<size_t>(p) * C + q] =
              (gb[static_cast<size_t>(p) * C + q] + gb[static_cast<size_t>(q) * C + p]) * norm;
      const T* xb = xs->data() + static_cast<int64_t>(b) * C * hw;
      detail::gemm(false, false, C, static_cast<int>(hw), C, T(1), sym.data(), C, xb,
                   static_cast<int>(hw), T(0), tmp.data(), static_cast<int>(hw));
      T* dxb = dx.data() + static_cast<int64_t>(b) * C * hw;
      for (int64_t i = 0; i < static_cast<int64_t>(C) * hw; ++i) dxb[i] += tmp[static_cast<size_t>(i)];
    }
  });
  return tape->attach(std::move(y), node);
}

// Mean squared error over all elements.
template <typename T>
Tensor<T> loss_mse(const Tensor<T>& pred, const Tensor<T>& target) {
  if (!same_shape(pred.shape(), target.shape()))
    fail_invalid("loss_mse: shape mismatch " + shape_str(pred.shape()) + " vs " +
                 shape_str(target.shape()));
  return mean(square(sub(pred, target)));
}

}  // namespace actgan
