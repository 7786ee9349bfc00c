#pragma once

#include <array>
#include <memory>
#include <string>

#include "actgan/ops.hpp"
#include "actgan/params.hpp"

namespace actgan {

namespace detail {

template <typename T>
std::shared_ptr<Param<T>> conv_param(ParamSet<T>& ps, const std::string& name, int out_ch,
                                     int in_ch, int k, Rng& rng) {
  return ps.add(name, kaiming_uniform<T>({out_ch, in_ch, k, k},
                                         static_cast<int64_t>(in_ch) * k * k, rng));
}

template <typename T>
std::shared_ptr<Param<T>> tconv_param(ParamSet<T>& ps, const std::string& name, int in_ch,
                                      int out_ch, int k, Rng& rng) {
  return ps.add(name, kaiming_uniform<T>({in_ch, out_ch, k, k},
                                         static_cast<int64_t>(in_ch) * k * k, rng));
}

template <typename T>
std::shared_ptr<Param<T>> bias_param(ParamSet<T>& ps, const std::string& name, int ch) {
  return ps.add(name, Tensor<T>::zeros({ch}));
}

}  // namespace detail

// Aggregated contextual transformation block: four dilated 3x3 branches over
// split channels, fused and gated against the identity path,
// out = x2*g + x1*(1-g).
template <typename T>
struct AotBlock {
  static constexpr std::array<int, 4> kDilations = {1, 2, 4, 8};

  enum class GateOverride { none, force_open, force_closed };

  int channels = 0;
  std::array<std::shared_ptr<Param<T>>, 4> branch_w, branch_b;
  std::shared_ptr<Param<T>> fuse_w, fuse_b;
  std::shared_ptr<Param<T>> gate_w, gate_b;
  GateOverride gate_override = GateOverride::none;  // test hook

  AotBlock() = default;

  AotBlock(ParamSet<T>& ps, const std::string& prefix, int ch, Rng& rng) : channels(ch) {
    if (ch % 4 != 0)
      fail_invalid("aot block at " + prefix + ": channels " + std::to_string(ch) +
                   " not divisible by 4");
    for (size_t i = 0; i < 4; ++i) {
      const std::string n = prefix + ".branch" + std::to_string(kDilations[i]);
      branch_w[i] = detail::conv_param(ps, n + ".w", ch / 4, ch, 3, rng);
      branch_b[i] = detail::bias_param(ps, n + ".b", ch / 4);
    }
    fuse_w = detail::conv_param(ps, prefix + ".fuse.w", ch, ch, 3, rng);
    fuse_b = detail::bias_param(ps, prefix + ".fuse.b", ch);
    gate_w = detail::conv_param(ps, prefix + ".gate.w", 1, ch, 3, rng);
    gate_b = detail::bias_param(ps, prefix + ".gate.b", 1);
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    std::vector<Tensor<T>> branches;
    branches.reserve(4);
    for (size_t i = 0; i < 4; ++i) {
      const int d = kDilations[i];
      branches.push_back(relu(conv2d(x, branch_w[i]->value, branch_b[i]->value, {1, d, d})));
    }
    auto fused = conv2d(concat_channels(branches), fuse_w->value, fuse_b->value, {1, 1, 1});
    auto gate_logits = conv2d(fused, gate_w->value, gate_b->value, {1, 1, 1});
    if (gate_override == GateOverride::force_open) gate_logits = affine(gate_logits, T(1), T(1e4));
    if (gate_override == GateOverride::force_closed)
      gate_logits = affine(gate_logits, T(1), T(-1e4));
    auto g = sigmoid(gate_logits);  // [B,1,H,W], broadcast over channels
    return add(mul(fused, g), mul(x, affine(g, T(-1), T(1))));
  }

  // The fused context path (x2 of the gate equation), for diagnostics/tests.
  Tensor<T> context_path(const Tensor<T>& x) const {
    std::vector<Tensor<T>> branches;
    for (size_t i = 0; i < 4; ++i) {
      const int d = kDilations[i];
      branches.push_back(relu(conv2d(x, branch_w[i]->value, branch_b[i]->value, {1, d, d})));
    }
    return conv2d(concat_channels(branches), fuse_w->value, fuse_b->value, {1, 1, 1});
  }
};

// Convolutional block attention: channel attention from pooled statistics
// through a shared bottleneck MLP, then spatial attention from channel
// mean/max through a 7x7 conv. Both gates are sigmoids in (0,1).
template <typename T>
struct CbamBlock {
  int channels = 0;
  int reduction = 0;
  std::shared_ptr<Param<T>> mlp1_w, mlp1_b;     // C -> C/r, 1x1
  std::shared_ptr<Param<T>> mlp2_w, mlp2_b;     // C/r -> C, 1x1
  std::shared_ptr<Param<T>> spatial_w, spatial_b;  // 2 -> 1, 7x7

  CbamBlock() = default;

  CbamBlock(ParamSet<T>& ps, const std::string& prefix, int ch, int r, Rng& rng)
      : channels(ch), reduction(r) {
    if (r <= 0 || ch % r != 0)
      fail_invalid("cbam block at " + prefix + ": reduction " + std::to_string(r) +
                   " does not divide " + std::to_string(ch) + " channels");
    mlp1_w = detail::conv_param(ps, prefix + ".mlp1.w", ch / r, ch, 1, rng);
    mlp1_b = detail::bias_param(ps, prefix + ".mlp1.b", ch / r);
    mlp2_w = detail::conv_param(ps, prefix + ".mlp2.w", ch, ch / r, 1, rng);
    mlp2_b = detail::bias_param(ps, prefix + ".mlp2.b", ch);
    spatial_w = detail::conv_param(ps, prefix + ".spatial.w", 1, 2, 7, rng);
    spatial_b = detail::bias_param(ps, prefix + ".spatial.b", 1);
  }

  struct Attention {
    Tensor<T> out;
    Tensor<T> channel_gate;  // [B,C,1,1]
    Tensor<T> spatial_gate;  // [B,1,H,W]
  };

  Attention forward_with_attention(const Tensor<T>& x) const {
    auto mlp = [&](const Tensor<T>& pooled) {
      auto h = relu(conv2d(pooled, mlp1_w->value, mlp1_b->value, {1, 1, 0}));
      return conv2d(h, mlp2_w->value, mlp2_b->value, {1, 1, 0});
    };
    auto a_c = sigmoid(add(mlp(global_avg_pool(x)), mlp(global_max_pool(x))));
    auto refined = mul(x, a_c);
    auto stats = concat_channels(channel_mean(refined), channel_max(refined));
    auto a_s = sigmoid(conv2d(stats, spatial_w->value, spatial_b->value, {1, 1, 3}));
    return {mul(refined, a_s), a_c, a_s};
  }

  Tensor<T> forward(const Tensor<T>& x) const { return forward_with_attention(x).out; }
};

// One encoder layer: CONV block (strided conv + relu), CBAM, AOT, all at the
// layer's output resolution and channel count.
template <typename T>
struct EncoderLayer {
  std::shared_ptr<Param<T>> conv_w, conv_b;
  Conv2dGeom geom;
  CbamBlock<T> cbam;
  AotBlock<T> aot;

  EncoderLayer() = default;

  EncoderLayer(ParamSet<T>& ps, const std::string& prefix, int in_ch, int out_ch, int kernel,
               int stride, int cbam_reduction, Rng& rng) {
    conv_w = detail::conv_param(ps, prefix + ".conv.w", out_ch, in_ch, kernel, rng);
    conv_b = detail::bias_param(ps, prefix + ".conv.b", out_ch);
    geom = {stride, 1, (kernel - 1) / 2};
    cbam = CbamBlock<T>(ps, prefix + ".cbam", out_ch, cbam_reduction, rng);
    aot = AotBlock<T>(ps, prefix + ".aot", out_ch, rng);
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    return aot.forward(cbam.forward(relu(conv2d(x, conv_w->value, conv_b->value, geom))));
  }
};

// One decoder layer: CAT block (encoder skip concatenation) followed by a
// stride-2 transposed conv that doubles the resolution.
template <typename T>
struct DecoderLayer {
  std::shared_ptr<Param<T>> tconv_w, tconv_b;

  DecoderLayer() = default;

  DecoderLayer(ParamSet<T>& ps, const std::string& prefix, int in_ch, int out_ch, Rng& rng) {
    tconv_w = detail::tconv_param(ps, prefix + ".tconv.w", in_ch, out_ch, 3, rng);
    tconv_b = detail::bias_param(ps, prefix + ".tconv.b", out_ch);
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    return relu(conv_transpose2d(x, tconv_w->value, tconv_b->value, {2, 1, 1}));
  }

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& skip) const {
    return forward(concat_channels(x, skip));
  }
};

// Fully convolutional patch discriminator: candidate map conditioned on the
// generator inputs, four stride-2 convs, one logit channel per local patch.
template <typename T>
struct PatchDiscriminator {
  int condition_channels = 0;
  std::array<std::shared_ptr<Param<T>>, 4> conv_w, conv_b;
  std::shared_ptr<Param<T>> head_w, head_b;
  ParamSet<T> params;

  PatchDiscriminator() = default;

  PatchDiscriminator(int condition_ch, int channel_div, uint64_t seed)
      : condition_channels(condition_ch) {
    Rng rng(Rng::derive(seed, {0xD15C}));
    const std::array<int, 4> widths = {64 / channel_div, 128 / channel_div, 256 / channel_div,
                                       512 / channel_div};
    int in_ch = condition_ch + 1;
    for (size_t i = 0; i < 4; ++i) {
      const std::string n = "d.conv" + std::to_string(i + 1);
      conv_w[i] = detail::conv_param(params, n + ".w", widths[i], in_ch, 4, rng);
      conv_b[i] = detail::bias_param(params, n + ".b", widths[i]);
      in_ch = widths[i];
    }
    head_w = detail::conv_param(params, "d.head.w", 1, in_ch, 3, rng);
    head_b = detail::bias_param(params, "d.head.b", 1);
  }

  Tensor<T> forward(const Tensor<T>& condition, const Tensor<T>& candidate) const {
    if (condition.dim(2) != candidate.dim(2) || condition.dim(3) != candidate.dim(3) ||
        condition.dim(0) != candidate.dim(0) || candidate.dim(1) != 1)
      fail_invalid("patch discriminator: candidate " + shape_str(candidate.shape()) +
                   " does not match condition " + shape_str(condition.shape()));
    auto h = concat_channels(condition, candidate);
    for (size_t i = 0; i < 4; ++i)
      h = leaky_relu(conv2d(h, conv_w[i]->value, conv_b[i]->value, {2, 1, 1}), T(0.2));
    return conv2d(h, head_w->value, head_b->value, {1, 1, 1});
  }
};

}  // namespace actgan
