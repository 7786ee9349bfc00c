#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "actgan/blocks.hpp"

namespace actgan {

// Architecture knobs. The full-scale layer plan is
//   resolution: 256 256 128 64 32 | 64 128 256 | 256
//   channels:   in  64  128 256 512 | 256 128 64 | 1
//   kernels:        7   4   4   4  | 3   3   3  | 3
// channel_div scales every width down for desk-size runs.
struct GeneratorConfig {
  int base_resolution = 256;
  int channel_div = 1;     // 1 = full width, 4 = desk width
  int input_channels = 2;  // 2 or 3 depending on scenario
  int cbam_reduction = 16;
  uint64_t seed = 1;

  std::array<int, 4> encoder_channels() const {
    return {64 / channel_div, 128 / channel_div, 256 / channel_div, 512 / channel_div};
  }

  void validate() const {
    if (input_channels != 2 && input_channels != 3)
      fail_invalid("generator config: input_channels must be 2 or 3");
    if (channel_div < 1 || 64 % channel_div != 0 || (64 / channel_div) % 4 != 0)
      fail_invalid("generator config: channel_div must divide 64 with a multiple of 4 left");
    if (base_resolution < 16 || base_resolution % 8 != 0)
      fail_invalid("generator config: base_resolution must be a multiple of 8, >= 16");
    for (int c : encoder_channels())
      if (cbam_reduction <= 0 || c % cbam_reduction != 0)
        fail_invalid("generator config: cbam_reduction must divide every layer width");
  }

  std::string architecture_string() const {
    return "actgan-g:res=" + std::to_string(base_resolution) +
           ";div=" + std::to_string(channel_div) + ";cin=" + std::to_string(input_channels) +
           ";cbam_r=" + std::to_string(cbam_reduction);
  }
};

// Row of the generator layer table, exposed for shape checks.
struct LayerSpec {
  std::string name;
  int resolution = 0;
  int channels = 0;
  int kernel = 0;  // 0 where the table lists none
  int stride = 1;
};

inline std::vector<LayerSpec> generator_layer_table(const GeneratorConfig& cfg) {
  const auto ch = cfg.encoder_channels();
  const int r = cfg.base_resolution;
  return {
      {"input", r, cfg.input_channels, 0, 1},
      {"enc1", r, ch[0], 7, 1},
      {"enc2", r / 2, ch[1], 4, 2},
      {"enc3", r / 4, ch[2], 4, 2},
      {"enc4", r / 8, ch[3], 4, 2},
      {"dec5", r / 4, ch[2], 3, 2},
      {"dec6", r / 2, ch[1], 3, 2},
      {"dec7", r, ch[0], 3, 2},
      {"output", r, 1, 0, 1},
  };
}

// One encoder-decoder stage: 7 layers plus the 1-channel sigmoid head. Skip
// concatenation pairs decoder inputs with the encoder feature at the same
// resolution (enc3->dec6, enc2->dec7, enc1->head).
template <typename T>
struct GeneratorStage {
  std::array<EncoderLayer<T>, 4> enc;
  std::array<DecoderLayer<T>, 3> dec;
  std::shared_ptr<Param<T>> head_w, head_b;

  GeneratorStage() = default;

  GeneratorStage(ParamSet<T>& ps, const std::string& prefix, const GeneratorConfig& cfg,
                 int in_channels, Rng& rng) {
    const auto ch = cfg.encoder_channels();
    enc[0] = EncoderLayer<T>(ps, prefix + ".enc1", in_channels, ch[0], 7, 1, cfg.cbam_reduction,
                             rng);
    enc[1] = EncoderLayer<T>(ps, prefix + ".enc2", ch[0], ch[1], 4, 2, cfg.cbam_reduction, rng);
    enc[2] = EncoderLayer<T>(ps, prefix + ".enc3", ch[1], ch[2], 4, 2, cfg.cbam_reduction, rng);
    enc[3] = EncoderLayer<T>(ps, prefix + ".enc4", ch[2], ch[3], 4, 2, cfg.cbam_reduction, rng);
    dec[0] = DecoderLayer<T>(ps, prefix + ".dec5", ch[3], ch[2], rng);
    dec[1] = DecoderLayer<T>(ps, prefix + ".dec6", ch[2] + ch[2], ch[1], rng);
    dec[2] = DecoderLayer<T>(ps, prefix + ".dec7", ch[1] + ch[1], ch[0], rng);
    head_w = detail::conv_param(ps, prefix + ".head.w", 1, ch[0] + ch[0], 3, rng);
    head_b = detail::bias_param(ps, prefix + ".head.b", 1);
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    auto e1 = enc[0].forward(x);
    auto e2 = enc[1].forward(e1);
    auto e3 = enc[2].forward(e2);
    auto e4 = enc[3].forward(e3);
    auto d5 = dec[0].forward(e4);
    auto d6 = dec[1].forward(d5, e3);
    auto d7 = dec[2].forward(d6, e2);
    auto head_in = concat_channels(d7, e1);
    return sigmoid(conv2d(head_in, head_w->value, head_b->value, {1, 1, 1}));
  }
};

// Two-stage generator: stage 1 maps the scenario inputs to a coarse map,
// stage 2 refines from the inputs concatenated with the stage-1 output. Both
// stages emit [B,1,H,W] maps in [0,1].
template <typename T>
class Generator {
 public:
  explicit Generator(const GeneratorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(Rng::derive(cfg_.seed, {0x6E9}));
    stage1_ = GeneratorStage<T>(params_, "s1", cfg_, cfg_.input_channels, rng);
    stage2_ = GeneratorStage<T>(params_, "s2", cfg_, cfg_.input_channels + 1, rng);
  }

  struct Output {
    Tensor<T> stage1;
    Tensor<T> stage2;
  };

  // `ablate_stage1` severs the inter-stage connection (stage 2 sees zeros in
  // place of the stage-1 map); used to verify the concatenation path is live.
  Output forward(const Tensor<T>& inputs, bool ablate_stage1 = false) const {
    if (inputs.ndim() != 4 || inputs.dim(1) != cfg_.input_channels ||
        inputs.dim(2) != cfg_.base_resolution || inputs.dim(3) != cfg_.base_resolution)
      fail_invalid("generator: input " + shape_str(inputs.shape()) + " does not match config " +
                   cfg_.architecture_string());
    auto s1 = stage1_.forward(inputs);
    auto bridge = ablate_stage1 ? Tensor<T>::zeros(s1.shape()) : s1;
    auto s2 = stage2_.forward(concat_channels(inputs, bridge));
    return {std::move(s1), std::move(s2)};
  }

  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  const GeneratorConfig& config() const { return cfg_; }
  GeneratorStage<T>& stage1() { return stage1_; }
  GeneratorStage<T>& stage2() { return stage2_; }

 private:
  GeneratorConfig cfg_;
  ParamSet<T> params_;
  GeneratorStage<T> stage1_, stage2_;
};

}  // namespace actgan
