#include <cmath>

#include "actgan/blocks.hpp"
#include "actgan/generator.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace actgan;

namespace {

template <typename T>
Tensor<T> random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<T> v(static_cast<size_t>(numel(shape)));
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return Tensor<T>(std::move(shape), std::move(v));
}

}  // namespace

TEST_CASE("aot gate hooks pin the output to each side of the gate") {
  ParamSet<float> ps;
  Rng rng(3);
  AotBlock<float> aot(ps, "aot", 8, rng);
  auto x = random_tensor<float>({1, 8, 10, 10}, rng);
  auto x2 = aot.context_path(x);

  aot.gate_override = AotBlock<float>::GateOverride::force_open;
  auto open = aot.forward(x);
  for (int64_t i = 0; i < open.size(); ++i)
    CHECK(std::fabs(open.data()[static_cast<size_t>(i)] - x2.data()[static_cast<size_t>(i)]) <=
          1e-6f);

  aot.gate_override = AotBlock<float>::GateOverride::force_closed;
  auto closed = aot.forward(x);
  for (int64_t i = 0; i < closed.size(); ++i)
    CHECK(std::fabs(closed.data()[static_cast<size_t>(i)] - x.data()[static_cast<size_t>(i)]) <=
          1e-6f);
}

TEST_CASE("aot maps zero input to zero output") {
  ParamSet<float> ps;
  Rng rng(5);
  AotBlock<float> aot(ps, "aot", 4, rng);
  auto y = aot.forward(Tensor<float>::zeros({2, 4, 8, 8}));
  for (float v : y.data()) CHECK(v == 0.0f);
}

TEST_CASE("aot preserves shape and stays on the gate segment") {
  Rng rng(6);
  for (int c : {4, 8, 16}) {
    for (int hw : {8, 13}) {
      ParamSet<float> ps;
      AotBlock<float> aot(ps, "aot", c, rng);
      auto x = random_tensor<float>({1, c, hw, hw}, rng);
      auto y = aot.forward(x);
      CHECK(y.shape() == x.shape());
      // Every output element is a convex combination of x (identity path)
      // and the fused context path at that position.
      auto x2 = aot.context_path(x);
      for (int64_t i = 0; i < y.size(); ++i) {
        const float lo = std::min(x.data()[static_cast<size_t>(i)], x2.data()[static_cast<size_t>(i)]);
        const float hi = std::max(x.data()[static_cast<size_t>(i)], x2.data()[static_cast<size_t>(i)]);
        CHECK(y.data()[static_cast<size_t>(i)] >= lo - 1e-5f);
        CHECK(y.data()[static_cast<size_t>(i)] <= hi + 1e-5f);
      }
    }
  }
}

TEST_CASE("aot rejects channel counts not divisible by 4") {
  ParamSet<float> ps;
  Rng rng(7);
  CHECK_THROWS_AS(AotBlock<float>(ps, "aot", 6, rng), InvalidArgument);
}

TEST_CASE("cbam attention maps are sigmoid-bounded and contract the input") {
  ParamSet<float> ps;
  Rng rng(8);
  CbamBlock<float> cbam(ps, "cbam", 8, 4, rng);
  auto x = random_tensor<float>({2, 8, 9, 9}, rng);
  auto att = cbam.forward_with_attention(x);
  for (float v : att.channel_gate.data()) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
  for (float v : att.spatial_gate.data()) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
  for (int64_t i = 0; i < x.size(); ++i)
    CHECK(std::fabs(att.out.data()[static_cast<size_t>(i)]) <=
          std::fabs(x.data()[static_cast<size_t>(i)]) + 1e-7f);

  auto zero = cbam.forward(Tensor<float>::zeros({1, 8, 9, 9}));
  for (float v : zero.data()) CHECK(v == 0.0f);
}

TEST_CASE("cbam rejects reductions that do not divide the channel count") {
  ParamSet<float> ps;
  Rng rng(9);
  CHECK_THROWS_AS(CbamBlock<float>(ps, "cbam", 8, 3, rng), InvalidArgument);
}

TEST_CASE("encoder layers reproduce the full-scale layer geometry") {
  Rng rng(10);
  // Layer 1: 256x256x2 -> 256x256x64, kernel 7, stride 1.
  {
    ParamSet<float> ps;
    EncoderLayer<float> l1(ps, "enc1", 2, 64, 7, 1, 16, rng);
    auto y = l1.forward(random_tensor<float>({1, 2, 256, 256}, rng));
    CHECK(y.shape() == Shape{1, 64, 256, 256});
  }
  // Layer 2: 256x256x64 -> 128x128x128, kernel 4, stride 2.
  {
    ParamSet<float> ps;
    EncoderLayer<float> l2(ps, "enc2", 64, 128, 4, 2, 16, rng);
    auto y = l2.forward(random_tensor<float>({1, 64, 256, 256}, rng, -0.1, 0.1));
    CHECK(y.shape() == Shape{1, 128, 128, 128});
  }
}

TEST_CASE("desk-scale encoder chain ends at 8x8x128") {
  GeneratorConfig cfg;
  cfg.base_resolution = 64;
  cfg.channel_div = 4;
  cfg.input_channels = 3;
  cfg.cbam_reduction = 4;
  cfg.validate();
  ParamSet<float> ps;
  Rng rng(11);
  GeneratorStage<float> stage(ps, "s", cfg, cfg.input_channels, rng);
  auto x = random_tensor<float>({1, 3, 64, 64}, rng);
  auto e1 = stage.enc[0].forward(x);
  auto e2 = stage.enc[1].forward(e1);
  auto e3 = stage.enc[2].forward(e2);
  auto e4 = stage.enc[3].forward(e3);
  CHECK(e1.shape() == Shape{1, 16, 64, 64});
  CHECK(e2.shape() == Shape{1, 32, 32, 32});
  CHECK(e3.shape() == Shape{1, 64, 16, 16});
  CHECK(e4.shape() == Shape{1, 128, 8, 8});
}

TEST_CASE("decoder layer doubles resolution and obeys the concat contract") {
  Rng rng(12);
  // Full scale: decode 32x32x512 to 64x64x256 (no skip at the bottleneck).
  {
    ParamSet<float> ps;
    DecoderLayer<float> d5(ps, "dec5", 512, 256, rng);
    auto y = d5.forward(random_tensor<float>({1, 512, 32, 32}, rng, -0.05, 0.05));
    CHECK(y.shape() == Shape{1, 256, 64, 64});
  }
  // Skip path: T-conv input channels = decoder channels + skip channels.
  {
    ParamSet<float> ps;
    DecoderLayer<float> d6(ps, "dec6", 64 + 64, 32, rng);
    CHECK(d6.tconv_w->value.shape() == Shape{128, 32, 3, 3});
    auto x = random_tensor<float>({1, 64, 8, 8}, rng);
    auto skip = random_tensor<float>({1, 64, 8, 8}, rng);
    auto y = d6.forward(x, skip);
    CHECK(y.shape() == Shape{1, 32, 16, 16});
  }
}

TEST_CASE("patch discriminator emits a logit grid, not a scalar") {
  // Full scale: 256 -> 16x16 patch logits through 4 stride-2 convs.
  {
    PatchDiscriminator<float> disc(2, 1, 21);
    Rng rng(13);
    auto cond = random_tensor<float>({1, 2, 256, 256}, rng);
    auto cand = random_tensor<float>({1, 1, 256, 256}, rng, 0.0, 1.0);
    auto logits = disc.forward(cond, cand);
    CHECK(logits.shape() == Shape{1, 1, 16, 16});
    auto again = disc.forward(cond, cand);
    for (int64_t i = 0; i < logits.size(); ++i)
      CHECK(logits.data()[static_cast<size_t>(i)] == again.data()[static_cast<size_t>(i)]);
  }
  // Desk scale: 64 -> 4x4.
  {
    PatchDiscriminator<float> disc(3, 4, 22);
    Rng rng(14);
    auto cond = random_tensor<float>({2, 3, 64, 64}, rng);
    auto cand = random_tensor<float>({2, 1, 64, 64}, rng, 0.0, 1.0);
    CHECK(disc.forward(cond, cand).shape() == Shape{2, 1, 4, 4});
    CHECK_THROWS_AS(disc.forward(cond, random_tensor<float>({2, 1, 32, 32}, rng)),
                    InvalidArgument);
  }
}

TEST_CASE("patch discriminator logits shift with the input by one cell per total stride") {
  PatchDiscriminator<float> disc(1, 4, 23);
  const int n = 256, total_stride = 16;
  auto cond = Tensor<float>::zeros({1, 1, n, n});
  auto impulse_at = [&](int r, int c) {
    auto cand = Tensor<float>::zeros({1, 1, n, n});
    cand.mutable_data()[static_cast<size_t>(r) * n + c] = 1.0f;
    return disc.forward(cond, cand);
  };
  auto a = impulse_at(96, 96);
  auto b = impulse_at(96 + total_stride, 96 + total_stride);
  const int grid = a.dim(2);
  for (int i = 3; i < grid - 4; ++i)
    for (int j = 3; j < grid - 4; ++j) {
      const float va = a.data()[static_cast<size_t>(i) * grid + j];
      const float vb = b.data()[static_cast<size_t>(i + 1) * grid + j + 1];
      CHECK(va == doctest::Approx(vb).epsilon(1e-5));
    }
}

TEST_CASE("gradients flow into every block parameter") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    ParamSet<float> ps;
    AotBlock<float> aot(ps, "aot", 8, rng);
    CbamBlock<float> cbam(ps, "cbam", 8, 4, rng);
    PatchDiscriminator<float> disc(2, 8, seed);

    Tape<float> tape;
    ps.bind(tape);
    auto x = random_tensor<float>({2, 8, 12, 12}, rng);
    auto y = aot.forward(cbam.forward(x));
    auto grads = tape.backward(mean(square(y)));
    for (const auto& p : ps.entries()) {
      double norm = 0.0;
      for (float g : grads.of(p->value).data()) norm += static_cast<double>(g) * g;
      INFO("parameter ", p->name, " seed ", seed);
      CHECK(norm > 0.0);
    }
    ps.unbind();

    Tape<float> dtape;
    disc.params.bind(dtape);
    auto cond = random_tensor<float>({1, 2, 64, 64}, rng);
    auto cand = random_tensor<float>({1, 1, 64, 64}, rng, 0.0, 1.0);
    auto logits = disc.forward(cond, cand);
    auto dgrads = dtape.backward(mean(square(logits)));
    for (const auto& p : disc.params.entries()) {
      double norm = 0.0;
      for (float g : dgrads.of(p->value).data()) norm += static_cast<double>(g) * g;
      INFO("parameter ", p->name, " seed ", seed);
      CHECK(norm > 0.0);
    }
    disc.params.unbind();
  }
}

TEST_CASE("composed aot and cbam gradients match finite differences (f64)") {
  Rng rng(33);
  ParamSet<double> ps;
  AotBlock<double> aot(ps, "aot", 4, rng);
  CbamBlock<double> cbam(ps, "cbam", 4, 2, rng);
  auto x = random_tensor<double>({1, 4, 6, 6}, rng);

  auto eval = [&]() {
    auto y = aot.forward(cbam.forward(x));
    double acc = 0.0;
    for (double v : y.data()) acc += v * v;
    return acc / static_cast<double>(y.size());
  };

  Tape<double> tape;
  ps.bind(tape);
  auto loss = mean(square(aot.forward(cbam.forward(x))));
  auto grads = tape.backward(loss);
  std::vector<Tensor<double>> got;
  for (const auto& p : ps.entries()) got.push_back(grads.of(p->value));
  ps.unbind();  // FD evaluates the detached forward

  for (size_t i = 0; i < ps.entries().size(); ++i) {
    const auto& p = ps.entries()[i];
    auto want = oracle::fd_gradient<double>(eval, p->value.mutable_data(), 1e-6);
    const double err = oracle::max_rel_err(got[i].data(), want);
    INFO("parameter ", p->name, " err ", err);
    CHECK(err < 1e-4);
  }
}
