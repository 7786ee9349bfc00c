#pragma once

#include <array>
#include <vector>

#include "actgan/ops.hpp"
#include "actgan/params.hpp"

namespace actgan {

inline constexpr uint64_t kDefaultPyramidSeed = 0x5EEDF00Dull;

// Frozen random-weight feature extractor backing the perceptual and style
// losses: five stages of (3x3 conv, stride 2, relu), taps after each stage.
// Weights are fixed by seed at construction and never trained.
template <typename T>
class FeaturePyramid {
 public:
  static constexpr int kStages = 5;

  explicit FeaturePyramid(uint64_t seed = kDefaultPyramidSeed) : seed_(seed) {
    Rng rng(Rng::derive(seed, {0xF3A7}));
    const std::array<int, kStages> widths = {16, 32, 64, 128, 128};
    int in_ch = 1;
    for (int s = 0; s < kStages; ++s) {
      weights_[static_cast<size_t>(s)] = kaiming_uniform<T>(
          {widths[static_cast<size_t>(s)], in_ch, 3, 3}, static_cast<int64_t>(in_ch) * 9, rng);
      in_ch = widths[static_cast<size_t>(s)];
    }
  }

  // Activations phi_1..phi_5 for a [B,1,H,W] map; H and W must allow five
  // stride-2 halvings (H, W >= 32).
  std::vector<Tensor<T>> taps(const Tensor<T>& x) const {
    if (x.ndim() != 4 || x.dim(1) != 1)
      fail_invalid("feature pyramid: expected [B,1,H,W] input, got " + shape_str(x.shape()));
    std::vector<Tensor<T>> out;
    out.reserve(kStages);
    Tensor<T> h = x;
    for (int s = 0; s < kStages; ++s) {
      h = relu(conv2d(h, weights_[static_cast<size_t>(s)], Tensor<T>(), {2, 1, 1}));
      out.push_back(h);
    }
    return out;
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::array<Tensor<T>, kStages> weights_;
};

}  // namespace actgan
