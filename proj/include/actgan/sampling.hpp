#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "actgan/gridmap.hpp"

namespace actgan {

// Sparse observation layouts: a = 1% on a jittered lattice, b = per-map rate
// in [1%,10%] on a jittered lattice, c = the same rate law with i.i.d.
// uniform points, fixed_rate = jittered lattice at a given rate, blocks =
// disjoint 4x4 squares.
enum class SampleSetting { a, b, c, fixed_rate, blocks };

const char* setting_name(SampleSetting s);

struct SampleMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> mask;                    // H*W, 0/1
  std::vector<std::pair<int, int>> points;      // ordered sampled pixels
  std::vector<std::pair<int, int>> block_anchors;  // top-left corners (blocks)
  SampleSetting setting = SampleSetting::fixed_rate;
  double rate = 0.0;  // drawn or fixed sampling rate where applicable
  int omega = 0;
  uint64_t seed = 0;

  bool covers(int r, int c) const { return mask[static_cast<size_t>(r) * width + c] != 0; }
  int64_t popcount() const;
};

// Point masks for settings a/b/c and fixed rates. Sampling is restricted to
// non-building pixels; the point count equals round(rate * H * W).
SampleMask make_mask(SampleSetting setting, const GridMap& buildings, uint64_t seed,
                     double fixed_rate = 0.0);

// Omega disjoint 4x4 blocks, fully in bounds and clear of buildings.
SampleMask make_block_mask(int omega, const GridMap& buildings, uint64_t seed);

// Field values at mask pixels, zero elsewhere.
GridMap masked_samples(const GridMap& field, const SampleMask& mask);

// Measurement noise at the sampled pixels: v' = clamp(v + N(0, sigma/255), 0, 1).
// The underlying normal draws depend only on the seed, so sweeps over sigma
// share noise realizations.
GridMap add_gaussian_noise(const GridMap& samples, const SampleMask& mask, double sigma_gray255,
                           uint64_t seed);

}  // namespace actgan
