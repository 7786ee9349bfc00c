#include "actgan/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "actgan/rng.hpp"
#include "actgan/util.hpp"

namespace actgan {

const char* setting_name(SampleSetting s) {
  switch (s) {
    case SampleSetting::a: return "a";
    case SampleSetting::b: return "b";
    case SampleSetting::c: return "c";
    case SampleSetting::fixed_rate: return "fixed";
    case SampleSetting::blocks: return "blocks";
  }
  return "?";
}

int64_t SampleMask::popcount() const {
  int64_t n = 0;
  for (uint8_t v : mask) n += v;
  return n;
}

namespace {

std::vector<std::pair<int, int>> free_pixels(const GridMap& buildings) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<size_t>(buildings.pixels()));
  for (int r = 0; r < buildings.height; ++r)
    for (int c = 0; c < buildings.width; ++c)
      if (buildings.at(r, c) <= 0.5f) out.emplace_back(r, c);
  return out;
}

void mark(SampleMask& m, int r, int c) {
  m.mask[static_cast<size_t>(r) * m.width + c] = 1;
  m.points.emplace_back(r, c);
}

// Spread points over a jittered lattice: one random free pixel inside each of
// `target` randomly chosen grid cells, topped up uniformly when cells are
// fully built over.
void lattice_points(SampleMask& m, const GridMap& buildings, int64_t target, Rng& rng) {
  const int h = buildings.height, w = buildings.width;
  const int rows = std::max(1, static_cast<int>(std::ceil(
                                   std::sqrt(static_cast<double>(target) * h / w))));
  const int cols = std::max(1, static_cast<int>(std::ceil(static_cast<double>(target) / rows)));
  std::vector<int> cells(static_cast<size_t>(rows) * cols);
  for (size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
  rng.shuffle(cells);

  int64_t placed = 0;
  for (int cell : cells) {
    if (placed >= target) break;
    const int cr = cell / cols, cc = cell % cols;
    const int r0 = static_cast<int>(static_cast<int64_t>(cr) * h / rows);
    const int r1 = static_cast<int>(static_cast<int64_t>(cr + 1) * h / rows);
    const int c0 = static_cast<int>(static_cast<int64_t>(cc) * w / cols);
    const int c1 = static_cast<int>(static_cast<int64_t>(cc + 1) * w / cols);
    std::vector<std::pair<int, int>> candidates;
    for (int r = r0; r < r1; ++r)
      for (int c = c0; c < c1; ++c)
        if (buildings.at(r, c) <= 0.5f && !m.covers(r, c)) candidates.emplace_back(r, c);
    if (candidates.empty()) continue;
    const auto [r, c] = candidates[static_cast<size_t>(rng.uniform_int(
        static_cast<int>(candidates.size())))];
    mark(m, r, c);
    ++placed;
  }

  if (placed < target) {
    auto rest = free_pixels(buildings);
    std::erase_if(rest, [&](const auto& p) { return m.covers(p.first, p.second); });
    rng.shuffle(rest);
    for (const auto& [r, c] : rest) {
      if (placed >= target) break;
      mark(m, r, c);
      ++placed;
    }
  }
}

}  // namespace

SampleMask make_mask(SampleSetting setting, const GridMap& buildings, uint64_t seed,
                     double fixed_rate) {
  if (setting == SampleSetting::blocks)
    fail_invalid("make_mask: block masks are built by make_block_mask");
  SampleMask m;
  m.width = buildings.width;
  m.height = buildings.height;
  m.mask.assign(static_cast<size_t>(buildings.pixels()), 0);
  m.setting = setting;
  m.seed = seed;

  Rng rng(Rng::derive(seed, {0x5A3Bull, static_cast<uint64_t>(setting)}));
  double rate = 0.0;
  switch (setting) {
    case SampleSetting::a: rate = 0.01; break;
    case SampleSetting::b:
    case SampleSetting::c: rate = rng.uniform(0.01, 0.10); break;
    case SampleSetting::fixed_rate:
      if (fixed_rate <= 0.0 || fixed_rate > 1.0)
        fail_invalid("make_mask: fixed sampling rate must lie in (0,1]");
      rate = fixed_rate;
      break;
    case SampleSetting::blocks: break;
  }
  m.rate = rate;

  const int64_t target = std::llround(rate * static_cast<double>(buildings.pixels()));
  auto free = free_pixels(buildings);
  if (target > static_cast<int64_t>(free.size()))
    fail_invalid("make_mask: requested " + std::to_string(target) + " samples but only " +
                 std::to_string(free.size()) + " non-building pixels exist");

  if (setting == SampleSetting::c) {
    rng.shuffle(free);
    for (int64_t i = 0; i < target; ++i) mark(m, free[static_cast<size_t>(i)].first,
                                              free[static_cast<size_t>(i)].second);
  } else {
    lattice_points(m, buildings, target, rng);
  }
  return m;
}

SampleMask make_block_mask(int omega, const GridMap& buildings, uint64_t seed) {
  if (omega <= 0) fail_invalid("make_block_mask: omega must be positive");
  const int h = buildings.height, w = buildings.width;
  if (h < 4 || w < 4) fail_invalid("make_block_mask: map smaller than one 4x4 block");

  // Anchors whose full 4x4 block stays inside the map and off buildings.
  std::vector<std::pair<int, int>> anchors;
  for (int r = 0; r + 3 < h; ++r)
    for (int c = 0; c + 3 < w; ++c) {
      bool clear = true;
      for (int dr = 0; dr < 4 && clear; ++dr)
        for (int dc = 0; dc < 4; ++dc)
          if (buildings.at(r + dr, c + dc) > 0.5f) {
            clear = false;
            break;
          }
      if (clear) anchors.emplace_back(r, c);
    }
  int64_t free_count = 0;
  for (float v : buildings.values) free_count += v <= 0.5f ? 1 : 0;
  if (omega > static_cast<int>(anchors.size()) || static_cast<int64_t>(omega) * 16 > free_count)
    fail_invalid("make_block_mask: not enough clear area for " + std::to_string(omega) +
                 " blocks");

  for (int restart = 0; restart < 10; ++restart) {
    SampleMask m;
    m.width = w;
    m.height = h;
    m.mask.assign(static_cast<size_t>(buildings.pixels()), 0);
    m.setting = SampleSetting::blocks;
    m.omega = omega;
    m.seed = seed;
    Rng rng(Rng::derive(seed, {0xB10Cull, static_cast<uint64_t>(restart)}));

    int placed = 0;
    int64_t attempts = 0;
    const int64_t max_attempts = 400LL * omega;
    while (placed < omega && attempts < max_attempts) {
      ++attempts;
      const auto [r, c] = anchors[static_cast<size_t>(rng.uniform_int(
          static_cast<int>(anchors.size())))];
      bool disjoint = true;
      for (int dr = 0; dr < 4 && disjoint; ++dr)
        for (int dc = 0; dc < 4; ++dc)
          if (m.covers(r + dr, c + dc)) {
            disjoint = false;
            break;
          }
      if (!disjoint) continue;
      m.block_anchors.emplace_back(r, c);
      for (int dr = 0; dr < 4; ++dr)
        for (int dc = 0; dc < 4; ++dc) mark(m, r + dr, c + dc);
      ++placed;
    }
    if (placed == omega) return m;
  }
  fail_invalid("make_block_mask: could not place " + std::to_string(omega) +
               " disjoint 4x4 blocks after bounded retries (map too built-up?)");
}

GridMap masked_samples(const GridMap& field, const SampleMask& mask) {
  if (field.width != mask.width || field.height != mask.height)
    fail_invalid("masked_samples: field and mask dimensions differ");
  GridMap out(field.height, field.width, MapKind::samples);
  for (const auto& [r, c] : mask.points) out.at(r, c) = field.at(r, c);
  return out;
}

GridMap add_gaussian_noise(const GridMap& samples, const SampleMask& mask, double sigma_gray255,
                           uint64_t seed) {
  if (sigma_gray255 < 0) fail_invalid("add_gaussian_noise: sigma must be >= 0");
  if (samples.width != mask.width || samples.height != mask.height)
    fail_invalid("add_gaussian_noise: map and mask dimensions differ");
  GridMap out = samples;
  Rng rng(Rng::derive(seed, {0x4015Eull}));
  const double sigma = sigma_gray255 / 255.0;
  for (const auto& [r, c] : mask.points) {
    const double z = rng.normal();  // drawn sigma-independently for coupling
    const double v = static_cast<double>(out.at(r, c)) + sigma * z;
    out.at(r, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

}  // namespace actgan
