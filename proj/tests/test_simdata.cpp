#include <cmath>
#include <fstream>
#include <filesystem>
#include <set>

#include "actgan/dataset.hpp"
#include "actgan/sampling.hpp"
#include "actgan/scenario.hpp"
#include "actgan/simulate.hpp"
#include "doctest.h"

using namespace actgan;

TEST_CASE("noise floor formula") {
  CHECK(noise_floor_db(1.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(noise_floor_db(100.0, 1.0, 3.0) == doctest::Approx(23.0));
  const double base = noise_floor_db(2.5, 0.4, 1.0);
  CHECK(noise_floor_db(25.0, 0.4, 1.0) == doctest::Approx(base + 10.0));
  CHECK_THROWS_AS(noise_floor_db(0.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(noise_floor_db(1.0, -2.0, 0.0), InvalidArgument);
}

TEST_CASE("path-loss threshold arithmetic and normalization") {
  CHECK(pathloss_threshold_db(23.0, 5.0, -90.0) == doctest::Approx(-23.0 + 5.0 - 90.0));
  SimParams p;
  CHECK(normalized_threshold(p.pl_max_db, p) == doctest::Approx(0.0));
  CHECK(normalized_threshold(p.pl_min_db, p) == doctest::Approx(1.0));
  CHECK(normalized_threshold((p.pl_min_db + p.pl_max_db) / 2, p) == doctest::Approx(0.5));
}

TEST_CASE("threshold transform: identity at 0, rescale above, truncate below") {
  GridMap m(1, 4);
  m.values = {0.0f, 0.2f, 0.6f, 1.0f};
  auto id = apply_threshold(m, 0.0);
  for (int i = 0; i < 4; ++i) CHECK(id.values[static_cast<size_t>(i)] == m.values[static_cast<size_t>(i)]);
  auto t = apply_threshold(m, 0.2);
  CHECK(t.values[0] == 0.0f);
  CHECK(t.values[1] == 0.0f);  // boundary truncates
  CHECK(t.values[2] == doctest::Approx(0.5f));
  CHECK(t.values[3] == doctest::Approx(1.0f));
  CHECK_THROWS_AS(apply_threshold(m, 1.0), InvalidArgument);
  CHECK_THROWS_AS(apply_threshold(m, -0.1), InvalidArgument);
}

TEST_CASE("threshold transform is order-preserving") {
  Rng rng(50);
  GridMap m(1, 64);
  for (auto& v : m.values) v = static_cast<float>(rng.uniform());
  auto t = apply_threshold(m, 0.3);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      if (m.values[static_cast<size_t>(i)] <= m.values[static_cast<size_t>(j)])
        CHECK(t.values[static_cast<size_t>(i)] <= t.values[static_cast<size_t>(j)] + 1e-7f);
}

TEST_CASE("simulator: radial symmetry, peak at tx, building interiors zeroed") {
  GridMap empty(33, 33, MapKind::buildings);
  SimParams p;
  auto m = simulate_map(empty, {16, 16}, p);
  CHECK(m.at(16, 16) == 1.0f);  // d <= 1 clamps to the maximum
  for (int r = 0; r < 33; ++r)
    for (int c = 0; c < 33; ++c) CHECK(m.at(r, c) <= m.at(16, 16));
  // Equal distance implies equal value.
  CHECK(m.at(16, 26) == doctest::Approx(m.at(26, 16)));
  CHECK(m.at(6, 16) == doctest::Approx(m.at(16, 6)));
  CHECK(m.at(10, 10) == doctest::Approx(m.at(22, 22)));

  GridMap blocked = empty;
  for (int r = 10; r < 14; ++r)
    for (int c = 10; c < 14; ++c) blocked.at(r, c) = 1.0f;
  auto mb = simulate_map(blocked, {16, 16}, p);
  for (int r = 10; r < 14; ++r)
    for (int c = 10; c < 14; ++c) CHECK(mb.at(r, c) == 0.0f);
  CHECK_THROWS_AS(simulate_map(blocked, {11, 11}, p), InvalidArgument);
}

TEST_CASE("simulator: one wall lowers the value by exactly its normalized penalty") {
  SimParams p;
  GridMap clear(21, 21, MapKind::buildings);
  GridMap walled = clear;
  walled.at(10, 13) = 1.0f;  // single wall pixel on the ray to (10, 18)
  auto a = simulate_map(clear, {10, 10}, p);
  auto b = simulate_map(walled, {10, 10}, p);
  const double penalty = p.per_wall_db / (p.pl_max_db - p.pl_min_db);
  CHECK(a.at(10, 18) - b.at(10, 18) == doctest::Approx(penalty).epsilon(1e-5));
  // Pixels in front of the wall are untouched.
  CHECK(a.at(10, 12) == b.at(10, 12));
}

TEST_CASE("simulator: values are monotone in wall count along a ray") {
  SimParams p;
  GridMap walls0(17, 17, MapKind::buildings);
  GridMap walls1 = walls0;
  walls1.at(8, 10) = 1.0f;
  GridMap walls2 = walls1;
  walls2.at(8, 12) = 1.0f;
  auto m0 = simulate_map(walls0, {8, 8}, p);
  auto m1 = simulate_map(walls1, {8, 8}, p);
  auto m2 = simulate_map(walls2, {8, 8}, p);
  for (int c = 13; c < 17; ++c) {
    CHECK(m1.at(8, c) <= m0.at(8, c));
    CHECK(m2.at(8, c) <= m1.at(8, c));
  }
}

TEST_CASE("setting a samples exactly 1% on a jittered lattice") {
  GridMap empty(256, 256, MapKind::buildings);
  auto m = make_mask(SampleSetting::a, empty, 7);
  CHECK(m.popcount() == 655);  // round(65536 * 0.01)
  CHECK(m.points.size() == 655);
}

TEST_CASE("masks avoid buildings, match their point lists, and are reproducible") {
  auto buildings = make_buildings(64, 0.15, 99);
  for (auto setting : {SampleSetting::a, SampleSetting::b, SampleSetting::c}) {
    auto m1 = make_mask(setting, buildings, 11);
    auto m2 = make_mask(setting, buildings, 11);
    auto m3 = make_mask(setting, buildings, 12);
    CHECK(m1.popcount() == static_cast<int64_t>(m1.points.size()));
    for (const auto& [r, c] : m1.points) CHECK(buildings.at(r, c) <= 0.5f);
    CHECK(m1.points == m2.points);
    CHECK(m1.points != m3.points);
    if (setting != SampleSetting::a) {
      CHECK(m1.rate >= 0.01);
      CHECK(m1.rate <= 0.10);
    }
  }
  auto fixed = make_mask(SampleSetting::fixed_rate, buildings, 11, 0.07);
  CHECK(fixed.popcount() == std::llround(0.07 * 64 * 64));
  CHECK_THROWS_AS(make_mask(SampleSetting::fixed_rate, buildings, 11, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_mask(SampleSetting::fixed_rate, buildings, 11, 0.95), InvalidArgument);
}

TEST_CASE("block masks are disjoint in-bounds 4x4 squares off buildings") {
  auto buildings = make_buildings(64, 0.15, 5);
  for (int omega : {20, 50, 100}) {
    auto m = make_block_mask(omega, buildings, 13);
    CHECK(m.popcount() == omega * 16);
    CHECK(static_cast<int>(m.block_anchors.size()) == omega);
    for (const auto& [r, c] : m.block_anchors) {
      CHECK(r + 3 < 64);
      CHECK(c + 3 < 64);
      for (int dr = 0; dr < 4; ++dr)
        for (int dc = 0; dc < 4; ++dc) CHECK(buildings.at(r + dr, c + dc) <= 0.5f);
    }
    // Disjointness is implied by popcount == 16 * omega, plus every point
    // marked exactly once.
    std::set<std::pair<int, int>> uniq(m.points.begin(), m.points.end());
    CHECK(uniq.size() == m.points.size());
    auto again = make_block_mask(omega, buildings, 13);
    CHECK(m.points == again.points);
  }
  GridMap empty(256, 256, MapKind::buildings);
  auto big = make_block_mask(150, empty, 17);
  CHECK(big.popcount() == 150 * 16);
  GridMap tiny(8, 8, MapKind::buildings);
  CHECK_THROWS_AS(make_block_mask(10, tiny, 3), InvalidArgument);
}

TEST_CASE("gaussian sample noise: sigma 0 identity, clamp, empirical std") {
  GridMap field(320, 320);
  for (auto& v : field.values) v = 0.5f;
  GridMap buildings(320, 320, MapKind::buildings);
  auto mask = make_mask(SampleSetting::fixed_rate, buildings, 3, 0.98);
  auto samples = masked_samples(field, mask);

  auto same = add_gaussian_noise(samples, mask, 0.0, 21);
  for (size_t i = 0; i < same.values.size(); ++i) CHECK(same.values[i] == samples.values[i]);

  const double sigma = 20.0;
  auto noisy = add_gaussian_noise(samples, mask, sigma, 21);
  double acc = 0.0;
  int64_t n = 0;
  for (const auto& [r, c] : mask.points) {
    const double d = static_cast<double>(noisy.at(r, c)) - 0.5;
    acc += d * d;
    ++n;
    CHECK(noisy.at(r, c) >= 0.0f);
    CHECK(noisy.at(r, c) <= 1.0f);
  }
  REQUIRE(n > 100000 - 5000);
  const double emp = std::sqrt(acc / static_cast<double>(n));
  CHECK(emp == doctest::Approx(sigma / 255.0).epsilon(0.02));

  // Common-random-numbers coupling: larger sigma perturbs every sample at
  // least as much, in the same direction.
  auto n10 = add_gaussian_noise(samples, mask, 10.0, 21);
  auto n50 = add_gaussian_noise(samples, mask, 50.0, 21);
  for (const auto& [r, c] : mask.points) {
    const float d10 = n10.at(r, c) - 0.5f;
    const float d50 = n50.at(r, c) - 0.5f;
    CHECK(d10 * d50 >= 0.0f);
    CHECK(std::fabs(d50) + 1e-7f >= std::fabs(d10));
  }
}

TEST_CASE("map files round-trip at 8-bit quantization") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "actgan_map_io";
  fs::create_directories(dir);
  Rng rng(31);
  GridMap m(37, 23);
  for (auto& v : m.values) v = static_cast<float>(rng.uniform());

  for (const char* name : {"m.rmap", "m.pgm"}) {
    const auto path = (dir / name).string();
    write_map(m, path);
    auto back = read_map(path);
    REQUIRE(back.width == m.width);
    REQUIRE(back.height == m.height);
    for (size_t i = 0; i < m.values.size(); ++i)
      CHECK(back.values[i] == static_cast<float>(quantize_gray(m.values[i])) / 255.0f);
    // Quantized values survive a second round-trip bit-exactly.
    write_map(back, path);
    auto twice = read_map(path);
    for (size_t i = 0; i < m.values.size(); ++i) CHECK(twice.values[i] == back.values[i]);
  }

  // 256x256 RMAP size = 12-byte header + 65536 payload bytes.
  GridMap big(256, 256);
  const auto big_path = (dir / "big.rmap").string();
  write_rmap(big, big_path);
  CHECK(fs::file_size(big_path) == 12 + 65536);

  CHECK_THROWS(read_map((dir / "missing.rmap").string()));
  {
    std::ofstream bad((dir / "bad.rmap").string(), std::ios::binary);
    bad << "RMAPxx";
  }
  CHECK_THROWS_AS(read_rmap((dir / "bad.rmap").string()), InvalidArgument);
  fs::remove_all(dir);
}

TEST_CASE("manifest enumerates the full region x transmitter grid") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "actgan_manifest";
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (int region = 0; region < 700; ++region)
    for (int t = 0; t < 80; ++t)
      entries.push_back({region, t, t + 1, "b_" + std::to_string(region) + ".rmap",
                         "g_" + std::to_string(region) + "_" + std::to_string(t) + ".rmap"});
  const auto path = (dir / "manifest.csv").string();
  write_manifest(path, entries);
  auto back = load_manifest(dir.string());
  CHECK(back.size() == 56000);
  CHECK(back[81].region_id == 1);
  CHECK(back[81].tx_row == 1);
  fs::remove_all(dir);
}

TEST_CASE("synthetic dataset is deterministic and region-structured") {
  SyntheticSpec spec;
  spec.regions = 4;
  spec.tx_per_region = 3;
  spec.size = 32;
  spec.seed = 77;
  auto ds = Dataset::synthetic(spec);
  CHECK(ds.size() == 12);
  auto a = ds.get(5);
  auto b = ds.get(5);
  CHECK(a.region_id == 1);
  CHECK(a.tx_index == 2);
  CHECK(a.buildings.values == b.buildings.values);
  CHECK(a.gain.values == b.gain.values);
  CHECK(a.tx == b.tx);
  CHECK(a.buildings.at(a.tx.first, a.tx.second) <= 0.5f);
  // Same region shares the city layout; different transmitters differ.
  auto c = ds.get(3);
  CHECK(c.region_id == 1);
  CHECK(c.buildings.values == a.buildings.values);
  CHECK(c.tx != a.tx);
}

TEST_CASE("region split never leaks a region across subsets") {
  SyntheticSpec spec;
  spec.regions = 20;
  spec.tx_per_region = 2;
  spec.size = 32;
  auto ds = Dataset::synthetic(spec);
  auto split = split_by_region(ds, 14, 3, 3, 5);
  CHECK(split.train.size() == 14);
  CHECK(split.val.size() == 3);
  CHECK(split.test.size() == 3);
  std::set<int> all;
  for (int r : split.train) all.insert(r);
  for (int r : split.val) all.insert(r);
  for (int r : split.test) all.insert(r);
  CHECK(all.size() == 20);  // disjoint union
  auto items = ds.items_in_regions(split.val);
  CHECK(items.size() == 6);
  for (auto idx : items)
    CHECK(std::find(split.val.begin(), split.val.end(), ds.region_of(idx)) != split.val.end());
  CHECK_THROWS_AS(split_by_region(ds, 15, 3, 3, 5), InvalidArgument);
}

TEST_CASE("scenario stacks carry the documented channels") {
  SyntheticSpec spec;
  spec.regions = 2;
  spec.tx_per_region = 2;
  spec.size = 64;
  auto ds = Dataset::synthetic(spec);
  auto item = ds.get(1);

  ScenarioOptions s1;
  s1.scenario = Scenario::s1;
  auto m1 = build_scenario_inputs(item, s1);
  REQUIRE(m1.channels.size() == 2);
  CHECK(m1.channels[0].kind == MapKind::buildings);
  CHECK(m1.channels[1].kind == MapKind::tx_onehot);
  int nonzero = 0;
  for (float v : m1.channels[1].values) nonzero += v != 0.0f ? 1 : 0;
  CHECK(nonzero == 1);
  CHECK(m1.channels[1].at(item.tx.first, item.tx.second) == 1.0f);

  ScenarioOptions s2 = s1;
  s2.scenario = Scenario::s2;
  s2.setting = SampleSetting::a;
  auto m2 = build_scenario_inputs(item, s2);
  REQUIRE(m2.channels.size() == 3);
  CHECK(m2.mask.popcount() == std::llround(0.01 * 64 * 64));
  int sample_nonzero = 0;
  for (float v : m2.channels[2].values) sample_nonzero += v != 0.0f ? 1 : 0;
  CHECK(sample_nonzero <= m2.mask.popcount());
  CHECK(sample_nonzero > 0);

  ScenarioOptions s3 = s1;
  s3.scenario = Scenario::s3;
  s3.omega = 20;
  auto m3 = build_scenario_inputs(item, s3);
  REQUIRE(m3.channels.size() == 3);
  // No transmitter information in any channel: every nonzero pixel of every
  // channel is either a building or a masked sample.
  for (const auto& ch : m3.channels)
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c)
        if (ch.at(r, c) != 0.0f)
          CHECK((item.buildings.at(r, c) > 0.5f || m3.mask.covers(r, c)));

  auto x = stack_inputs({m2, m2});
  CHECK(x.shape() == Shape{2, 3, 64, 64});
  auto y = stack_targets({m2, m2});
  CHECK(y.shape() == Shape{2, 1, 64, 64});

  DatasetItem no_tx = item;
  no_tx.tx = {-1, -1};
  CHECK_THROWS_AS(build_scenario_inputs(no_tx, s2), InvalidArgument);
  auto ok = build_scenario_inputs(no_tx, s3);  // scenario 3 needs no transmitter
  CHECK(ok.channels.size() == 3);
}

TEST_CASE("samples observe the thresholded field") {
  SyntheticSpec spec;
  spec.regions = 1;
  spec.tx_per_region = 1;
  spec.size = 64;
  auto ds = Dataset::synthetic(spec);
  auto item = ds.get(0);
  ScenarioOptions opts;
  opts.scenario = Scenario::s2;
  opts.setting = SampleSetting::fixed_rate;
  opts.rate = 0.10;
  opts.threshold = 0.3;
  auto m = build_scenario_inputs(item, opts);
  auto thresholded = apply_threshold(item.gain, 0.3);
  for (const auto& [r, c] : m.mask.points)
    CHECK(m.samples.at(r, c) == thresholded.at(r, c));
}
