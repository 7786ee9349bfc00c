#include "actgan/dataset.hpp"

#include <algorithm>

#include "actgan/util.hpp"

namespace actgan {

GridMap make_buildings(int size, double coverage, uint64_t seed) {
  if (size < 16) fail_invalid("make_buildings: map size must be >= 16");
  if (coverage < 0.0 || coverage > 0.4)
    fail_invalid("make_buildings: coverage must lie in [0, 0.4]");
  GridMap m(size, size, MapKind::buildings);
  Rng rng(Rng::derive(seed, {0xB11Dull}));
  const int64_t target = static_cast<int64_t>(coverage * size * size);
  int64_t covered = 0;
  const int min_side = std::max(2, size / 16);
  const int max_side = std::max(min_side + 1, size / 5);
  for (int attempt = 0; attempt < 200 && covered < target; ++attempt) {
    const int bh = min_side + rng.uniform_int(max_side - min_side);
    const int bw = min_side + rng.uniform_int(max_side - min_side);
    const int r0 = rng.uniform_int(size - bh);
    const int c0 = rng.uniform_int(size - bw);
    for (int r = r0; r < r0 + bh; ++r)
      for (int c = c0; c < c0 + bw; ++c) {
        if (m.at(r, c) < 0.5f) {
          m.at(r, c) = 1.0f;
          ++covered;
        }
      }
  }
  return m;
}

std::pair<int, int> pick_tx(const GridMap& buildings, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int r = rng.uniform_int(buildings.height);
    const int c = rng.uniform_int(buildings.width);
    if (buildings.at(r, c) <= 0.5f) return {r, c};
  }
  for (int r = 0; r < buildings.height; ++r)
    for (int c = 0; c < buildings.width; ++c)
      if (buildings.at(r, c) <= 0.5f) return {r, c};
  fail_invalid("pick_tx: map has no free pixel");
}

Dataset Dataset::synthetic(const SyntheticSpec& spec) {
  if (spec.regions <= 0 || spec.tx_per_region <= 0)
    fail_invalid("synthetic dataset: regions and tx_per_region must be positive");
  spec.sim.validate();
  Dataset ds;
  ds.synthetic_ = true;
  ds.spec_ = spec;
  ds.regions_ = spec.regions;
  return ds;
}

Dataset Dataset::ingest(const std::string& manifest_path_or_dir) {
  Dataset ds;
  ds.synthetic_ = false;
  ds.entries_ = load_manifest(manifest_path_or_dir);
  if (ds.entries_.empty()) fail_invalid("ingest: manifest lists no samples");
  for (const auto& e : ds.entries_) {
    if (std::find(ds.region_ids_.begin(), ds.region_ids_.end(), e.region_id) ==
        ds.region_ids_.end())
      ds.region_ids_.push_back(e.region_id);
  }
  ds.regions_ = static_cast<int>(ds.region_ids_.size());
  return ds;
}

int64_t Dataset::size() const {
  if (synthetic_) return static_cast<int64_t>(spec_.regions) * spec_.tx_per_region;
  return static_cast<int64_t>(entries_.size());
}

int Dataset::region_of(int64_t idx) const {
  if (idx < 0 || idx >= size()) fail_invalid("dataset: index out of range");
  if (synthetic_) return static_cast<int>(idx / spec_.tx_per_region);
  return entries_[static_cast<size_t>(idx)].region_id;
}

DatasetItem Dataset::get(int64_t idx) const {
  if (idx < 0 || idx >= size()) fail_invalid("dataset: index out of range");
  DatasetItem item;
  if (synthetic_) {
    const int region = static_cast<int>(idx / spec_.tx_per_region);
    const int tx_i = static_cast<int>(idx % spec_.tx_per_region);
    item.region_id = region;
    item.tx_index = tx_i;
    item.buildings = make_buildings(spec_.size, spec_.building_coverage,
                                    Rng::derive(spec_.seed, {static_cast<uint64_t>(region)}));
    Rng tx_rng(Rng::derive(spec_.seed,
                           {static_cast<uint64_t>(region), static_cast<uint64_t>(tx_i), 0x7Eull}));
    item.tx = pick_tx(item.buildings, tx_rng);
    item.gain = simulate_map(item.buildings, item.tx, spec_.sim);
    return item;
  }
  const auto& e = entries_[static_cast<size_t>(idx)];
  item.region_id = e.region_id;
  item.tx_index = static_cast<int>(idx);
  item.buildings = read_map(e.buildings_path);
  item.buildings.kind = MapKind::buildings;
  item.gain = read_map(e.gain_path);
  item.gain.kind = MapKind::pathloss;
  if (e.tx_row < 0 || e.tx_row >= item.gain.height || e.tx_col < 0 ||
      e.tx_col >= item.gain.width)
    fail_invalid("ingest: transmitter position out of bounds for region " +
                 std::to_string(e.region_id));
  if (item.buildings.width != item.gain.width || item.buildings.height != item.gain.height)
    fail_invalid("ingest: buildings and gain map dimensions differ for region " +
                 std::to_string(e.region_id));
  item.tx = {e.tx_row, e.tx_col};
  item.gain.tx = item.tx;
  return item;
}

std::vector<int64_t> Dataset::items_in_regions(const std::vector<int>& region_ids) const {
  std::vector<int64_t> out;
  for (int64_t i = 0; i < size(); ++i) {
    const int r = region_of(i);
    if (std::find(region_ids.begin(), region_ids.end(), r) != region_ids.end()) out.push_back(i);
  }
  return out;
}

RegionSplit split_by_region(const Dataset& ds, int n_train, int n_val, int n_test,
                            uint64_t seed) {
  if (n_train < 0 || n_val < 0 || n_test < 0 || n_train + n_val + n_test > ds.regions())
    fail_invalid("split_by_region: requested " + std::to_string(n_train + n_val + n_test) +
                 " regions, dataset has " + std::to_string(ds.regions()));
  std::vector<int> ids;
  if (ds.synthetic_spec()) {
    ids.resize(static_cast<size_t>(ds.regions()));
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  } else {
    for (int64_t i = 0; i < ds.size(); ++i) {
      const int r = ds.region_of(i);
      if (std::find(ids.begin(), ids.end(), r) == ids.end()) ids.push_back(r);
    }
  }
  Rng rng(Rng::derive(seed, {0x5B117ull}));
  rng.shuffle(ids);
  RegionSplit split;
  split.train.assign(ids.begin(), ids.begin() + n_train);
  split.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  split.test.assign(ids.begin() + n_train + n_val, ids.begin() + n_train + n_val + n_test);
  return split;
}

}  // namespace actgan
