#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actgan/gridmap.hpp"
#include "actgan/rng.hpp"
#include "actgan/simulate.hpp"

namespace actgan {

// Synthetic city layout: axis-aligned rectangular blocks up to a coverage cap.
GridMap make_buildings(int size, double coverage, uint64_t seed);

// Uniform transmitter position over non-building pixels.
std::pair<int, int> pick_tx(const GridMap& buildings, Rng& rng);

struct SyntheticSpec {
  int regions = 700;
  int tx_per_region = 80;
  int size = 256;
  double building_coverage = 0.15;
  SimParams sim;
  uint64_t seed = 1;
};

struct DatasetItem {
  int region_id = 0;
  int tx_index = 0;
  GridMap buildings;
  GridMap gain;  // unthresholded path-loss map
  std::pair<int, int> tx{-1, -1};
};

// Region-structured dataset, either simulated on the fly (deterministic per
// index) or backed by a manifest of map files.
class Dataset {
 public:
  static Dataset synthetic(const SyntheticSpec& spec);
  static Dataset ingest(const std::string& manifest_path_or_dir);

  int64_t size() const;
  int regions() const { return regions_; }
  int region_of(int64_t idx) const;
  DatasetItem get(int64_t idx) const;

  // Item indices whose region id belongs to `region_ids`.
  std::vector<int64_t> items_in_regions(const std::vector<int>& region_ids) const;

  const SyntheticSpec* synthetic_spec() const { return synthetic_ ? &spec_ : nullptr; }

 private:
  bool synthetic_ = true;
  SyntheticSpec spec_;
  std::vector<ManifestEntry> entries_;
  std::vector<int> region_ids_;  // distinct, in first-seen order (ingest)
  int regions_ = 0;
};

struct RegionSplit {
  std::vector<int> train, val, test;
};

// Disjoint region-level split (train/val/test counts over region ids 0..R-1
// for synthetic data, or over the distinct ingested region ids).
RegionSplit split_by_region(const Dataset& ds, int n_train, int n_val, int n_test, uint64_t seed);

}  // namespace actgan
