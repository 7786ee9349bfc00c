#include "actgan/scenario.hpp"

#include "actgan/util.hpp"

namespace actgan {

ModelSample build_scenario_inputs(const DatasetItem& item, const ScenarioOptions& opts) {
  if (opts.scenario != Scenario::s3 && (item.tx.first < 0 || item.tx.second < 0))
    fail_invalid("scenario " + std::to_string(static_cast<int>(opts.scenario)) +
                 " requires a transmitter position");
  ModelSample s;
  s.target = apply_threshold(item.gain, opts.threshold);
  s.target.kind = MapKind::pathloss;

  GridMap tx_map(item.buildings.height, item.buildings.width, MapKind::tx_onehot);
  if (item.tx.first >= 0) tx_map.at(item.tx.first, item.tx.second) = 1.0f;

  if (opts.scenario == Scenario::s1) {
    s.channels = {item.buildings, tx_map};
    s.samples = GridMap(item.buildings.height, item.buildings.width, MapKind::samples);
    return s;
  }

  const uint64_t mask_seed = Rng::derive(
      opts.seed, {static_cast<uint64_t>(item.region_id), static_cast<uint64_t>(item.tx_index),
                  static_cast<uint64_t>(opts.setting)});
  if (opts.scenario == Scenario::s3) {
    s.mask = make_block_mask(opts.omega, item.buildings, mask_seed);
  } else {
    s.mask = make_mask(opts.setting, item.buildings, mask_seed, opts.rate);
  }

  // Observations are taken from the same (thresholded) field the label shows.
  s.samples = masked_samples(s.target, s.mask);
  if (opts.noise_sigma > 0.0) {
    const uint64_t noise_seed =
        Rng::derive(opts.seed, {static_cast<uint64_t>(item.region_id),
                                static_cast<uint64_t>(item.tx_index), 0x4015Eull});
    s.samples = add_gaussian_noise(s.samples, s.mask, opts.noise_sigma, noise_seed);
  }

  if (opts.scenario == Scenario::s2) {
    s.channels = {item.buildings, tx_map, s.samples};
  } else {
    GridMap mask_map(item.buildings.height, item.buildings.width, MapKind::other);
    for (const auto& [r, c] : s.mask.points) mask_map.at(r, c) = 1.0f;
    s.channels = {item.buildings, s.samples, mask_map};
  }
  return s;
}

Tensor<float> to_tensor(const GridMap& map) {
  return Tensor<float>({1, 1, map.height, map.width}, map.values);
}

GridMap to_gridmap(const Tensor<float>& t, int batch_index) {
  if (t.ndim() != 4 || t.dim(1) != 1) fail_invalid("to_gridmap: expected a [B,1,H,W] tensor");
  if (batch_index < 0 || batch_index >= t.dim(0)) fail_invalid("to_gridmap: batch index");
  GridMap m(t.dim(2), t.dim(3));
  const int64_t hw = m.pixels();
  const auto& d = t.data();
  std::copy(d.begin() + batch_index * hw, d.begin() + (batch_index + 1) * hw, m.values.begin());
  return m;
}

Tensor<float> stack_inputs(const std::vector<ModelSample>& batch) {
  if (batch.empty()) fail_invalid("stack_inputs: empty batch");
  const int cin = static_cast<int>(batch[0].channels.size());
  const int h = batch[0].channels[0].height, w = batch[0].channels[0].width;
  auto t = Tensor<float>::zeros({static_cast<int>(batch.size()), cin, h, w});
  auto& d = t.mutable_data();
  const int64_t hw = static_cast<int64_t>(h) * w;
  for (size_t b = 0; b < batch.size(); ++b) {
    if (static_cast<int>(batch[b].channels.size()) != cin)
      fail_invalid("stack_inputs: inconsistent channel counts in batch");
    for (int c = 0; c < cin; ++c) {
      const auto& m = batch[b].channels[static_cast<size_t>(c)];
      if (m.height != h || m.width != w) fail_invalid("stack_inputs: inconsistent map sizes");
      std::copy(m.values.begin(), m.values.end(),
                d.begin() + (static_cast<int64_t>(b) * cin + c) * hw);
    }
  }
  return t;
}

Tensor<float> stack_targets(const std::vector<ModelSample>& batch) {
  if (batch.empty()) fail_invalid("stack_targets: empty batch");
  const int h = batch[0].target.height, w = batch[0].target.width;
  auto t = Tensor<float>::zeros({static_cast<int>(batch.size()), 1, h, w});
  auto& d = t.mutable_data();
  const int64_t hw = static_cast<int64_t>(h) * w;
  for (size_t b = 0; b < batch.size(); ++b)
    std::copy(batch[b].target.values.begin(), batch[b].target.values.end(),
              d.begin() + static_cast<int64_t>(b) * hw);
  return t;
}

}  // namespace actgan
