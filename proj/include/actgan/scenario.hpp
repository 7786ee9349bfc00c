#pragma once

#include <vector>

#include "actgan/dataset.hpp"
#include "actgan/sampling.hpp"
#include "actgan/tensor.hpp"

namespace actgan {

// 1: buildings + transmitter known; 2: plus sparse observations;
// 3: transmitter unknown, block-sampled observations only.
enum class Scenario { s1 = 1, s2 = 2, s3 = 3 };

inline int scenario_input_channels(Scenario s) { return s == Scenario::s1 ? 2 : 3; }

struct ScenarioOptions {
  Scenario scenario = Scenario::s1;
  double threshold = 0.0;  // normalized truncation threshold for the target
  SampleSetting setting = SampleSetting::fixed_rate;
  double rate = 0.10;      // for fixed_rate
  int omega = 100;         // for block sampling (scenario 3)
  double noise_sigma = 0.0;  // measurement noise on the 0-255 gray scale
  uint64_t seed = 1;
};

// One model-ready example: stacked input channels, thresholded target, and
// the observation mask actually used (empty for scenario 1).
struct ModelSample {
  std::vector<GridMap> channels;
  GridMap target;
  SampleMask mask;
  GridMap samples;  // noisy observed values (zero map for scenario 1)
};

// Channel stacks: s1 = [buildings, tx one-hot]; s2 = [buildings, tx one-hot,
// samples]; s3 = [buildings, samples, mask] with no transmitter information.
ModelSample build_scenario_inputs(const DatasetItem& item, const ScenarioOptions& opts);

Tensor<float> stack_inputs(const std::vector<ModelSample>& batch);
Tensor<float> stack_targets(const std::vector<ModelSample>& batch);
Tensor<float> to_tensor(const GridMap& map);
GridMap to_gridmap(const Tensor<float>& t, int batch_index = 0);

}  // namespace actgan
