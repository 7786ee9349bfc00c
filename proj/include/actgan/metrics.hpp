#pragma once

#include "actgan/gridmap.hpp"

namespace actgan {

// Row-structured RMSE: mean over rows of the per-row RMSE,
// (1/N) * sum_i sqrt(sum_j (pred(i,j) - truth(i,j))^2 / M).
double rmse_paper(const GridMap& pred, const GridMap& truth);

// Pooled RMSE over all pixels.
double rmse_global(const GridMap& pred, const GridMap& truth);

struct NmseValue {
  double value = 0.0;
  bool constant_truth = false;  // denominator degenerate; exclude from aggregates
};

// Squared error normalized by the truth's total squared deviation from its
// mean (so a constant mean predictor scores exactly 1).
NmseValue nmse(const GridMap& pred, const GridMap& truth);

}  // namespace actgan
