#include "actgan/metrics.hpp"

#include <cmath>

#include "actgan/util.hpp"

namespace actgan {

namespace {

void check_dims(const GridMap& a, const GridMap& b, const char* op) {
  if (a.width != b.width || a.height != b.height)
    fail_invalid(std::string(op) + ": map dimensions differ (" + std::to_string(a.height) + "x" +
                 std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                 std::to_string(b.width) + ")");
  if (a.pixels() == 0) fail_invalid(std::string(op) + ": empty maps");
}

}  // namespace

double rmse_paper(const GridMap& pred, const GridMap& truth) {
  check_dims(pred, truth, "rmse_paper");
  double acc = 0.0;
  for (int r = 0; r < pred.height; ++r) {
    double row = 0.0;
    for (int c = 0; c < pred.width; ++c) {
      const double d = static_cast<double>(pred.at(r, c)) - static_cast<double>(truth.at(r, c));
      row += d * d;
    }
    acc += std::sqrt(row / pred.width);
  }
  return acc / pred.height;
}

double rmse_global(const GridMap& pred, const GridMap& truth) {
  check_dims(pred, truth, "rmse_global");
  double acc = 0.0;
  for (size_t i = 0; i < pred.values.size(); ++i) {
    const double d = static_cast<double>(pred.values[i]) - static_cast<double>(truth.values[i]);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.values.size()));
}

NmseValue nmse(const GridMap& pred, const GridMap& truth) {
  check_dims(pred, truth, "nmse");
  double mean = 0.0;
  for (float v : truth.values) mean += v;
  mean /= static_cast<double>(truth.values.size());
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < pred.values.size(); ++i) {
    const double d = static_cast<double>(pred.values[i]) - static_cast<double>(truth.values[i]);
    num += d * d;
    const double t = static_cast<double>(truth.values[i]) - mean;
    den += t * t;
  }
  NmseValue out;
  if (den <= 0.0) {
    out.constant_truth = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = num / den;
  return out;
}

}  // namespace actgan
