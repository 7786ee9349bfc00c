#include "actgan/localize.hpp"

#include <cmath>

#include "actgan/util.hpp"

namespace actgan {

std::pair<int, int> locate_source(const GridMap& pred) {
  if (pred.pixels() == 0) fail_invalid("locate_source: empty map");
  const int win_h = std::min(5, pred.height);
  const int win_w = std::min(5, pred.width);
  double best_sum = -1.0;
  int best_r = 0, best_c = 0;
  for (int r = 0; r + win_h <= pred.height; ++r) {
    for (int c = 0; c + win_w <= pred.width; ++c) {
      double s = 0.0;
      for (int dr = 0; dr < win_h; ++dr)
        for (int dc = 0; dc < win_w; ++dc) s += pred.at(r + dr, c + dc);
      if (s > best_sum) {
        best_sum = s;
        best_r = r;
        best_c = c;
      }
    }
  }
  float best_v = pred.at(best_r, best_c);
  std::pair<int, int> best{best_r, best_c};
  for (int dr = 0; dr < win_h; ++dr)
    for (int dc = 0; dc < win_w; ++dc) {
      const float v = pred.at(best_r + dr, best_c + dc);
      if (v > best_v) {
        best_v = v;
        best = {best_r + dr, best_c + dc};
      }
    }
  return best;
}

double localization_error(const std::vector<std::pair<int, int>>& estimated,
                          const std::vector<std::pair<int, int>>& truth) {
  if (estimated.size() != truth.size())
    fail_invalid("localization_error: " + std::to_string(estimated.size()) + " estimates vs " +
                 std::to_string(truth.size()) + " references");
  if (estimated.empty()) fail_invalid("localization_error: empty inputs");
  double acc = 0.0;
  for (size_t i = 0; i < estimated.size(); ++i) {
    const double dr = estimated[i].first - truth[i].first;
    const double dc = estimated[i].second - truth[i].second;
    acc += std::sqrt(dr * dr + dc * dc);
  }
  return acc / static_cast<double>(estimated.size());
}

}  // namespace actgan
