#pragma once

#include <utility>
#include <vector>

#include "actgan/gridmap.hpp"

namespace actgan {

// Transmitter estimate: slide a 5x5 window over the map, take the window with
// the largest sum, and return the brightest pixel inside it. The window-sum
// condition rejects isolated hot pixels that are not plausible sources. Ties
// resolve to the smallest (row, col).
std::pair<int, int> locate_source(const GridMap& pred);

// Mean Euclidean distance between estimated and true source pixels, in
// meters (1 pixel = 1 meter).
double localization_error(const std::vector<std::pair<int, int>>& estimated,
                          const std::vector<std::pair<int, int>>& truth);

}  // namespace actgan
