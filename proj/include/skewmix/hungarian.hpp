#pragma once

#include "skewmix/linalg.hpp"

#include <vector>

namespace skewmix {

// Minimum-cost perfect matching on a square cost matrix. Returns col_of_row:
// row r is matched to column col_of_row[r]. O(n^3).
std::vector<int> hungarian(const Mat& cost);

}  // namespace skewmix
