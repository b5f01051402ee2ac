#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nocollide/density.hpp"

namespace nocollide {

// Reads the big-endian IDX image/label pair (magics 0x803 / 0x801) and
// returns normalized densities on the native integer frame (origin (0,0),
// spacing 1), keeping only the requested labels, at most `limit` in total.
// Parse failures throw with the offending file named.
std::vector<std::pair<GridDensity, int>> load_mnist_idx(const std::string& images_path,
                                                        const std::string& labels_path,
                                                        const std::set<int>& digit_filter,
                                                        std::size_t limit);

}  // namespace nocollide
