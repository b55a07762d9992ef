#pragma once

#include <cstddef>
#include <span>

namespace treebary {

// Adjusted Rand index between two labelings of the same items. Returns 1
// when both labelings put everything in a single cluster.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace treebary
