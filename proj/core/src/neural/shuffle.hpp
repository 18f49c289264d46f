#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "epf/rng.hpp"

namespace epf::nn::detail {

// Mini-batch order draws from its own stream so that changing the
// initialisation never perturbs the sample order.
inline std::uint64_t shuffle_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

// Fisher-Yates with the portable generator.
inline void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace epf::nn::detail
