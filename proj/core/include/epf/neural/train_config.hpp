#pragma once

#include <cstddef>
#include <cstdint>

#include "epf/neural/adam.hpp"

namespace epf::nn {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;
  // Early stopping on a chronological validation tail; 0 disables it.
  std::size_t patience = 10;
  double validation_fraction = 0.1;

  /// Throws ConfigError naming the offending field under `prefix`.
  void validate(const char* prefix = "train") const;
};

}  // namespace epf::nn
