#pragma once

#include <cstdint>

#include "rrm/layers.hpp"

namespace rrm {

// Random conv/relu/pool stack with an optional fc tail, weights scaled by
// fan-in; always contains at least one linear layer and validates against
// the given input shape. Deterministic in (input, layer_count, seed).
NetworkModel make_random_model(const Shape& input, std::size_t layer_count,
                               std::uint64_t seed);

// Fixed five-layer stack (conv relu max_pool conv relu) used by the
// threshold-sweep experiments; weights are seeded.
NetworkModel make_sweep_model(const Shape& input, std::uint64_t seed);

}  // namespace rrm
