#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rrm/layers.hpp"

namespace rrm {

enum class LinearKind { Conv, Fc };

// One linear layer's share of the multiplication workload. density is the
// non-zero fraction the zero-skipping cost model charges for; zero_fraction
// is the zero share of the corresponding dense input. The two refer to
// different tensors in an RRM run (delta vs input), so they need not sum to 1.
struct LayerWorkload {
  std::size_t layer_index = 0;
  LinearKind kind = LinearKind::Conv;
  std::uint64_t dense_mults = 0;
  double density = 1.0;
  double zero_fraction = 0.0;
};

// Zero-skipping cost of one layer: density x dense multiplication count.
double layer_cost(const LayerWorkload& w);

// Sum of per-layer zero-skipping costs over conv and fc layers.
double network_cost(std::span<const LayerWorkload> layers);

// Workload-weighted zero fraction across all linear-layer inputs.
double overall_sparsity(std::span<const LayerWorkload> layers);

struct SpeedupRatio {
  double value = 1.0;
  // Set when the accelerated side has zero cost (all-zero deltas).
  bool infinite = false;
};

// Baseline cost over accelerated cost, both under the zero-skipping model:
// the numerator uses the original activations' densities, the denominator
// the truncated-delta densities. Lists must describe the same layers.
SpeedupRatio speedup_ratio(std::span<const LayerWorkload> dense,
                           std::span<const LayerWorkload> rrm);

// Static per-layer multiplication counts for a model at a given input shape.
struct LinearLayerInfo {
  std::size_t layer_index = 0;
  LinearKind kind = LinearKind::Conv;
  std::uint64_t dense_mults = 0;
};

// Dense conv cost evaluated on the output spatial dims (stride and padding
// respected): H_out * W_out * C_in * C_out * kernel_h * kernel_w.
std::uint64_t conv_dense_mults(const ConvSpec& spec, const Shape& input);
std::uint64_t fc_dense_mults(const FcSpec& spec);

std::vector<LinearLayerInfo> linear_layer_table(const NetworkModel& model,
                                                const Shape& input);

}  // namespace rrm
