#include "rrm/metrics.hpp"

#include <string>

namespace rrm {

double layer_cost(const LayerWorkload& w) {
  return w.density * static_cast<double>(w.dense_mults);
}

double network_cost(std::span<const LayerWorkload> layers) {
  double total = 0.0;
  for (const auto& w : layers) {
    total += layer_cost(w);
  }
  return total;
}

double overall_sparsity(std::span<const LayerWorkload> layers) {
  if (layers.empty()) {
    throw InvalidArgument("overall_sparsity: empty workload list");
  }
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& w : layers) {
    weighted += w.zero_fraction * static_cast<double>(w.dense_mults);
    total += static_cast<double>(w.dense_mults);
  }
  return weighted / total;
}

SpeedupRatio speedup_ratio(std::span<const LayerWorkload> dense,
                           std::span<const LayerWorkload> rrm) {
  if (dense.size() != rrm.size()) {
    throw InvalidArgument("speedup_ratio: workload lists differ in length (" +
                          std::to_string(dense.size()) + " vs " +
                          std::to_string(rrm.size()) + ")");
  }
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i].layer_index != rrm[i].layer_index ||
        dense[i].kind != rrm[i].kind ||
        dense[i].dense_mults != rrm[i].dense_mults) {
      throw InvalidArgument("speedup_ratio: layer structure mismatch at row " +
                            std::to_string(i));
    }
  }
  const double baseline = network_cost(dense);
  const double accelerated = network_cost(rrm);
  if (accelerated == 0.0) {
    if (baseline == 0.0) return {1.0, false};
    return {0.0, true};
  }
  return {baseline / accelerated, false};
}

std::uint64_t conv_dense_mults(const ConvSpec& spec, const Shape& input) {
  const Shape out = spec.output_shape(input);
  return static_cast<std::uint64_t>(out.height) * out.width *
         spec.in_channels * spec.out_channels * spec.kernel_h * spec.kernel_w;
}

std::uint64_t fc_dense_mults(const FcSpec& spec) {
  return static_cast<std::uint64_t>(spec.in_features) * spec.out_features;
}

std::vector<LinearLayerInfo> linear_layer_table(const NetworkModel& model,
                                                const Shape& input) {
  std::vector<LinearLayerInfo> table;
  Shape current = input;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerSpec& layer = model.layers[i];
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      table.push_back({i, LinearKind::Conv, conv_dense_mults(*conv, current)});
    } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
      table.push_back({i, LinearKind::Fc, fc_dense_mults(*fc)});
    }
    current = layer_output_shape(layer, current);
  }
  return table;
}

}  // namespace rrm
