#include "rrm/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace rrm {

Shape ConvSpec::output_shape(const Shape& input) const {
  if (input.channels != in_channels) {
    throw ShapeError("conv: input has " + std::to_string(input.channels) +
                     " channels, layer expects " + std::to_string(in_channels));
  }
  if (stride == 0) throw ShapeError("conv: stride must be >= 1");
  const std::size_t padded_h = input.height + 2 * pad;
  const std::size_t padded_w = input.width + 2 * pad;
  if (padded_h < kernel_h || padded_w < kernel_w) {
    throw ShapeError("conv: kernel " + std::to_string(kernel_h) + "x" +
                     std::to_string(kernel_w) + " does not fit input " +
                     input.str() + " with pad " + std::to_string(pad));
  }
  return Shape{out_channels, (padded_h - kernel_h) / stride + 1,
               (padded_w - kernel_w) / stride + 1};
}

Shape FcSpec::output_shape(const Shape& input) const {
  if (input.numel() != in_features) {
    throw ShapeError("fc: input " + input.str() + " flattens to " +
                     std::to_string(input.numel()) + " elements, layer expects " +
                     std::to_string(in_features));
  }
  return Shape{out_features, 1, 1};
}

Shape MaxPoolSpec::output_shape(const Shape& input) const {
  if (stride == 0) throw ShapeError("max_pool: stride must be >= 1");
  if (input.height < kernel || input.width < kernel) {
    throw ShapeError("max_pool: kernel " + std::to_string(kernel) +
                     " too large for input " + input.str());
  }
  return Shape{input.channels, (input.height - kernel) / stride + 1,
               (input.width - kernel) / stride + 1};
}

bool is_linear(const LayerSpec& layer) {
  return std::holds_alternative<ConvSpec>(layer) ||
         std::holds_alternative<FcSpec>(layer);
}

const char* layer_kind_name(const LayerSpec& layer) {
  if (std::holds_alternative<ConvSpec>(layer)) return "conv";
  if (std::holds_alternative<FcSpec>(layer)) return "fc";
  if (std::holds_alternative<ReluSpec>(layer)) return "relu";
  return "max_pool";
}

Shape layer_output_shape(const LayerSpec& layer, const Shape& input) {
  return std::visit([&](const auto& spec) { return spec.output_shape(input); },
                    layer);
}

std::vector<Shape> NetworkModel::validate(const Shape& input) const {
  if (layers.empty()) {
    throw InvalidArgument("model has no layers");
  }
  std::vector<Shape> shapes;
  shapes.reserve(layers.size());
  Shape current = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    try {
      current = layer_output_shape(layers[i], current);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + ": " + e.what());
    }
    shapes.push_back(current);
  }
  return shapes;
}

std::size_t NetworkModel::linear_layer_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    if (is_linear(layer)) ++n;
  }
  return n;
}

KernelResult dense_conv(const ConvSpec& spec, const Tensor& input) {
  const Shape out_shape = spec.output_shape(input.shape);
  if (spec.weights.size() != spec.weight_count() ||
      spec.bias.size() != spec.out_channels) {
    throw ShapeError("conv: weight/bias arrays do not match spec");
  }
  Tensor out(out_shape);
  const long in_h = static_cast<long>(input.shape.height);
  const long in_w = static_cast<long>(input.shape.width);
  for (std::size_t co = 0; co < spec.out_channels; ++co) {
    for (std::size_t oy = 0; oy < out_shape.height; ++oy) {
      for (std::size_t ox = 0; ox < out_shape.width; ++ox) {
        double acc = spec.bias[co];
        for (std::size_t ci = 0; ci < spec.in_channels; ++ci) {
          for (std::size_t ky = 0; ky < spec.kernel_h; ++ky) {
            const long iy = static_cast<long>(oy * spec.stride + ky) -
                            static_cast<long>(spec.pad);
            if (iy < 0 || iy >= in_h) continue;
            for (std::size_t kx = 0; kx < spec.kernel_w; ++kx) {
              const long ix = static_cast<long>(ox * spec.stride + kx) -
                              static_cast<long>(spec.pad);
              if (ix < 0 || ix >= in_w) continue;
              acc += static_cast<double>(
                         spec.weights[spec.weight_index(co, ci, ky, kx)]) *
                     static_cast<double>(
                         input.at(ci, static_cast<std::size_t>(iy),
                                  static_cast<std::size_t>(ix)));
            }
          }
        }
        out.at(co, oy, ox) = static_cast<float>(acc);
      }
    }
  }
  const std::uint64_t mults =
      static_cast<std::uint64_t>(out_shape.height) * out_shape.width *
      spec.in_channels * spec.out_channels * spec.kernel_h * spec.kernel_w;
  return {std::move(out), mults};
}

KernelResult sparse_conv(const ConvSpec& spec, const SparseDelta& delta) {
  const Shape out_shape = spec.output_shape(delta.shape);
  if (spec.weights.size() != spec.weight_count() ||
      spec.bias.size() != spec.out_channels) {
    throw ShapeError("conv: weight/bias arrays do not match spec");
  }
  // Scatter-accumulate in double, round to float32 once at the end.
  std::vector<double> acc(out_shape.numel(), 0.0);
  std::uint64_t mults = 0;
  const std::size_t spatial = delta.shape.height * delta.shape.width;
  // (output position, kernel tap) pairs covering the current entry, per axis.
  std::vector<std::pair<std::size_t, std::size_t>> rows, cols;
  rows.reserve(spec.kernel_h);
  cols.reserve(spec.kernel_w);
  for (const auto& e : delta.entries) {
    const std::size_t ci = e.index / spatial;
    const std::size_t y = (e.index % spatial) / delta.shape.width;
    const std::size_t x = e.index % delta.shape.width;
    rows.clear();
    cols.clear();
    for (std::size_t ky = 0; ky < spec.kernel_h; ++ky) {
      const long num = static_cast<long>(y + spec.pad) - static_cast<long>(ky);
      if (num < 0 || num % static_cast<long>(spec.stride) != 0) continue;
      const std::size_t oy = static_cast<std::size_t>(num) / spec.stride;
      if (oy < out_shape.height) rows.emplace_back(oy, ky);
    }
    for (std::size_t kx = 0; kx < spec.kernel_w; ++kx) {
      const long num = static_cast<long>(x + spec.pad) - static_cast<long>(kx);
      if (num < 0 || num % static_cast<long>(spec.stride) != 0) continue;
      const std::size_t ox = static_cast<std::size_t>(num) / spec.stride;
      if (ox < out_shape.width) cols.emplace_back(ox, kx);
    }
    const double v = e.value;
    for (std::size_t co = 0; co < spec.out_channels; ++co) {
      for (const auto& [oy, ky] : rows) {
        const std::size_t base = (co * out_shape.height + oy) * out_shape.width;
        for (const auto& [ox, kx] : cols) {
          acc[base + ox] +=
              v * static_cast<double>(
                      spec.weights[spec.weight_index(co, ci, ky, kx)]);
        }
      }
    }
    mults += static_cast<std::uint64_t>(rows.size()) * cols.size() *
             spec.out_channels;
  }
  Tensor out(out_shape);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out.data[i] = static_cast<float>(acc[i]);
  }
  return {std::move(out), mults};
}

KernelResult dense_fc(const FcSpec& spec, const Tensor& input) {
  const Shape out_shape = spec.output_shape(input.shape);
  if (spec.weights.size() != spec.in_features * spec.out_features ||
      spec.bias.size() != spec.out_features) {
    throw ShapeError("fc: weight/bias arrays do not match spec");
  }
  Tensor out(out_shape);
  for (std::size_t o = 0; o < spec.out_features; ++o) {
    double acc = spec.bias[o];
    const float* row = spec.weights.data() + o * spec.in_features;
    for (std::size_t i = 0; i < spec.in_features; ++i) {
      acc += static_cast<double>(row[i]) * static_cast<double>(input.data[i]);
    }
    out.data[o] = static_cast<float>(acc);
  }
  return {std::move(out),
          static_cast<std::uint64_t>(spec.in_features) * spec.out_features};
}

KernelResult sparse_fc(const FcSpec& spec, const SparseDelta& delta) {
  if (delta.shape.numel() != spec.in_features) {
    throw ShapeError("fc: delta " + delta.shape.str() + " flattens to " +
                     std::to_string(delta.shape.numel()) +
                     " elements, layer expects " +
                     std::to_string(spec.in_features));
  }
  if (spec.weights.size() != spec.in_features * spec.out_features ||
      spec.bias.size() != spec.out_features) {
    throw ShapeError("fc: weight/bias arrays do not match spec");
  }
  std::vector<double> acc(spec.out_features, 0.0);
  for (const auto& e : delta.entries) {
    const double v = e.value;
    for (std::size_t o = 0; o < spec.out_features; ++o) {
      acc[o] += v * static_cast<double>(spec.weights[o * spec.in_features + e.index]);
    }
  }
  Tensor out(Shape{spec.out_features, 1, 1});
  for (std::size_t o = 0; o < spec.out_features; ++o) {
    out.data[o] = static_cast<float>(acc[o]);
  }
  return {std::move(out),
          static_cast<std::uint64_t>(delta.entries.size()) * spec.out_features};
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape);
  for (std::size_t i = 0; i < input.data.size(); ++i) {
    out.data[i] = input.data[i] > 0.0f ? input.data[i] : 0.0f;
  }
  return out;
}

Tensor max_pool(const MaxPoolSpec& spec, const Tensor& input) {
  const Shape out_shape = spec.output_shape(input.shape);
  Tensor out(out_shape);
  for (std::size_t c = 0; c < out_shape.channels; ++c) {
    for (std::size_t oy = 0; oy < out_shape.height; ++oy) {
      for (std::size_t ox = 0; ox < out_shape.width; ++ox) {
        float m = input.at(c, oy * spec.stride, ox * spec.stride);
        for (std::size_t ky = 0; ky < spec.kernel; ++ky) {
          for (std::size_t kx = 0; kx < spec.kernel; ++kx) {
            m = std::max(m, input.at(c, oy * spec.stride + ky,
                                     ox * spec.stride + kx));
          }
        }
        out.at(c, oy, ox) = m;
      }
    }
  }
  return out;
}

Tensor apply_nonlinear(const LayerSpec& layer, const Tensor& input) {
  if (std::holds_alternative<ReluSpec>(layer)) {
    return relu(input);
  }
  if (const auto* pool = std::get_if<MaxPoolSpec>(&layer)) {
    return max_pool(*pool, input);
  }
  throw InvalidArgument("apply_nonlinear called on a linear layer");
}

Tensor dense_forward(const NetworkModel& model, const Tensor& frame,
                     const LinearLayerObserver& observer) {
  if (model.layers.empty()) {
    throw InvalidArgument("model has no layers");
  }
  Tensor current = frame;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerSpec& layer = model.layers[i];
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      Tensor projection = dense_conv(*conv, current).output;
      if (observer) observer(i, current, projection);
      current = std::move(projection);
    } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
      Tensor projection = dense_fc(*fc, current).output;
      if (observer) observer(i, current, projection);
      current = std::move(projection);
    } else {
      current = apply_nonlinear(layer, current);
    }
  }
  return current;
}

}  // namespace rrm
