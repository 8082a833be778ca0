#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "rrm/tensor.hpp"

namespace rrm {

// 2-D convolution, cross-correlation convention, zero padding.
// Weights are row-major (out_channel, in_channel, ky, kx).
struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  std::size_t weight_count() const {
    return out_channels * in_channels * kernel_h * kernel_w;
  }
  std::size_t weight_index(std::size_t o, std::size_t i, std::size_t ky,
                           std::size_t kx) const {
    return ((o * in_channels + i) * kernel_h + ky) * kernel_w + kx;
  }
  // Throws ShapeError when channels mismatch or the output would be empty.
  Shape output_shape(const Shape& input) const;
};

// Fully-connected layer; weights row-major (out_features, in_features).
// Accepts any input whose element count flattens to in_features.
struct FcSpec {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  Shape output_shape(const Shape& input) const;
};

struct ReluSpec {
  Shape output_shape(const Shape& input) const { return input; }
};

struct MaxPoolSpec {
  std::size_t kernel = 2;
  std::size_t stride = 2;

  Shape output_shape(const Shape& input) const;
};

using LayerSpec = std::variant<ConvSpec, FcSpec, ReluSpec, MaxPoolSpec>;

bool is_linear(const LayerSpec& layer);
const char* layer_kind_name(const LayerSpec& layer);
Shape layer_output_shape(const LayerSpec& layer, const Shape& input);

// Ordered layer stack. Conv/Fc are the linear layers; Relu/MaxPool make up
// the nonlinear mapping between them.
struct NetworkModel {
  std::vector<LayerSpec> layers;

  // Shape after each layer for the given input; throws ShapeError with the
  // offending layer index when the chain is inconsistent.
  std::vector<Shape> validate(const Shape& input) const;
  std::size_t linear_layer_count() const;
};

struct KernelResult {
  Tensor output;
  std::uint64_t multiplications = 0;
};

// Pre-activation projection F*I + b. The counter reports the full dense cost
// (output positions x in_channels x kernel taps), padding taps included, the
// number of MACs an im2col/GEMM evaluation performs.
KernelResult dense_conv(const ConvSpec& spec, const Tensor& input);

// F * delta with no bias term. Iterates over the stored non-zeros only,
// scattering each into the output positions its receptive fields cover;
// scatter writes are clipped at borders. The counter reports the multiplies
// actually performed: sum over entries of out_channels x (kernel taps that
// landed in bounds).
KernelResult sparse_conv(const ConvSpec& spec, const SparseDelta& delta);

// W*I + b on the flattened input; output shape (out_features, 1, 1).
KernelResult dense_fc(const FcSpec& spec, const Tensor& input);

// W * delta, bias excluded: sum of value x weight-column(index) over entries.
// Counter = entries x out_features.
KernelResult sparse_fc(const FcSpec& spec, const SparseDelta& delta);

Tensor relu(const Tensor& input);
Tensor max_pool(const MaxPoolSpec& spec, const Tensor& input);

// Dispatch for the nonlinear layer kinds; throws InvalidArgument on Conv/Fc.
Tensor apply_nonlinear(const LayerSpec& layer, const Tensor& input);

// Hook receiving (layer_index, input, projection) at every linear layer.
using LinearLayerObserver =
    std::function<void(std::size_t, const Tensor&, const Tensor&)>;

// Plain dense pipeline. The keyframe path of the engine runs through this
// same function, so keyframe results are bit-identical to a standalone run.
Tensor dense_forward(const NetworkModel& model, const Tensor& frame,
                     const LinearLayerObserver& observer = {});

}  // namespace rrm
