#include "rrm/model_zoo.hpp"

#include <cmath>
#include <random>

namespace rrm {

namespace {

class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : gen_(seed) {}
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t pick(std::size_t n) {
    return static_cast<std::size_t>(unit() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 gen_;
};

std::vector<float> random_weights(DetRng& rng, std::size_t count,
                                  std::size_t fan_in) {
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  std::vector<float> w(count);
  for (auto& v : w) {
    v = static_cast<float>(rng.range(-bound, bound));
  }
  return w;
}

std::vector<float> random_bias(DetRng& rng, std::size_t count) {
  std::vector<float> b(count);
  for (auto& v : b) {
    v = static_cast<float>(rng.range(-0.05, 0.05));
  }
  return b;
}

ConvSpec make_conv(DetRng& rng, std::size_t in_channels,
                   std::size_t out_channels, std::size_t kernel,
                   std::size_t stride, std::size_t pad) {
  ConvSpec conv;
  conv.in_channels = in_channels;
  conv.out_channels = out_channels;
  conv.kernel_h = kernel;
  conv.kernel_w = kernel;
  conv.stride = stride;
  conv.pad = pad;
  conv.weights =
      random_weights(rng, conv.weight_count(), in_channels * kernel * kernel);
  conv.bias = random_bias(rng, out_channels);
  return conv;
}

FcSpec make_fc(DetRng& rng, std::size_t in_features, std::size_t out_features) {
  FcSpec fc;
  fc.in_features = in_features;
  fc.out_features = out_features;
  fc.weights = random_weights(rng, in_features * out_features, in_features);
  fc.bias = random_bias(rng, out_features);
  return fc;
}

}  // namespace

NetworkModel make_random_model(const Shape& input, std::size_t layer_count,
                               std::uint64_t seed) {
  if (layer_count == 0) {
    throw InvalidArgument("make_random_model: need at least one layer");
  }
  DetRng rng(seed);
  NetworkModel model;
  Shape current = input;
  bool fc_phase = false;
  bool have_linear = false;

  for (std::size_t i = 0; i < layer_count; ++i) {
    const std::size_t remaining = layer_count - i;
    // The last slots must guarantee a linear layer shows up.
    const bool must_be_linear = !have_linear && remaining == 1;

    if (fc_phase) {
      if (!must_be_linear && rng.unit() < 0.4) {
        model.layers.emplace_back(ReluSpec{});
      } else {
        const std::size_t out = 8 + 4 * rng.pick(4);
        model.layers.emplace_back(make_fc(rng, current.numel(), out));
        current = Shape{out, 1, 1};
        have_linear = true;
      }
      continue;
    }

    const bool can_pool = current.height >= 4 && current.width >= 4;
    const bool want_fc = !must_be_linear && remaining <= 2 && rng.unit() < 0.3;
    double r = must_be_linear ? 0.0 : rng.unit();
    if (want_fc) {
      fc_phase = true;
      const std::size_t out = 8 + 4 * rng.pick(4);
      model.layers.emplace_back(make_fc(rng, current.numel(), out));
      current = Shape{out, 1, 1};
      have_linear = true;
    } else if (r < 0.5) {
      const std::size_t out_channels = 4 + 2 * rng.pick(3);
      const std::size_t kernel = rng.unit() < 0.8 ? 3 : 5;
      model.layers.emplace_back(make_conv(rng, current.channels, out_channels,
                                          kernel, 1, kernel / 2));
      current = Shape{out_channels, current.height, current.width};
      have_linear = true;
    } else if (r < 0.8 || !can_pool) {
      model.layers.emplace_back(ReluSpec{});
    } else {
      model.layers.emplace_back(MaxPoolSpec{2, 2});
      current = Shape{current.channels, current.height / 2, current.width / 2};
    }
  }

  model.validate(input);
  return model;
}

NetworkModel make_sweep_model(const Shape& input, std::uint64_t seed) {
  DetRng rng(seed);
  NetworkModel model;
  model.layers.emplace_back(make_conv(rng, input.channels, 8, 3, 1, 1));
  model.layers.emplace_back(ReluSpec{});
  model.layers.emplace_back(MaxPoolSpec{2, 2});
  model.layers.emplace_back(make_conv(rng, 8, 12, 3, 1, 1));
  model.layers.emplace_back(ReluSpec{});
  model.validate(input);
  return model;
}

}  // namespace rrm
