#include "rrm/tensor.hpp"

#include <cmath>
#include <utility>

namespace rrm {

std::string Shape::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" +
         std::to_string(width);
}

Tensor::Tensor(const Shape& s, std::vector<float> values)
    : shape(s), data(std::move(values)) {
  if (data.size() != shape.numel()) {
    throw InvalidArgument("tensor data length " + std::to_string(data.size()) +
                          " does not match shape " + shape.str());
  }
}

double SparseDelta::density() const {
  const std::size_t n = shape.numel();
  return n == 0 ? 0.0 : static_cast<double>(entries.size()) / static_cast<double>(n);
}

static void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!(a.shape == b.shape)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape.str() +
                     " vs " + b.shape.str());
  }
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "subtract");
  Tensor out(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    out.data[i] = a.data[i] - b.data[i];
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    out.data[i] = a.data[i] + b.data[i];
  }
  return out;
}

SparsifyResult sparsify(const Tensor& d, float epsilon) {
  if (!(epsilon >= 0.0f)) {
    throw InvalidArgument("sparsify: epsilon must be >= 0");
  }
  SparsifyResult result;
  result.delta.shape = d.shape;
  double truncated_sq = 0.0;
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const float v = d.data[i];
    if (std::abs(v) > epsilon) {
      result.delta.entries.push_back({i, v});
    } else if (v != 0.0f) {
      truncated_sq += static_cast<double>(v) * static_cast<double>(v);
    }
  }
  result.truncated_l2 = std::sqrt(truncated_sq);
  return result;
}

Tensor densify(const SparseDelta& s) {
  Tensor out(s.shape);
  for (const auto& e : s.entries) {
    out.data[e.index] = e.value;
  }
  return out;
}

double zero_fraction(const Tensor& t) {
  if (t.numel() == 0) return 0.0;
  std::size_t zeros = 0;
  for (float v : t.data) {
    if (v == 0.0f) ++zeros;
  }
  return static_cast<double>(zeros) / static_cast<double>(t.numel());
}

bool all_finite(const Tensor& t) {
  for (float v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double l2_distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l2_distance");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    sq += d * d;
  }
  return std::sqrt(sq);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = std::abs(static_cast<double>(a.data[i]) -
                              static_cast<double>(b.data[i]));
    if (d > m) m = d;
  }
  return m;
}

}  // namespace rrm
