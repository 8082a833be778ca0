#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rrm/errors.hpp"

namespace rrm {

struct Shape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t numel() const { return channels * height * width; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// Dense (channels, height, width) float32 container, row-major with x fastest.
// FC vectors use height == width == 1. Treat as an immutable value once an
// operation has produced it; safe to share across threads.
struct Tensor {
  Shape shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(const Shape& s) : shape(s), data(s.numel(), 0.0f) {}
  Tensor(const Shape& s, std::vector<float> values);

  std::size_t numel() const { return shape.numel(); }
  std::size_t index(std::size_t c, std::size_t y, std::size_t x) const {
    return (c * shape.height + y) * shape.width + x;
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[index(c, y, x)];
  }
  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[index(c, y, x)];
  }
};

struct SparseEntry {
  std::size_t index = 0;
  float value = 0.0f;
  bool operator==(const SparseEntry&) const = default;
};

// Non-zero elements of a truncated difference tensor, strictly increasing by
// linear index. Same immutability convention as Tensor.
struct SparseDelta {
  Shape shape;
  std::vector<SparseEntry> entries;

  double density() const;
};

struct SparsifyResult {
  SparseDelta delta;
  // l2 norm of the values zeroed by the threshold (exact zeros excluded).
  double truncated_l2 = 0.0;
};

Tensor subtract(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);

// Keeps elements with |v| > epsilon, so epsilon = 0 keeps every exact non-zero.
SparsifyResult sparsify(const Tensor& d, float epsilon);

Tensor densify(const SparseDelta& s);

double zero_fraction(const Tensor& t);
bool all_finite(const Tensor& t);
double l2_distance(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace rrm
