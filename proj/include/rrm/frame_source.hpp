#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rrm/tensor.hpp"

namespace rrm {

// Raw frame file: C, H, W as little-endian u32, then a float32 blob of
// C*H*W values in tensor order. A directory of such files, taken in
// lexicographic filename order, forms a video; all frames must share a shape.
Tensor load_frame(const std::filesystem::path& path);
void save_frame(const std::filesystem::path& path, const Tensor& frame);
std::vector<Tensor> load_frame_directory(const std::filesystem::path& dir);

struct SyntheticSpec {
  enum class Kind { ShiftingSquare, RandomWalk, Static };

  Kind kind = Kind::ShiftingSquare;
  Shape shape{3, 32, 32};
  std::size_t frames = 50;
  double motion = 1.0;  // square pixels per frame, or walk step amplitude
  double noise = 0.0;   // amplitude of the drifting texture overlay
  std::uint64_t seed = 0;
};

// Deterministic for a given spec: same spec, same frames, bit for bit.
std::vector<Tensor> generate_video(const SyntheticSpec& spec);

// Parses "kind=shifting-square,c=3,h=32,w=32,frames=50,motion=1,noise=0,seed=0"
// (any subset of keys; kind is required).
SyntheticSpec parse_synthetic_spec(const std::string& text);
std::string synthetic_spec_string(const SyntheticSpec& spec);

}  // namespace rrm
