#pragma once

#include <filesystem>
#include <vector>

#include "rrm/layers.hpp"

namespace rrm {

// Model file layout (all multi-byte values little-endian):
//
//   magic        4 bytes  "RRMM"
//   version      u32      currently 1
//   layer_count  u32
//   per layer:
//     kind       u32      0 conv, 1 fc, 2 relu, 3 max_pool
//     conv:      in_channels, out_channels, kernel_h, kernel_w, stride, pad
//                (6 x u32), then float32 weights in (out, in, ky, kx) order,
//                then float32 bias[out_channels]
//     fc:        in_features, out_features (2 x u32), then float32 weights in
//                (out, in) order, then float32 bias[out_features]
//     relu:      no payload
//     max_pool:  kernel, stride (2 x u32)
//
// The file must end exactly after the last layer; trailing bytes are
// rejected with the offending offset.

inline constexpr std::uint32_t kModelFileVersion = 1;

NetworkModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const NetworkModel& model);

// In-memory codec, used by the file functions and handy in tests.
std::vector<std::uint8_t> encode_model(const NetworkModel& model);
NetworkModel decode_model(const std::vector<std::uint8_t>& bytes);

}  // namespace rrm
