#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rrm/error_control.hpp"
#include "rrm/layers.hpp"
#include "rrm/metrics.hpp"
#include "rrm/tensor.hpp"

namespace rrm {

// Per linear layer: the exact (reconstructed) input the previous frame
// presented to it and the projection computed from that input. Strictly
// sequential; one state per chunk of video.
struct RRMState {
  struct Snapshot {
    Tensor prev_input;
    Tensor prev_projection;
  };
  std::vector<Snapshot> snapshots;  // one per Conv/Fc layer, model order
  std::size_t frame_index = 0;      // frames processed so far
  std::size_t since_keyframe = 0;

  bool initialized() const { return !snapshots.empty(); }
};

enum class FrameMode { Keyframe, Delta };

// One row per linear layer. On delta frames delta_density is the truncated
// delta's non-zero fraction; on keyframes it is the dense input's non-zero
// fraction (what a zero-skipping engine pays for the precise pass).
struct LinearLayerStats {
  double delta_density = 0.0;
  double input_zero_fraction = 0.0;
  std::uint64_t multiplications = 0;
  double truncated_l2 = 0.0;
};

// Work the cost model deliberately leaves out of the speedup ratio, reported
// so the "adds are trivial" assumption can be audited.
struct OverheadCounters {
  std::uint64_t subtractions = 0;      // delta computation
  std::uint64_t additions = 0;         // projection reconstruction
  std::uint64_t snapshot_writes = 0;   // state updates

  OverheadCounters& operator+=(const OverheadCounters& o);
};

struct FrameResult {
  Tensor features;
  std::vector<LinearLayerStats> per_layer;
  FrameMode mode = FrameMode::Keyframe;
  OverheadCounters overhead;
};

struct SequenceStats {
  std::vector<LinearLayerInfo> layers;
  std::vector<std::size_t> keyframe_indices;
  std::vector<double> e_t_trace;       // accumulated truncation after each frame
  std::vector<double> oracle_l2;       // vs per-frame dense run (oracle mode)
  std::vector<double> oracle_max_abs;
  std::uint64_t total_multiplications = 0;
  OverheadCounters overhead_total;
};

struct SequenceResult {
  std::vector<FrameResult> frames;
  SequenceStats stats;
};

// Full dense pass that (re)establishes every snapshot and resets the
// keyframe counter. Features are bit-identical to dense_forward.
FrameResult keyframe_forward(const NetworkModel& model, const Tensor& frame,
                             RRMState& state);

// Algorithm: per linear layer, subtract the snapshotted input, truncate at
// epsilon, push only the sparse delta through the kernel and add the result
// onto the snapshotted projection. Snapshots keep the reconstructed exact
// input, so truncation error never compounds through the snapshot chain.
FrameResult delta_forward(const NetworkModel& model, const Tensor& frame,
                          RRMState& state, float epsilon);

struct RunConfig {
  float epsilon = 0.0f;
  // When set, accumulated truncation is mapped through the model each frame;
  // a frame whose prediction exceeds the threshold is redone as a keyframe.
  std::optional<ErrorModel> controller;
  // Run the dense pipeline alongside and record per-frame feature errors.
  bool oracle = false;
};

// Frame 0 is always a keyframe; later frames take the delta path unless the
// error controller objects.
SequenceResult process_sequence(const NetworkModel& model,
                                std::span<const Tensor> frames,
                                const RunConfig& config);

// Splits the sequence into contiguous chunks, each processed with its own
// state (and its own leading keyframe), then merged in frame order. Results
// are deterministic and independent of scheduling.
SequenceResult process_sequence_chunked(const NetworkModel& model,
                                        std::span<const Tensor> frames,
                                        const RunConfig& config,
                                        std::size_t chunks);

}  // namespace rrm
