#include "rrm/engine.hpp"

#include <algorithm>
#include <future>
#include <string>
#include <utility>

namespace rrm {

OverheadCounters& OverheadCounters::operator+=(const OverheadCounters& o) {
  subtractions += o.subtractions;
  additions += o.additions;
  snapshot_writes += o.snapshot_writes;
  return *this;
}

FrameResult keyframe_forward(const NetworkModel& model, const Tensor& frame,
                             RRMState& state) {
  FrameResult result;
  result.mode = FrameMode::Keyframe;
  std::vector<RRMState::Snapshot> snapshots;
  snapshots.reserve(model.linear_layer_count());

  result.features = dense_forward(
      model, frame,
      [&](std::size_t layer_index, const Tensor& input, const Tensor& projection) {
        const double s = zero_fraction(input);
        const auto* conv = std::get_if<ConvSpec>(&model.layers[layer_index]);
        const std::uint64_t mults =
            conv ? conv_dense_mults(*conv, input.shape)
                 : fc_dense_mults(std::get<FcSpec>(model.layers[layer_index]));
        result.per_layer.push_back({1.0 - s, s, mults, 0.0});
        result.overhead.snapshot_writes += input.numel() + projection.numel();
        snapshots.push_back({input, projection});
      });

  if (!all_finite(result.features)) {
    throw NumericError("keyframe_forward: non-finite features at frame " +
                       std::to_string(state.frame_index));
  }
  state.snapshots = std::move(snapshots);
  state.frame_index += 1;
  state.since_keyframe = 0;
  return result;
}

FrameResult delta_forward(const NetworkModel& model, const Tensor& frame,
                          RRMState& state, float epsilon) {
  if (!state.initialized()) {
    throw InvalidArgument(
        "delta_forward: state is uninitialized; run a keyframe first");
  }
  if (state.snapshots.size() != model.linear_layer_count()) {
    throw InvalidArgument(
        "delta_forward: state holds " + std::to_string(state.snapshots.size()) +
        " snapshots but the model has " +
        std::to_string(model.linear_layer_count()) + " linear layers");
  }

  FrameResult result;
  result.mode = FrameMode::Delta;
  Tensor current = frame;
  std::size_t linear_index = 0;

  for (const LayerSpec& layer : model.layers) {
    if (!is_linear(layer)) {
      current = apply_nonlinear(layer, current);
      continue;
    }
    RRMState::Snapshot& snap = state.snapshots[linear_index];
    if (!(current.shape == snap.prev_input.shape)) {
      throw ShapeError("delta_forward: layer input " + current.shape.str() +
                       " drifted from snapshot " + snap.prev_input.shape.str());
    }

    const Tensor delta = subtract(current, snap.prev_input);
    SparsifyResult sparse = sparsify(delta, epsilon);

    KernelResult increment =
        std::holds_alternative<ConvSpec>(layer)
            ? sparse_conv(std::get<ConvSpec>(layer), sparse.delta)
            : sparse_fc(std::get<FcSpec>(layer), sparse.delta);
    Tensor projection = add(snap.prev_projection, increment.output);

    result.per_layer.push_back({sparse.delta.density(), zero_fraction(current),
                                increment.multiplications,
                                sparse.truncated_l2});
    result.overhead.subtractions += delta.numel();
    result.overhead.additions += projection.numel();
    result.overhead.snapshot_writes += current.numel() + projection.numel();

    snap.prev_input = std::move(current);
    snap.prev_projection = projection;
    current = std::move(projection);
    ++linear_index;
  }

  if (!all_finite(current)) {
    throw NumericError("delta_forward: non-finite features at frame " +
                       std::to_string(state.frame_index));
  }
  result.features = std::move(current);
  state.frame_index += 1;
  state.since_keyframe += 1;
  return result;
}

SequenceResult process_sequence(const NetworkModel& model,
                                std::span<const Tensor> frames,
                                const RunConfig& config) {
  if (frames.empty()) {
    throw InvalidArgument("process_sequence: empty frame sequence");
  }
  SequenceResult result;
  result.stats.layers = linear_layer_table(model, frames[0].shape);
  result.frames.reserve(frames.size());

  RRMState state;
  ErrorAccumulator acc;
  std::vector<double> frame_norms;

  for (std::size_t t = 0; t < frames.size(); ++t) {
    FrameResult fr;
    if (t == 0) {
      fr = keyframe_forward(model, frames[t], state);
      acc.reset();
    } else {
      fr = delta_forward(model, frames[t], state, config.epsilon);
      frame_norms.clear();
      for (const auto& row : fr.per_layer) {
        frame_norms.push_back(row.truncated_l2);
      }
      acc.accumulate(frame_norms);
      if (config.controller &&
          predict_and_decide(*config.controller, acc) == Decision::ForceKeyframe) {
        // Redo this frame precisely; the delta attempt is discarded.
        state.frame_index -= 1;
        fr = keyframe_forward(model, frames[t], state);
        acc.reset();
      }
    }

    if (fr.mode == FrameMode::Keyframe) {
      result.stats.keyframe_indices.push_back(t);
    }
    result.stats.e_t_trace.push_back(acc.value());
    for (const auto& row : fr.per_layer) {
      result.stats.total_multiplications += row.multiplications;
    }
    result.stats.overhead_total += fr.overhead;

    if (config.oracle) {
      const Tensor reference = dense_forward(model, frames[t]);
      result.stats.oracle_l2.push_back(l2_distance(fr.features, reference));
      result.stats.oracle_max_abs.push_back(max_abs_diff(fr.features, reference));
    }
    result.frames.push_back(std::move(fr));
  }
  return result;
}

SequenceResult process_sequence_chunked(const NetworkModel& model,
                                        std::span<const Tensor> frames,
                                        const RunConfig& config,
                                        std::size_t chunks) {
  if (chunks == 0) {
    throw InvalidArgument("process_sequence_chunked: chunks must be >= 1");
  }
  if (chunks == 1 || frames.size() <= 1) {
    return process_sequence(model, frames, config);
  }
  const std::size_t n = std::min(chunks, frames.size());
  std::vector<std::span<const Tensor>> parts;
  const std::size_t base = frames.size() / n;
  const std::size_t extra = frames.size() % n;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    parts.push_back(frames.subspan(offset, len));
    offset += len;
  }

  std::vector<std::future<SequenceResult>> workers;
  workers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    workers.push_back(std::async(std::launch::async, [&, i] {
      return process_sequence(model, parts[i], config);
    }));
  }

  SequenceResult merged;
  std::size_t frame_offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    SequenceResult part = workers[i].get();
    if (i == 0) {
      merged.stats.layers = std::move(part.stats.layers);
    }
    for (std::size_t k : part.stats.keyframe_indices) {
      merged.stats.keyframe_indices.push_back(frame_offset + k);
    }
    merged.stats.e_t_trace.insert(merged.stats.e_t_trace.end(),
                                  part.stats.e_t_trace.begin(),
                                  part.stats.e_t_trace.end());
    merged.stats.oracle_l2.insert(merged.stats.oracle_l2.end(),
                                  part.stats.oracle_l2.begin(),
                                  part.stats.oracle_l2.end());
    merged.stats.oracle_max_abs.insert(merged.stats.oracle_max_abs.end(),
                                       part.stats.oracle_max_abs.begin(),
                                       part.stats.oracle_max_abs.end());
    merged.stats.total_multiplications += part.stats.total_multiplications;
    merged.stats.overhead_total += part.stats.overhead_total;
    for (auto& fr : part.frames) {
      merged.frames.push_back(std::move(fr));
    }
    frame_offset += part.frames.size();
  }
  return merged;
}

}  // namespace rrm
