#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rrm/engine.hpp"
#include "rrm/error_control.hpp"

namespace rrm {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

// Per-frame/per-layer rows assembled for the cost model. `dense` carries the
// original activations' densities, `rrm` the truncated-delta densities
// (keyframes pay their dense input density on the rrm side), `baseline`
// density 1 everywhere. `delta` masks which rows belong to delta frames.
struct WorkloadRows {
  std::vector<LayerWorkload> dense;
  std::vector<LayerWorkload> rrm;
  std::vector<LayerWorkload> baseline;
  std::vector<bool> delta;
};

WorkloadRows collect_workloads(const SequenceResult& run);

// Report document without the timestamp; write_report stamps and writes it.
Json build_run_report(const Json& config_echo, const NetworkModel& model,
                      const SequenceResult& run);

Json build_sweep_report(const Json& config_echo,
                        const std::vector<std::pair<double, Json>>& runs);

// Writes `path` as pretty JSON with a generated_at field added at the top
// level (the one field excluded from byte-for-byte reproducibility), plus a
// CSV summary next to it with the extension swapped to .csv.
void write_report(const std::filesystem::path& path, Json report);

Json error_model_to_json(const ErrorModel& model);
ErrorModel error_model_from_json(const Json& j);
void save_error_model(const std::filesystem::path& path, const ErrorModel& model);
ErrorModel load_error_model(const std::filesystem::path& path);

}  // namespace rrm
