#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rrm/frame_source.hpp"
#include "rrm/report.hpp"

namespace rrm {

// Exactly one of directory/synthetic is set; validated by the commands.
struct FramesArg {
  std::optional<std::string> directory;
  std::optional<SyntheticSpec> synthetic;
};

struct RunOptions {
  std::string model_path;
  FramesArg frames;
  double epsilon = 0.0;
  std::optional<std::string> error_model_path;
  std::optional<double> error_threshold;  // overrides the stored threshold
  std::size_t chunks = 1;
  bool oracle = false;
  std::string report_path;  // empty: report returned but not written
};

Json cmd_run(const RunOptions& options);

struct SweepOptions {
  RunOptions base;                // base.epsilon ignored
  std::vector<double> epsilons;   // at least one
};

Json cmd_sweep(const SweepOptions& options);

struct CalibrateOptions {
  std::string model_path;
  FramesArg frames;
  std::size_t videos = 1;  // synthetic source: seeds seed, seed+1, ...
  double epsilon = 0.0;
  double threshold = 0.0;  // stored into the fitted model file
  std::string out_path;
};

// `injected_points` bypasses the measurement runs and fits the given pairs
// directly (test hook; the CLI always measures).
Json cmd_calibrate(const CalibrateOptions& options,
                   const std::vector<CalibrationPoint>& injected_points = {});

struct GenModelOptions {
  Shape input{3, 32, 32};
  std::size_t layers = 5;
  std::uint64_t seed = 0;
  std::string preset = "random";  // random | sweep
  std::string out_path;
};

void cmd_gen_model(const GenModelOptions& options);

}  // namespace rrm
