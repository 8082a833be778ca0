#include "rrm/commands.hpp"

#include <algorithm>

#include "rrm/model_io.hpp"
#include "rrm/model_zoo.hpp"

namespace rrm {

namespace {

std::vector<Tensor> resolve_frames(const FramesArg& frames) {
  if (frames.directory.has_value() == frames.synthetic.has_value()) {
    throw InvalidArgument(
        "exactly one frame source (directory or synthetic spec) is required");
  }
  if (frames.directory) {
    return load_frame_directory(*frames.directory);
  }
  return generate_video(*frames.synthetic);
}

Json frames_echo(const FramesArg& frames) {
  if (frames.directory) {
    return Json{{"directory", *frames.directory}};
  }
  return Json{{"synthetic", synthetic_spec_string(*frames.synthetic)}};
}

RunConfig make_run_config(const RunOptions& options) {
  RunConfig config;
  config.epsilon = static_cast<float>(options.epsilon);
  config.oracle = options.oracle;
  if (options.error_model_path) {
    ErrorModel controller = load_error_model(*options.error_model_path);
    if (options.error_threshold) {
      controller.threshold = *options.error_threshold;
    }
    config.controller = std::move(controller);
  }
  return config;
}

Json run_config_echo(const RunOptions& options, const RunConfig& config) {
  Json echo{{"model", options.model_path},
            {"frames", frames_echo(options.frames)},
            {"epsilon", options.epsilon},
            {"chunks", options.chunks},
            {"oracle", options.oracle}};
  if (config.controller) {
    echo["error_control"] = {{"enabled", true},
                             {"threshold", config.controller->threshold},
                             {"mu", config.controller->mu}};
  } else {
    echo["error_control"] = {{"enabled", false}};
  }
  return echo;
}

}  // namespace

Json cmd_run(const RunOptions& options) {
  if (options.epsilon < 0.0) {
    throw InvalidArgument("epsilon must be >= 0");
  }
  const NetworkModel model = load_model(options.model_path);
  const std::vector<Tensor> frames = resolve_frames(options.frames);
  model.validate(frames.front().shape);

  const RunConfig config = make_run_config(options);
  const SequenceResult run =
      process_sequence_chunked(model, frames, config, options.chunks);

  Json report = build_run_report(run_config_echo(options, config), model, run);
  if (!options.report_path.empty()) {
    write_report(options.report_path, report);
  }
  return report;
}

Json cmd_sweep(const SweepOptions& options) {
  if (options.epsilons.empty()) {
    throw InvalidArgument("sweep needs at least one epsilon");
  }
  const NetworkModel model = load_model(options.base.model_path);
  const std::vector<Tensor> frames = resolve_frames(options.base.frames);
  model.validate(frames.front().shape);

  std::vector<std::pair<double, Json>> runs;
  runs.reserve(options.epsilons.size());
  for (double epsilon : options.epsilons) {
    if (epsilon < 0.0) {
      throw InvalidArgument("epsilon must be >= 0");
    }
    RunOptions per_run = options.base;
    per_run.epsilon = epsilon;
    const RunConfig config = make_run_config(per_run);
    const SequenceResult run =
        process_sequence_chunked(model, frames, config, per_run.chunks);
    runs.emplace_back(epsilon,
                      build_run_report(run_config_echo(per_run, config), model, run));
  }

  Json config_echo{{"model", options.base.model_path},
                   {"frames", frames_echo(options.base.frames)},
                   {"epsilons", options.epsilons},
                   {"chunks", options.base.chunks},
                   {"oracle", options.base.oracle}};
  Json report = build_sweep_report(config_echo, runs);
  if (!options.base.report_path.empty()) {
    write_report(options.base.report_path, report);
  }
  return report;
}

Json cmd_calibrate(const CalibrateOptions& options,
                   const std::vector<CalibrationPoint>& injected_points) {
  std::vector<CalibrationPoint> points = injected_points;
  Json source_echo;
  if (points.empty()) {
    const NetworkModel model = load_model(options.model_path);
    std::vector<std::vector<Tensor>> videos;
    if (options.frames.synthetic) {
      SyntheticSpec spec = *options.frames.synthetic;
      for (std::size_t i = 0; i < std::max<std::size_t>(1, options.videos); ++i) {
        videos.push_back(generate_video(spec));
        spec.seed += 1;
      }
    } else {
      videos.push_back(resolve_frames(options.frames));
    }
    model.validate(videos.front().front().shape);
    points = calibrate(model, videos, static_cast<float>(options.epsilon));
    source_echo = {{"model", options.model_path},
                   {"frames", frames_echo(options.frames)},
                   {"videos", videos.size()},
                   {"epsilon", options.epsilon}};
  } else {
    source_echo = {{"injected_points", points.size()}};
  }

  // Exact-mode measurements never truncate, so every e_t is zero and the
  // quartic is underdetermined; ship the constant model instead.
  const bool all_zero =
      std::all_of(points.begin(), points.end(), [](const CalibrationPoint& p) {
        return p.accumulated_truncation == 0.0;
      });
  ErrorModel fitted;
  if (all_zero) {
    double mean = 0.0;
    for (const auto& p : points) mean += p.measured_error;
    fitted.mu = {points.empty() ? 0.0 : mean / static_cast<double>(points.size()),
                 0.0, 0.0, 0.0, 0.0};
    fitted.threshold = options.threshold;
    fitted.calibration_points = points;
  } else {
    fitted = fit_error_model(points, options.threshold);
  }
  if (!options.out_path.empty()) {
    save_error_model(options.out_path, fitted);
  }
  Json result = error_model_to_json(fitted);
  result["source"] = source_echo;
  return result;
}

void cmd_gen_model(const GenModelOptions& options) {
  NetworkModel model;
  if (options.preset == "random") {
    model = make_random_model(options.input, options.layers, options.seed);
  } else if (options.preset == "sweep") {
    model = make_sweep_model(options.input, options.seed);
  } else {
    throw InvalidArgument("unknown preset \"" + options.preset +
                          "\" (random | sweep)");
  }
  if (options.out_path.empty()) {
    throw InvalidArgument("gen-model needs an output path");
  }
  save_model(options.out_path, model);
}

}  // namespace rrm
