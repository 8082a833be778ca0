#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rrm/commands.hpp"

namespace {

// Exit codes: 0 success, 1 usage error, 2 data-format error, 3 numeric failure.
constexpr int kExitUsage = 1;
constexpr int kExitDataFormat = 2;
constexpr int kExitNumeric = 3;

struct FrameFlags {
  std::string directory;
  std::string synthetic;
};

void add_frame_flags(CLI::App* cmd, FrameFlags& flags) {
  auto* dir = cmd->add_option("--frames", flags.directory,
                              "Directory of raw frame files");
  auto* synth = cmd->add_option(
      "--synthetic", flags.synthetic,
      "Synthetic video spec, e.g. "
      "kind=shifting-square,c=3,h=32,w=32,frames=50,motion=1,noise=0,seed=0");
  dir->excludes(synth);
  synth->excludes(dir);
}

rrm::FramesArg resolve_frame_flags(const FrameFlags& flags) {
  rrm::FramesArg frames;
  if (!flags.directory.empty()) {
    frames.directory = flags.directory;
  }
  if (!flags.synthetic.empty()) {
    frames.synthetic = rrm::parse_synthetic_spec(flags.synthetic);
  }
  return frames;
}

rrm::Shape parse_shape(const std::string& text) {
  // CxHxW
  rrm::Shape shape;
  std::size_t first = text.find('x');
  std::size_t second = first == std::string::npos ? std::string::npos
                                                  : text.find('x', first + 1);
  try {
    if (second == std::string::npos) {
      throw std::invalid_argument(text);
    }
    shape.channels = std::stoul(text.substr(0, first));
    shape.height = std::stoul(text.substr(first + 1, second - first - 1));
    shape.width = std::stoul(text.substr(second + 1));
  } catch (const std::exception&) {
    throw rrm::FormatError("expected CxHxW shape, got \"" + text + "\"");
  }
  return shape;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video CNN inference runtime that forwards sparse frame "
               "deltas through cached per-layer projections"};
  app.require_subcommand(1);

  // run
  rrm::RunOptions run_options;
  FrameFlags run_frames;
  std::string run_error_model;
  double run_error_threshold = -1.0;
  auto* run = app.add_subcommand("run", "Process one video and write a report");
  run->add_option("--model", run_options.model_path, "Model file")->required();
  add_frame_flags(run, run_frames);
  run->add_option("--epsilon", run_options.epsilon,
                  "Delta truncation threshold (0 = exact)");
  run->add_option("--error-model", run_error_model,
                  "Fitted error-model file enabling keyframe control");
  run->add_option("--error-threshold", run_error_threshold,
                  "Override the error-model trigger threshold");
  run->add_option("--chunks", run_options.chunks,
                  "Process the video as N independent parallel chunks");
  run->add_flag("--oracle", run_options.oracle,
                "Run the dense pipeline alongside and record feature errors");
  run->add_option("--report", run_options.report_path, "Report JSON path")
      ->required();

  // sweep
  rrm::SweepOptions sweep_options;
  FrameFlags sweep_frames;
  auto* sweep = app.add_subcommand(
      "sweep", "Run the same video across several thresholds");
  sweep->add_option("--model", sweep_options.base.model_path, "Model file")
      ->required();
  add_frame_flags(sweep, sweep_frames);
  sweep->add_option("--epsilons", sweep_options.epsilons,
                    "Thresholds to sweep")
      ->required()
      ->expected(-1);
  sweep->add_option("--chunks", sweep_options.base.chunks,
                    "Chunk count per run");
  sweep->add_flag("--oracle", sweep_options.base.oracle,
                  "Record feature errors per run");
  sweep->add_option("--report", sweep_options.base.report_path,
                    "Report JSON path")
      ->required();

  // calibrate
  rrm::CalibrateOptions cal_options;
  FrameFlags cal_frames;
  auto* calibrate = app.add_subcommand(
      "calibrate", "Fit the accumulated-error model from measurement runs");
  calibrate->add_option("--model", cal_options.model_path, "Model file")
      ->required();
  add_frame_flags(calibrate, cal_frames);
  calibrate->add_option("--videos", cal_options.videos,
                        "Synthetic videos to measure (seeds seed, seed+1, ...)");
  calibrate->add_option("--epsilon", cal_options.epsilon,
                        "Truncation threshold used while measuring")
      ->required();
  calibrate->add_option("--error-threshold", cal_options.threshold,
                        "Trigger threshold stored in the fitted model");
  calibrate->add_option("--out", cal_options.out_path,
                        "Error-model output path")
      ->required();

  // gen-model
  rrm::GenModelOptions gen_options;
  std::string gen_input = "3x32x32";
  auto* gen = app.add_subcommand("gen-model",
                                 "Write a seeded model file for experiments");
  gen->add_option("--input", gen_input, "Input shape CxHxW the model expects");
  gen->add_option("--layers", gen_options.layers, "Layer count (random preset)");
  gen->add_option("--seed", gen_options.seed, "Weight seed");
  gen->add_option("--preset", gen_options.preset, "random | sweep");
  gen->add_option("--out", gen_options.out_path, "Model output path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) {
      run_options.frames = resolve_frame_flags(run_frames);
      if (!run_error_model.empty()) {
        run_options.error_model_path = run_error_model;
      }
      if (run_error_threshold >= 0.0) {
        run_options.error_threshold = run_error_threshold;
      }
      rrm::cmd_run(run_options);
    } else if (sweep->parsed()) {
      sweep_options.base.frames = resolve_frame_flags(sweep_frames);
      rrm::cmd_sweep(sweep_options);
    } else if (calibrate->parsed()) {
      cal_options.frames = resolve_frame_flags(cal_frames);
      rrm::cmd_calibrate(cal_options);
    } else if (gen->parsed()) {
      gen_options.input = parse_shape(gen_input);
      rrm::cmd_gen_model(gen_options);
    }
  } catch (const rrm::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const rrm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataFormat;
  }
  return 0;
}
