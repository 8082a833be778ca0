#include "rrm/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rrm {

namespace {

Json speedup_to_json(const SpeedupRatio& r) {
  return Json{{"value", r.value}, {"infinite", r.infinite}};
}

// Reports must not carry NaN/Inf (nlohmann would silently emit null).
void check_finite(const Json& j, const std::string& where) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw NumericError("non-finite value in report at " + where);
  }
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      check_finite(value, where + "/" + key);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      check_finite(j[i], where + "/" + std::to_string(i));
    }
  }
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_run_csv(std::ostream& out, const Json& report) {
  out << "frame,mode,e_t,multiplications,mean_delta_density,"
         "mean_input_zero_fraction,truncated_l2,oracle_l2\n";
  for (const auto& frame : report.at("frames")) {
    double density_sum = 0.0;
    double zero_sum = 0.0;
    double trunc_sum = 0.0;
    std::uint64_t mults = 0;
    const auto& layers = frame.at("layers");
    for (const auto& row : layers) {
      density_sum += row.at("delta_density").get<double>();
      zero_sum += row.at("input_zero_fraction").get<double>();
      trunc_sum += row.at("truncated_l2").get<double>();
      mults += row.at("multiplications").get<std::uint64_t>();
    }
    const double n = layers.empty() ? 1.0 : static_cast<double>(layers.size());
    out << frame.at("index").get<std::size_t>() << ','
        << frame.at("mode").get<std::string>() << ','
        << frame.at("e_t").get<double>() << ',' << mults << ','
        << density_sum / n << ',' << zero_sum / n << ',' << trunc_sum << ',';
    if (frame.contains("oracle_l2")) {
      out << frame.at("oracle_l2").get<double>();
    }
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const Json& report) {
  out << "epsilon,overall_sparsity_dense,overall_sparsity_rrm_deltas,"
         "speedup_ratio,speedup_infinite,final_oracle_l2\n";
  for (const auto& row : report.at("table")) {
    out << row.at("epsilon").get<double>() << ','
        << row.at("overall_sparsity_dense").get<double>() << ',';
    if (row.at("overall_sparsity_rrm_deltas").is_number()) {
      out << row.at("overall_sparsity_rrm_deltas").get<double>();
    }
    out << ',' << row.at("speedup_ratio").at("value").get<double>() << ','
        << (row.at("speedup_ratio").at("infinite").get<bool>() ? 1 : 0) << ',';
    if (row.contains("final_oracle_l2") && row.at("final_oracle_l2").is_number()) {
      out << row.at("final_oracle_l2").get<double>();
    }
    out << '\n';
  }
}

}  // namespace

WorkloadRows collect_workloads(const SequenceResult& run) {
  WorkloadRows rows;
  for (const auto& frame : run.frames) {
    const bool is_delta = frame.mode == FrameMode::Delta;
    for (std::size_t l = 0; l < frame.per_layer.size(); ++l) {
      const LinearLayerInfo& info = run.stats.layers[l];
      const LinearLayerStats& s = frame.per_layer[l];
      rows.dense.push_back({info.layer_index, info.kind, info.dense_mults,
                            1.0 - s.input_zero_fraction, s.input_zero_fraction});
      rows.rrm.push_back({info.layer_index, info.kind, info.dense_mults,
                          s.delta_density, 1.0 - s.delta_density});
      rows.baseline.push_back(
          {info.layer_index, info.kind, info.dense_mults, 1.0, 0.0});
      rows.delta.push_back(is_delta);
    }
  }
  return rows;
}

Json build_run_report(const Json& config_echo, const NetworkModel& model,
                      const SequenceResult& run) {
  Json report;
  report["schema_version"] = kReportSchemaVersion;
  report["config"] = config_echo;

  Json layer_kinds = Json::array();
  for (const auto& layer : model.layers) {
    layer_kinds.push_back(layer_kind_name(layer));
  }
  Json linear_layers = Json::array();
  for (const auto& info : run.stats.layers) {
    linear_layers.push_back(
        {{"layer", info.layer_index},
         {"kind", info.kind == LinearKind::Conv ? "conv" : "fc"},
         {"dense_mults", info.dense_mults}});
  }
  report["model"] = {{"layer_kinds", layer_kinds},
                     {"linear_layers", linear_layers}};

  const bool oracle = !run.stats.oracle_l2.empty();
  Json frames = Json::array();
  for (std::size_t t = 0; t < run.frames.size(); ++t) {
    const FrameResult& fr = run.frames[t];
    Json layers = Json::array();
    for (std::size_t l = 0; l < fr.per_layer.size(); ++l) {
      const auto& s = fr.per_layer[l];
      layers.push_back({{"layer", run.stats.layers[l].layer_index},
                        {"delta_density", s.delta_density},
                        {"input_zero_fraction", s.input_zero_fraction},
                        {"multiplications", s.multiplications},
                        {"truncated_l2", s.truncated_l2}});
    }
    Json frame{{"index", t},
               {"mode", fr.mode == FrameMode::Keyframe ? "keyframe" : "delta"},
               {"e_t", run.stats.e_t_trace[t]},
               {"layers", layers}};
    if (oracle) {
      frame["oracle_l2"] = run.stats.oracle_l2[t];
      frame["oracle_max_abs"] = run.stats.oracle_max_abs[t];
    }
    frames.push_back(std::move(frame));
  }
  report["frames"] = frames;

  const WorkloadRows rows = collect_workloads(run);
  std::vector<LayerWorkload> dense_delta, rrm_delta;
  for (std::size_t i = 0; i < rows.delta.size(); ++i) {
    if (rows.delta[i]) {
      dense_delta.push_back(rows.dense[i]);
      rrm_delta.push_back(rows.rrm[i]);
    }
  }

  Json summary;
  summary["frames"] = run.frames.size();
  summary["keyframes"] = run.stats.keyframe_indices;
  summary["total_multiplications"] = run.stats.total_multiplications;
  summary["overhead"] = {
      {"subtractions", run.stats.overhead_total.subtractions},
      {"additions", run.stats.overhead_total.additions},
      {"snapshot_writes", run.stats.overhead_total.snapshot_writes}};
  summary["overall_sparsity_dense"] = overall_sparsity(rows.dense);
  summary["overall_sparsity_rrm_deltas"] =
      rrm_delta.empty() ? Json() : Json(overall_sparsity(rrm_delta));
  summary["speedup_ratio"] = speedup_to_json(speedup_ratio(rows.dense, rows.rrm));
  summary["speedup_ratio_delta_frames_only"] =
      rrm_delta.empty() ? Json()
                        : speedup_to_json(speedup_ratio(dense_delta, rrm_delta));
  summary["speedup_ratio_vs_dense_baseline"] =
      speedup_to_json(speedup_ratio(rows.baseline, rows.rrm));
  if (oracle) {
    double max_l2 = 0.0, max_abs = 0.0;
    for (double v : run.stats.oracle_l2) max_l2 = std::max(max_l2, v);
    for (double v : run.stats.oracle_max_abs) max_abs = std::max(max_abs, v);
    summary["max_oracle_l2"] = max_l2;
    summary["max_oracle_max_abs"] = max_abs;
    summary["final_oracle_l2"] = run.stats.oracle_l2.back();
  }
  report["summary"] = std::move(summary);
  return report;
}

Json build_sweep_report(const Json& config_echo,
                        const std::vector<std::pair<double, Json>>& runs) {
  Json report;
  report["schema_version"] = kReportSchemaVersion;
  report["config"] = config_echo;
  Json run_array = Json::array();
  Json table = Json::array();
  for (const auto& [epsilon, sub] : runs) {
    run_array.push_back({{"epsilon", epsilon}, {"report", sub}});
    const Json& summary = sub.at("summary");
    Json row{{"epsilon", epsilon},
             {"overall_sparsity_dense", summary.at("overall_sparsity_dense")},
             {"overall_sparsity_rrm_deltas",
              summary.at("overall_sparsity_rrm_deltas")},
             {"speedup_ratio", summary.at("speedup_ratio")}};
    if (summary.contains("final_oracle_l2")) {
      row["final_oracle_l2"] = summary.at("final_oracle_l2");
    }
    table.push_back(std::move(row));
  }
  report["runs"] = std::move(run_array);
  report["table"] = std::move(table);
  return report;
}

void write_report(const std::filesystem::path& path, Json report) {
  check_finite(report, "");
  report["generated_at"] = timestamp_utc();
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write report: " + path.string());
  }
  out << report.dump(2) << '\n';

  std::filesystem::path csv_path = path;
  csv_path.replace_extension(".csv");
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) {
    throw FormatError("cannot write report CSV: " + csv_path.string());
  }
  if (report.contains("table")) {
    write_sweep_csv(csv, report);
  } else {
    write_run_csv(csv, report);
  }
}

Json error_model_to_json(const ErrorModel& model) {
  Json points = Json::array();
  for (const auto& p : model.calibration_points) {
    points.push_back({p.accumulated_truncation, p.measured_error});
  }
  return Json{{"schema_version", kReportSchemaVersion},
              {"mu", model.mu},
              {"threshold", model.threshold},
              {"fit_mean", model.fit_mean},
              {"fit_scale", model.fit_scale},
              {"calibration_points", points}};
}

ErrorModel error_model_from_json(const Json& j) {
  ErrorModel model;
  try {
    const auto& mu = j.at("mu");
    if (!mu.is_array() || mu.size() != model.mu.size()) {
      throw FormatError("error model: mu must hold 5 coefficients");
    }
    for (std::size_t i = 0; i < model.mu.size(); ++i) {
      model.mu[i] = mu[i].get<double>();
    }
    model.threshold = j.at("threshold").get<double>();
    model.fit_mean = j.value("fit_mean", 0.0);
    model.fit_scale = j.value("fit_scale", 1.0);
    if (j.contains("calibration_points")) {
      for (const auto& p : j.at("calibration_points")) {
        model.calibration_points.push_back(
            {p.at(0).get<double>(), p.at(1).get<double>()});
      }
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("error model: ") + e.what());
  }
  return model;
}

void save_error_model(const std::filesystem::path& path,
                      const ErrorModel& model) {
  Json j = error_model_to_json(model);
  check_finite(j, "");
  j["generated_at"] = timestamp_utc();
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write error model: " + path.string());
  }
  out << j.dump(2) << '\n';
}

ErrorModel load_error_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open error model: " + path.string());
  }
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw FormatError("error model " + path.string() + ": " + e.what());
  }
  return error_model_from_json(j);
}

}  // namespace rrm
