#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rrm/commands.hpp"
#include "rrm/frame_source.hpp"
#include "rrm/model_io.hpp"
#include "rrm/model_zoo.hpp"
#include "rrm/report.hpp"

namespace fs = std::filesystem;
using rrm::Json;
using rrm::NetworkModel;
using rrm::Shape;
using rrm::Tensor;

namespace {

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name)
      : path(fs::temp_directory_path() / ("rrm_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// The one field allowed to differ between identical runs.
std::string strip_timestamp(std::string text) {
  const auto pos = text.find("\"generated_at\"");
  if (pos == std::string::npos) return text;
  const auto end = text.find('\n', pos);
  text.erase(pos, end - pos + 1);
  return text;
}

NetworkModel sample_model() {
  oracle::Rng rng(200);
  NetworkModel model;
  model.layers.emplace_back(rng.conv_spec(2, 4, 3, 1, 1));
  model.layers.emplace_back(rrm::ReluSpec{});
  model.layers.emplace_back(rrm::MaxPoolSpec{2, 2});
  model.layers.emplace_back(rng.fc_spec(4 * 6 * 6, 10));
  return model;
}

}  // namespace

TEST_CASE("model files round-trip bit for bit") {
  ScratchDir dir("model_roundtrip");
  const NetworkModel model = sample_model();
  const auto encoded = rrm::encode_model(model);

  rrm::save_model(dir / "m.rrmm", model);
  CHECK(read_bytes(dir / "m.rrmm") == encoded);

  const NetworkModel loaded = rrm::load_model(dir / "m.rrmm");
  CHECK(rrm::encode_model(loaded) == encoded);
  REQUIRE(loaded.layers.size() == 4);
  const auto& conv = std::get<rrm::ConvSpec>(loaded.layers[0]);
  const auto& original = std::get<rrm::ConvSpec>(model.layers[0]);
  CHECK(conv.weights == original.weights);
  CHECK(conv.bias == original.bias);
}

TEST_CASE("well-formed two-layer file loads as two layers") {
  oracle::Rng rng(201);
  NetworkModel model;
  model.layers.emplace_back(rng.conv_spec(1, 2, 3, 1, 1));
  model.layers.emplace_back(rrm::ReluSpec{});
  const NetworkModel loaded = rrm::decode_model(rrm::encode_model(model));
  CHECK(loaded.layers.size() == 2);
}

TEST_CASE("bad magic is a distinct error") {
  auto bytes = rrm::encode_model(sample_model());
  bytes[0] = 'X';
  CHECK_THROWS_WITH_AS(rrm::decode_model(bytes), doctest::Contains("magic"),
                       rrm::FormatError);
}

TEST_CASE("truncated files name the missing piece and offset") {
  auto bytes = rrm::encode_model(sample_model());
  bytes.resize(bytes.size() / 2);
  CHECK_THROWS_WITH_AS(rrm::decode_model(bytes), doctest::Contains("truncated"),
                       rrm::FormatError);
}

TEST_CASE("trailing bytes are rejected with the parse offset") {
  auto bytes = rrm::encode_model(sample_model());
  const std::string expected_offset = std::to_string(bytes.size());
  bytes.push_back(0);
  bytes.push_back(0);
  bytes.push_back(0);
  CHECK_THROWS_WITH_AS(rrm::decode_model(bytes),
                       doctest::Contains(expected_offset.c_str()),
                       rrm::FormatError);
}

TEST_CASE("channel-inconsistent chains are rejected at load") {
  oracle::Rng rng(202);
  NetworkModel model;
  model.layers.emplace_back(rng.conv_spec(3, 4, 3, 1, 1));
  model.layers.emplace_back(rng.conv_spec(5, 4, 3, 1, 1));  // expects 5, gets 4
  CHECK_THROWS_WITH_AS(rrm::decode_model(rrm::encode_model(model)),
                       doctest::Contains("chain"), rrm::FormatError);
}

TEST_CASE("unknown layer tags are rejected") {
  NetworkModel model;
  model.layers.emplace_back(rrm::ReluSpec{});
  auto bytes = rrm::encode_model(model);
  bytes[12] = 9;  // layer tag of the first layer
  CHECK_THROWS_WITH_AS(rrm::decode_model(bytes), doctest::Contains("kind"),
                       rrm::FormatError);
}

TEST_CASE("frame files round-trip") {
  ScratchDir dir("frame_roundtrip");
  oracle::Rng rng(203);
  const Tensor frame = rng.tensor({3, 5, 7});
  rrm::save_frame(dir / "000.frame", frame);
  const Tensor loaded = rrm::load_frame(dir / "000.frame");
  CHECK(loaded.shape == frame.shape);
  CHECK(loaded.data == frame.data);
}

TEST_CASE("frame directories load in lexicographic order") {
  ScratchDir dir("frame_dir");
  oracle::Rng rng(204);
  const Tensor a = rng.tensor({1, 2, 2});
  const Tensor b = rng.tensor({1, 2, 2});
  const Tensor c = rng.tensor({1, 2, 2});
  rrm::save_frame(dir / "010.frame", b);
  rrm::save_frame(dir / "002.frame", a);
  rrm::save_frame(dir / "100.frame", c);
  const auto frames = rrm::load_frame_directory(dir.path);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].data == a.data);
  CHECK(frames[1].data == b.data);
  CHECK(frames[2].data == c.data);
}

TEST_CASE("mixed frame shapes in one directory are rejected") {
  ScratchDir dir("frame_mixed");
  oracle::Rng rng(205);
  rrm::save_frame(dir / "a.frame", rng.tensor({1, 2, 2}));
  rrm::save_frame(dir / "b.frame", rng.tensor({1, 3, 3}));
  CHECK_THROWS_AS(rrm::load_frame_directory(dir.path), rrm::FormatError);
}

TEST_CASE("non-finite frame data is a numeric failure") {
  ScratchDir dir("frame_nan");
  Tensor bad(Shape{1, 1, 2});
  bad.data[0] = std::numeric_limits<float>::quiet_NaN();
  rrm::save_frame(dir / "a.frame", bad);
  CHECK_THROWS_AS(rrm::load_frame(dir / "a.frame"), rrm::NumericError);
}

TEST_CASE("synthetic videos are deterministic per seed") {
  rrm::SyntheticSpec spec = rrm::parse_synthetic_spec(
      "kind=shifting-square,c=2,h=16,w=16,frames=6,motion=1,noise=0.02,seed=7");
  const auto a = rrm::generate_video(spec);
  const auto b = rrm::generate_video(spec);
  REQUIRE(a.size() == 6);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].data == b[t].data);
  }
  spec.seed = 8;
  const auto c = rrm::generate_video(spec);
  bool any_diff = false;
  for (std::size_t t = 0; t < a.size() && !any_diff; ++t) {
    any_diff = a[t].data != c[t].data;
  }
  CHECK(any_diff);
}

TEST_CASE("synthetic spec strings parse strictly") {
  CHECK_THROWS_AS(rrm::parse_synthetic_spec("c=3,h=4,w=4"), rrm::FormatError);
  CHECK_THROWS_AS(rrm::parse_synthetic_spec("kind=wobble"), rrm::FormatError);
  CHECK_THROWS_AS(rrm::parse_synthetic_spec("kind=static,bogus=1"),
                  rrm::FormatError);
  CHECK_THROWS_AS(rrm::parse_synthetic_spec("kind=static,frames=abc"),
                  rrm::FormatError);
  const auto spec = rrm::parse_synthetic_spec("kind=static,frames=3,seed=9");
  CHECK(spec.frames == 3);
  CHECK(spec.seed == 9);
  const auto echoed = rrm::parse_synthetic_spec(rrm::synthetic_spec_string(spec));
  CHECK(echoed.kind == spec.kind);
  CHECK(echoed.frames == spec.frames);
  CHECK(echoed.seed == spec.seed);
}

TEST_CASE("error models round-trip through their file format") {
  std::vector<rrm::CalibrationPoint> points;
  for (int i = 0; i < 8; ++i) {
    const double x = 0.3 * i;
    points.push_back({x, 0.2 + 0.7 * x * x});
  }
  const rrm::ErrorModel fitted = rrm::fit_error_model(points, 0.4);

  ScratchDir dir("error_model");
  rrm::save_error_model(dir / "em.json", fitted);
  const rrm::ErrorModel loaded = rrm::load_error_model(dir / "em.json");
  CHECK(loaded.mu == fitted.mu);
  CHECK(loaded.threshold == fitted.threshold);
  CHECK(loaded.fit_mean == fitted.fit_mean);
  CHECK(loaded.fit_scale == fitted.fit_scale);
  CHECK(loaded.calibration_points.size() == fitted.calibration_points.size());
}

TEST_CASE("cmd_run reports zero sparse work on a static video") {
  ScratchDir dir("cmd_static");
  rrm::cmd_gen_model({{2, 12, 12}, 5, 300, "sweep", (dir / "m.rrmm").string()});

  rrm::RunOptions options;
  options.model_path = (dir / "m.rrmm").string();
  options.frames.synthetic =
      rrm::parse_synthetic_spec("kind=static,c=2,h=12,w=12,frames=5,seed=1");
  options.report_path = (dir / "report.json").string();
  const Json report = rrm::cmd_run(options);

  const auto& frames = report.at("frames");
  REQUIRE(frames.size() == 5);
  for (std::size_t t = 1; t < 5; ++t) {
    CHECK(frames[t].at("mode") == "delta");
    for (const auto& row : frames[t].at("layers")) {
      CHECK(row.at("multiplications").get<std::uint64_t>() == 0);
    }
  }
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.csv"));
}

TEST_CASE("cmd_run oracle mode certifies exactness at epsilon zero") {
  ScratchDir dir("cmd_oracle");
  rrm::cmd_gen_model({{2, 12, 12}, 5, 301, "random", (dir / "m.rrmm").string()});

  rrm::RunOptions options;
  options.model_path = (dir / "m.rrmm").string();
  options.frames.synthetic = rrm::parse_synthetic_spec(
      "kind=random-walk,c=2,h=12,w=12,frames=20,motion=0.05,seed=2");
  options.oracle = true;
  const Json report = rrm::cmd_run(options);
  CHECK(report.at("summary").at("max_oracle_max_abs").get<double>() <= 1e-4);
}

TEST_CASE("reports are reproducible modulo the timestamp") {
  ScratchDir dir("cmd_deterministic");
  rrm::cmd_gen_model({{2, 12, 12}, 5, 302, "sweep", (dir / "m.rrmm").string()});

  rrm::RunOptions options;
  options.model_path = (dir / "m.rrmm").string();
  options.frames.synthetic = rrm::parse_synthetic_spec(
      "kind=shifting-square,c=2,h=12,w=12,frames=8,motion=1,noise=0.03,seed=3");
  options.epsilon = 0.03;
  options.chunks = 2;
  options.report_path = (dir / "a.json").string();
  rrm::cmd_run(options);
  options.report_path = (dir / "b.json").string();
  rrm::cmd_run(options);

  CHECK(strip_timestamp(read_text(dir / "a.json")) ==
        strip_timestamp(read_text(dir / "b.json")));
  CHECK(read_text(dir / "a.csv") == read_text(dir / "b.csv"));
}

TEST_CASE("report summaries can be recomputed from their own rows") {
  ScratchDir dir("report_selfdesc");
  rrm::cmd_gen_model({{2, 12, 12}, 5, 303, "sweep", (dir / "m.rrmm").string()});

  rrm::RunOptions options;
  options.model_path = (dir / "m.rrmm").string();
  options.frames.synthetic = rrm::parse_synthetic_spec(
      "kind=shifting-square,c=2,h=12,w=12,frames=10,motion=1,noise=0.02,seed=4");
  options.epsilon = 0.02;
  const Json report = rrm::cmd_run(options);

  std::vector<std::uint64_t> dense_mults;
  for (const auto& layer : report.at("model").at("linear_layers")) {
    dense_mults.push_back(layer.at("dense_mults").get<std::uint64_t>());
  }

  std::vector<rrm::LayerWorkload> dense_rows, rrm_rows, rrm_delta_rows;
  for (const auto& frame : report.at("frames")) {
    const bool is_delta = frame.at("mode") == "delta";
    std::size_t l = 0;
    for (const auto& row : frame.at("layers")) {
      rrm::LayerWorkload dense{l, rrm::LinearKind::Conv, dense_mults[l], 0.0, 0.0};
      dense.zero_fraction = row.at("input_zero_fraction").get<double>();
      dense.density = 1.0 - dense.zero_fraction;
      rrm::LayerWorkload rrm_row = dense;
      rrm_row.density = row.at("delta_density").get<double>();
      rrm_row.zero_fraction = 1.0 - rrm_row.density;
      dense_rows.push_back(dense);
      rrm_rows.push_back(rrm_row);
      if (is_delta) rrm_delta_rows.push_back(rrm_row);
      ++l;
    }
  }

  const auto& summary = report.at("summary");
  CHECK(rrm::overall_sparsity(dense_rows) ==
        doctest::Approx(summary.at("overall_sparsity_dense").get<double>())
            .epsilon(1e-9));
  CHECK(rrm::overall_sparsity(rrm_delta_rows) ==
        doctest::Approx(
            summary.at("overall_sparsity_rrm_deltas").get<double>())
            .epsilon(1e-9));
  const auto eta = rrm::speedup_ratio(dense_rows, rrm_rows);
  CHECK_FALSE(summary.at("speedup_ratio").at("infinite").get<bool>());
  CHECK(eta.value ==
        doctest::Approx(summary.at("speedup_ratio").at("value").get<double>())
            .epsilon(1e-9));
}

TEST_CASE("a single-epsilon sweep equals the plain run") {
  ScratchDir dir("sweep_single");
  rrm::cmd_gen_model({{2, 12, 12}, 5, 304, "sweep", (dir / "m.rrmm").string()});

  rrm::RunOptions base;
  base.model_path = (dir / "m.rrmm").string();
  base.frames.synthetic = rrm::parse_synthetic_spec(
      "kind=shifting-square,c=2,h=12,w=12,frames=8,motion=1,noise=0.02,seed=5");
  base.epsilon = 0.03;
  const Json single = rrm::cmd_run(base);

  rrm::SweepOptions sweep;
  sweep.base = base;
  sweep.epsilons = {0.03};
  const Json swept = rrm::cmd_sweep(sweep);
  REQUIRE(swept.at("runs").size() == 1);
  CHECK(swept.at("runs")[0].at("report").at("summary") == single.at("summary"));
  CHECK(swept.at("runs")[0].at("report").at("frames") == single.at("frames"));
}

TEST_CASE("sweeping thresholds never slows the model down") {
  ScratchDir dir("sweep_motone");
  rrm::cmd_gen_model({{2, 16, 16}, 5, 305, "sweep", (dir / "m.rrmm").string()});

  rrm::SweepOptions sweep;
  sweep.base.model_path = (dir / "m.rrmm").string();
  sweep.base.frames.synthetic = rrm::parse_synthetic_spec(
      "kind=shifting-square,c=2,h=16,w=16,frames=12,motion=1,noise=0.05,seed=6");
  sweep.base.oracle = true;
  sweep.epsilons = {0.01, 0.03, 0.05, 0.1};
  const Json report = rrm::cmd_sweep(sweep);

  double previous_eta = 0.0;
  double previous_err = -1.0;
  for (const auto& row : report.at("table")) {
    const double eta = row.at("speedup_ratio").at("value").get<double>();
    CHECK(eta >= previous_eta);
    previous_eta = eta;
    const double err = row.at("final_oracle_l2").get<double>();
    CHECK(err >= previous_err);
    previous_err = err;
  }
}

TEST_CASE("calibration fits injected exact-quartic pairs") {
  ScratchDir dir("cal_injected");
  std::vector<rrm::CalibrationPoint> points;
  for (int i = 0; i < 9; ++i) {
    const double x = 0.25 * i;
    points.push_back({x, 0.5 + 2.0 * x * x * x * x});
  }
  rrm::CalibrateOptions options;
  options.threshold = 0.75;
  options.out_path = (dir / "em.json").string();
  const Json result = rrm::cmd_calibrate(options, points);

  CHECK(result.at("mu")[0].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(result.at("mu")[4].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
  for (int k : {1, 2, 3}) {
    CHECK(std::abs(result.at("mu")[k].get<double>()) < 1e-6);
  }

  // Refitting the same data is bit-stable.
  const Json again = rrm::cmd_calibrate(options, points);
  CHECK(again.at("mu") == result.at("mu"));
}

TEST_CASE("exact-mode calibration measures a near-zero model") {
  ScratchDir dir("cal_exact");
  rrm::cmd_gen_model({{2, 10, 10}, 5, 306, "sweep", (dir / "m.rrmm").string()});

  rrm::CalibrateOptions options;
  options.model_path = (dir / "m.rrmm").string();
  options.frames.synthetic = rrm::parse_synthetic_spec(
      "kind=random-walk,c=2,h=10,w=10,frames=12,motion=0.05,seed=7");
  options.videos = 2;
  options.epsilon = 0.0;
  options.out_path = (dir / "em.json").string();

  // Nothing truncates, so the fitted model collapses to a near-zero constant.
  const Json fitted = rrm::cmd_calibrate(options);
  CHECK(fitted.at("calibration_points").size() == 24);
  for (const auto& mu : fitted.at("mu")) {
    CHECK(std::abs(mu.get<double>()) <= 1e-4);
  }
  for (const auto& p : fitted.at("calibration_points")) {
    CHECK(p[1].get<double>() <= 1e-4);
  }

  // With truncation enabled the same pipeline fits the full quartic.
  options.epsilon = 0.02;
  const Json quartic = rrm::cmd_calibrate(options);
  CHECK(quartic.at("calibration_points").size() == 24);
}
