#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rrm/engine.hpp"
#include "rrm/error_control.hpp"
#include "rrm/frame_source.hpp"
#include "rrm/model_zoo.hpp"

using rrm::CalibrationPoint;
using rrm::Decision;
using rrm::ErrorAccumulator;
using rrm::ErrorModel;

namespace {

std::vector<CalibrationPoint> quartic_points(const std::array<double, 5>& mu,
                                             std::size_t count, double lo,
                                             double hi, double noise_sigma,
                                             std::uint64_t seed) {
  oracle::Rng rng(seed);
  std::vector<CalibrationPoint> points;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(count - 1);
    double y = 0.0;
    for (std::size_t k = mu.size(); k-- > 0;) {
      y = y * x + mu[k];
    }
    if (noise_sigma > 0.0) {
      // Box-Muller on deterministic uniforms.
      const double u1 = std::max(rng.unit(), 1e-12);
      const double u2 = rng.unit();
      y += noise_sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
    }
    points.push_back({x, y});
  }
  return points;
}

}  // namespace

TEST_CASE("accumulator sums per-layer norms across frames") {
  ErrorAccumulator acc;
  const std::vector<double> frame{0.1, 0.2};
  acc.accumulate(frame);
  acc.accumulate(frame);
  CHECK(acc.value() == doctest::Approx(0.6).epsilon(1e-12));
  acc.reset();
  CHECK(acc.value() == 0.0);
}

TEST_CASE("accumulator rejects negative norms") {
  ErrorAccumulator acc;
  const std::vector<double> bad{0.1, -0.2};
  CHECK_THROWS_AS(acc.accumulate(bad), rrm::InvalidArgument);
}

TEST_CASE("exact mode accumulates nothing") {
  const auto model = rrm::make_sweep_model({2, 12, 12}, 80);
  rrm::SyntheticSpec spec;
  spec.kind = rrm::SyntheticSpec::Kind::RandomWalk;
  spec.shape = {2, 12, 12};
  spec.frames = 10;
  spec.motion = 0.05;
  spec.seed = 81;
  const auto frames = rrm::generate_video(spec);
  rrm::RunConfig config;  // epsilon 0
  const auto run = rrm::process_sequence(model, frames, config);
  for (double e : run.stats.e_t_trace) {
    CHECK(e == 0.0);
  }
}

TEST_CASE("e_t matches recomputation from the per-layer logs") {
  const auto model = rrm::make_sweep_model({2, 12, 12}, 82);
  rrm::SyntheticSpec spec;
  spec.kind = rrm::SyntheticSpec::Kind::RandomWalk;
  spec.shape = {2, 12, 12};
  spec.frames = 20;
  spec.motion = 0.05;
  spec.seed = 83;
  const auto frames = rrm::generate_video(spec);
  rrm::RunConfig config;
  config.epsilon = 0.02f;
  const auto run = rrm::process_sequence(model, frames, config);

  double replayed = 0.0;
  for (std::size_t t = 0; t < run.frames.size(); ++t) {
    for (const auto& row : run.frames[t].per_layer) {
      if (run.frames[t].mode == rrm::FrameMode::Delta) {
        replayed += row.truncated_l2;
      }
    }
    CHECK(run.stats.e_t_trace[t] == doctest::Approx(replayed).epsilon(1e-6));
  }
  CHECK(replayed > 0.0);
}

TEST_CASE("an exact quartic is recovered to coefficient precision") {
  const std::array<double, 5> truth{0.5, 0.0, 0.0, 0.0, 2.0};
  const auto points = quartic_points(truth, 12, 0.0, 2.0, 0.0, 84);
  const ErrorModel model = rrm::fit_error_model(points, 1.0);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] == 0.0) {
      CHECK(std::abs(model.mu[k]) < 1e-6);
    } else {
      CHECK(model.mu[k] == doctest::Approx(truth[k]).epsilon(1e-6));
    }
  }
  CHECK(model.calibration_points.size() == points.size());
}

TEST_CASE("noisy quartic fit stays close to the data and the oracle fit") {
  const std::array<double, 5> truth{0.1, -0.3, 0.8, -0.2, 1.5};
  const auto points = quartic_points(truth, 200, 0.0, 1.5, 1e-3, 85);
  const ErrorModel model = rrm::fit_error_model(points, 1.0);

  double rss = 0.0;
  for (const auto& p : points) {
    const double r = model.predict(p.accumulated_truncation) - p.measured_error;
    rss += r * r;
  }
  const double rms = std::sqrt(rss / static_cast<double>(points.size()));
  CHECK(rms <= 2e-3);

  std::vector<double> xs, ys;
  for (const auto& p : points) {
    xs.push_back(p.accumulated_truncation);
    ys.push_back(p.measured_error);
  }
  const auto reference = oracle::polyfit(xs, ys, 4);
  for (const auto& p : points) {
    double expected = 0.0;
    for (std::size_t k = reference.size(); k-- > 0;) {
      expected = expected * p.accumulated_truncation + reference[k];
    }
    CHECK(model.predict(p.accumulated_truncation) ==
          doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("five points are interpolated exactly") {
  // Degree-1 data: the quartic passes through collinear points exactly.
  std::vector<CalibrationPoint> points;
  for (int i = 0; i < 5; ++i) {
    const double x = 0.2 * i;
    points.push_back({x, 3.0 * x + 0.25});
  }
  const ErrorModel model = rrm::fit_error_model(points, 1.0);
  for (const auto& p : points) {
    CHECK(model.predict(p.accumulated_truncation) ==
          doctest::Approx(p.measured_error).epsilon(1e-6));
  }
}

TEST_CASE("underdetermined fits are rejected, naming the minimum") {
  std::vector<CalibrationPoint> points{{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0},
                                       {3.0, 3.0}};
  CHECK_THROWS_WITH_AS(rrm::fit_error_model(points, 1.0),
                       doctest::Contains("5"), rrm::InvalidArgument);
  // Many points but too few distinct e_t values.
  std::vector<CalibrationPoint> repeated;
  for (int i = 0; i < 10; ++i) {
    repeated.push_back({static_cast<double>(i % 3), 1.0});
  }
  CHECK_THROWS_AS(rrm::fit_error_model(repeated, 1.0), rrm::InvalidArgument);
}

TEST_CASE("decision compares the prediction against the threshold") {
  ErrorModel model;
  model.mu = {0.1, 1.0, 0.0, 0.0, 0.0};  // H(e) = 0.1 + e
  model.threshold = 0.5;
  ErrorAccumulator acc;
  CHECK(rrm::predict_and_decide(model, acc) == Decision::Continue);

  const std::vector<double> norms{0.6};
  acc.accumulate(norms);
  CHECK(rrm::predict_and_decide(model, acc) == Decision::ForceKeyframe);

  model.threshold = 0.0;  // degenerate: any positive prediction forces
  ErrorAccumulator zero;
  CHECK(rrm::predict_and_decide(model, zero) == Decision::ForceKeyframe);
}

TEST_CASE("calibration in exact mode yields only near-zero pairs") {
  const auto model = rrm::make_sweep_model({2, 12, 12}, 86);
  rrm::SyntheticSpec spec;
  spec.kind = rrm::SyntheticSpec::Kind::RandomWalk;
  spec.shape = {2, 12, 12};
  spec.frames = 15;
  spec.motion = 0.05;
  spec.seed = 87;
  const std::vector<std::vector<rrm::Tensor>> videos{rrm::generate_video(spec)};
  const auto points = rrm::calibrate(model, videos, 0.0f);
  REQUIRE(points.size() == 15);
  for (const auto& p : points) {
    CHECK(p.accumulated_truncation == 0.0);
    CHECK(p.measured_error <= 1e-4);
  }
}

TEST_CASE("calibration produces one pair per frame per video") {
  const auto model = rrm::make_sweep_model({2, 10, 10}, 88);
  rrm::SyntheticSpec spec;
  spec.kind = rrm::SyntheticSpec::Kind::RandomWalk;
  spec.shape = {2, 10, 10};
  spec.frames = 50;
  spec.motion = 0.04;
  spec.seed = 89;
  std::vector<std::vector<rrm::Tensor>> videos;
  videos.push_back(rrm::generate_video(spec));
  spec.seed = 90;
  videos.push_back(rrm::generate_video(spec));
  const auto points = rrm::calibrate(model, videos, 0.03f);
  CHECK(points.size() == 100);
}

TEST_CASE("measured error grows with accumulated truncation") {
  const auto model = rrm::make_sweep_model({2, 12, 12}, 91);
  rrm::SyntheticSpec spec;
  spec.kind = rrm::SyntheticSpec::Kind::RandomWalk;
  spec.shape = {2, 12, 12};
  spec.frames = 60;
  spec.motion = 0.04;
  spec.seed = 92;
  const std::vector<std::vector<rrm::Tensor>> videos{rrm::generate_video(spec)};
  const auto points = rrm::calibrate(model, videos, 0.03f);

  std::vector<double> e_t, err;
  for (const auto& p : points) {
    e_t.push_back(p.accumulated_truncation);
    err.push_back(p.measured_error);
  }
  CHECK(oracle::spearman(e_t, err) > 0.8);
}
