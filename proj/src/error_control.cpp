#include "rrm/error_control.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "rrm/engine.hpp"

namespace rrm {

double ErrorModel::predict(double e_t) const {
  double acc = 0.0;
  for (std::size_t k = mu.size(); k-- > 0;) {
    acc = acc * e_t + mu[k];
  }
  return acc;
}

void ErrorAccumulator::accumulate(std::span<const double> per_layer_truncated_l2) {
  for (double v : per_layer_truncated_l2) {
    if (!(v >= 0.0)) {
      throw InvalidArgument("accumulate: truncated l2 norms must be >= 0");
    }
    e_t_ += v;
  }
}

namespace {

constexpr std::size_t kCoeffs = 5;

// Gaussian elimination with partial pivoting on the 5x5 normal equations.
std::array<double, kCoeffs> solve_normal_equations(
    std::array<std::array<double, kCoeffs + 1>, kCoeffs>& m) {
  for (std::size_t col = 0; col < kCoeffs; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < kCoeffs; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    std::swap(m[col], m[pivot]);
    if (m[col][col] == 0.0) {
      throw InvalidArgument("fit_error_model: singular normal equations");
    }
    for (std::size_t r = col + 1; r < kCoeffs; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= kCoeffs; ++c) {
        m[r][c] -= f * m[col][c];
      }
    }
  }
  std::array<double, kCoeffs> x{};
  for (std::size_t row = kCoeffs; row-- > 0;) {
    double acc = m[row][kCoeffs];
    for (std::size_t c = row + 1; c < kCoeffs; ++c) {
      acc -= m[row][c] * x[c];
    }
    x[row] = acc / m[row][row];
  }
  return x;
}

// Rewrites sum_k c_k ((e - mean)/scale)^k as plain-basis coefficients of e.
std::array<double, kCoeffs> expand_to_plain_basis(
    const std::array<double, kCoeffs>& c, double mean, double scale) {
  std::array<double, kCoeffs> out{};
  std::array<double, kCoeffs> power{};  // ((e - mean)/scale)^k so far
  power[0] = 1.0;
  std::size_t degree = 0;
  const double a0 = -mean / scale;
  const double a1 = 1.0 / scale;
  for (std::size_t k = 0; k < kCoeffs; ++k) {
    for (std::size_t j = 0; j <= degree; ++j) {
      out[j] += c[k] * power[j];
    }
    if (k + 1 < kCoeffs) {
      std::array<double, kCoeffs> next{};
      for (std::size_t j = 0; j <= degree; ++j) {
        next[j] += power[j] * a0;
        next[j + 1] += power[j] * a1;
      }
      power = next;
      ++degree;
    }
  }
  return out;
}

}  // namespace

ErrorModel fit_error_model(std::span<const CalibrationPoint> points,
                           double threshold) {
  std::set<double> distinct;
  for (const auto& p : points) {
    distinct.insert(p.accumulated_truncation);
  }
  if (points.size() < kCoeffs || distinct.size() < kCoeffs) {
    throw InvalidArgument(
        "fit_error_model: need at least 5 points with 5 distinct accumulated "
        "truncation values, got " +
        std::to_string(points.size()) + " points / " +
        std::to_string(distinct.size()) + " distinct");
  }

  double mean = 0.0;
  for (const auto& p : points) mean += p.accumulated_truncation;
  mean /= static_cast<double>(points.size());
  double var = 0.0;
  for (const auto& p : points) {
    const double d = p.accumulated_truncation - mean;
    var += d * d;
  }
  const double scale = std::sqrt(var / static_cast<double>(points.size()));

  std::array<std::array<double, kCoeffs + 1>, kCoeffs> m{};
  for (const auto& p : points) {
    const double z = (p.accumulated_truncation - mean) / scale;
    std::array<double, kCoeffs> zp{};
    zp[0] = 1.0;
    for (std::size_t k = 1; k < kCoeffs; ++k) zp[k] = zp[k - 1] * z;
    for (std::size_t r = 0; r < kCoeffs; ++r) {
      for (std::size_t c = 0; c < kCoeffs; ++c) {
        m[r][c] += zp[r] * zp[c];
      }
      m[r][kCoeffs] += zp[r] * p.measured_error;
    }
  }

  const auto normalized = solve_normal_equations(m);

  ErrorModel model;
  model.mu = expand_to_plain_basis(normalized, mean, scale);
  model.threshold = threshold;
  model.calibration_points.assign(points.begin(), points.end());
  model.fit_mean = mean;
  model.fit_scale = scale;
  return model;
}

Decision predict_and_decide(const ErrorModel& model,
                            const ErrorAccumulator& acc) {
  return model.predict(acc.value()) > model.threshold
             ? Decision::ForceKeyframe
             : Decision::Continue;
}

std::vector<CalibrationPoint> calibrate(
    const NetworkModel& model, std::span<const std::vector<Tensor>> videos,
    float epsilon, FeatureErrorMetric metric) {
  if (videos.empty()) {
    throw InvalidArgument("calibrate: need at least one video");
  }
  std::vector<CalibrationPoint> points;
  RunConfig config;
  config.epsilon = epsilon;
  config.oracle = true;  // dense run alongside, keyframes stay disabled
  for (const auto& video : videos) {
    const SequenceResult run = process_sequence(model, video, config);
    const auto& errors = metric == FeatureErrorMetric::L2
                             ? run.stats.oracle_l2
                             : run.stats.oracle_max_abs;
    for (std::size_t t = 0; t < errors.size(); ++t) {
      points.push_back({run.stats.e_t_trace[t], errors[t]});
    }
  }
  return points;
}

}  // namespace rrm
