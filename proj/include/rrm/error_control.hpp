#pragma once

#include <array>
#include <span>
#include <vector>

#include "rrm/layers.hpp"
#include "rrm/tensor.hpp"

namespace rrm {

struct CalibrationPoint {
  double accumulated_truncation = 0.0;  // e_t at the time of measurement
  double measured_error = 0.0;          // feature distance vs the dense run
};

// Degree-4 polynomial mapping accumulated truncated mass to predicted feature
// error, plus the trigger threshold. mu holds the coefficients in the plain
// e_t basis, constant term first; H(0) is recorded as fitted, sign included.
struct ErrorModel {
  std::array<double, 5> mu{};
  double threshold = 0.0;
  std::vector<CalibrationPoint> calibration_points;
  // e_t normalization used while solving the normal equations, kept for audit.
  double fit_mean = 0.0;
  double fit_scale = 1.0;

  double predict(double e_t) const;
};

// Running sum of per-layer truncated l2 norms since the last keyframe.
class ErrorAccumulator {
 public:
  double value() const { return e_t_; }
  void reset() { e_t_ = 0.0; }
  void accumulate(std::span<const double> per_layer_truncated_l2);

 private:
  double e_t_ = 0.0;
};

enum class Decision { Continue, ForceKeyframe };

// Least-squares degree-4 fit. Needs at least 5 points with 5 distinct e_t
// values; solved via normal equations on mean/scale-normalized e_t, then
// expanded back to plain-basis coefficients.
ErrorModel fit_error_model(std::span<const CalibrationPoint> points,
                           double threshold);

// ForceKeyframe iff H(e_t) exceeds the model threshold.
Decision predict_and_decide(const ErrorModel& model,
                            const ErrorAccumulator& acc);

enum class FeatureErrorMetric { L2, MaxAbs };

// Runs the delta pipeline with keyframes disabled next to a per-frame dense
// run and records (e_t, feature error) after every frame of every video.
std::vector<CalibrationPoint> calibrate(
    const NetworkModel& model, std::span<const std::vector<Tensor>> videos,
    float epsilon, FeatureErrorMetric metric = FeatureErrorMetric::L2);

}  // namespace rrm
