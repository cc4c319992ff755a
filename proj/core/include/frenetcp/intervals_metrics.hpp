#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "frenetcp/copula_calibration.hpp"
#include "frenetcp/data_model.hpp"

namespace frenetcp {

/// Axis-aligned rectangle in Frenet space.
struct FrenetBox {
  FrenetPoint center;
  double half_s = 0.0;
  double half_d = 0.0;

  double s_min() const { return center.s - half_s; }
  double s_max() const { return center.s + half_s; }
  double d_min() const { return center.d - half_d; }
  double d_max() const { return center.d + half_d; }
  bool contains(FrenetPoint p) const;
};

/// K x T_f rectangles, mode-major.
class IntervalBand {
 public:
  IntervalBand(std::size_t modes, std::size_t horizon, std::vector<FrenetBox> boxes);

  std::size_t modes() const noexcept { return k_; }
  std::size_t horizon() const noexcept { return t_f_; }
  const FrenetBox& at(std::size_t mode, std::size_t step) const { return boxes_[mode * t_f_ + step]; }

 private:
  std::size_t k_;
  std::size_t t_f_;
  std::vector<FrenetBox> boxes_;
};

/// Throws HorizonMismatch when the forecast and calibration horizons differ.
IntervalBand build_band(const MultimodalForecast& forecast, const CalibrationResult& cal);

/// True when a single mode's band contains the truth at every step.
bool jointly_covered(const ScenarioRecord& record, const QuantileVector& q);

/// Mean of jointly_covered over the records. Throws EmptyTestSet and
/// HorizonMismatch.
double joint_coverage(std::span<const ScenarioRecord> records, const CalibrationResult& cal);

/// Mean over steps of (2 q_s) (2 q_d); the same for every mode.
double avg_area_size(const CalibrationResult& cal, std::size_t k_modes = 1);

struct MetricsReport {
  ScenarioClass scenario = ScenarioClass::NormalDriving;
  Method method = Method::CopulaShared;
  double alpha = 0.0;
  double avg_area_size = 0.0;
  double joint_coverage = 0.0;
  std::size_t n_test = 0;
};

MetricsReport evaluate(std::span<const ScenarioRecord> test, const CalibrationResult& cal);

}  // namespace frenetcp
