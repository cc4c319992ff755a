#pragma once

#include <optional>
#include <span>
#include <vector>

#include "frenetcp/copula_calibration.hpp"
#include "frenetcp/reliability_model.hpp"

namespace frenetcp {

enum class RiskSource { CalibratedBound, RmPredictedBound };

struct RiskConfig {
  double c_s = 1.0;
  double c_d = 1.0;
  double threshold_r = 0.8;
  RiskSource source = RiskSource::CalibratedBound;

  /// Throws std::invalid_argument unless c_s, c_d > 0 and r in (0, 1).
  void validate() const;
};

/// Logistic risk 1 / (1 + c exp(-width)) of a single direction.
double directional_risk(double width, double c);

/// Joint risk: the larger of the two directional risks.
double risk_at(double s_width, double d_width, const RiskConfig& cfg);

/// Time (step index * dt) of the first step whose directional risk exceeds
/// r, or nullopt when the whole horizon stays at or below it.
std::optional<double> directional_critical_point(std::span<const double> widths, double c,
                                                 double r, double dt);

struct CriticalPointReport {
  ScenarioClass scenario = ScenarioClass::NormalDriving;
  Method method = Method::CopulaShared;
  double alpha = 0.0;
  RiskConfig config;
  std::optional<double> critical_t_s;
  std::optional<double> critical_t_d;
  std::optional<double> critical_t_joint;
  std::vector<double> risk_series;
};

/// Critical points from explicit per-step widths.
CriticalPointReport critical_point_from_widths(std::span<const double> s_widths,
                                               std::span<const double> d_widths, double dt,
                                               const RiskConfig& cfg);

/// Critical points from the calibrated half-widths. `cfg.source` must be
/// CalibratedBound; use the overload below for reliability-model bounds.
CriticalPointReport critical_point(const CalibrationResult& cal, const RiskConfig& cfg);

/// Widths come from the reliability models evaluated on the deviation
/// profile when cfg.source is RmPredictedBound, otherwise from `cal`.
CriticalPointReport critical_point(const CalibrationResult& cal, const RiskConfig& cfg,
                                   const DeviationProfile& profile,
                                   std::span<const ReliabilityModel> models);

}  // namespace frenetcp
