#pragma once

#include <span>
#include <string>
#include <string_view>

#include "frenetcp/copula_calibration.hpp"
#include "frenetcp/intervals_metrics.hpp"
#include "frenetcp/reliability_model.hpp"
#include "frenetcp/risk_discriminator.hpp"

namespace frenetcp {

// Flat JSON documents. Key names are part of the file format:
//   calibration: scenario, alpha, method, dt, q_s, q_d, n_d1, n_d2, beta
//   reliability: scenario, direction, segment, active_terms, a..z, fit_rmse,
//                x_min, x_max (plus step_begin, step_end, alpha, method)
//   profile:     scenario, n, mae_s, mae_d
// Parsers throw SchemaError (line 0, naming the offending key).

std::string serialize_calibration(const CalibrationResult& cal);
CalibrationResult parse_calibration(std::string_view text);

struct ReliabilityDocument {
  ReliabilityModel model;
  double alpha = 0.0;
  Method method = Method::CopulaShared;
};

std::string serialize_reliability(const ReliabilityDocument& doc);
ReliabilityDocument parse_reliability(std::string_view text);

struct ProfileDocument {
  ScenarioClass scenario = ScenarioClass::NormalDriving;
  DeviationProfile profile;
};

std::string serialize_profile(const ProfileDocument& doc);
ProfileDocument parse_profile(std::string_view text);

/// Numbers in CSV output: up to 10 significant digits, shortest form.
std::string format_number(double v);

inline constexpr std::string_view kMetricsCsvHeader =
    "scenario,alpha,method,avg_area_size,joint_coverage,n_test";
std::string metrics_csv_row(const MetricsReport& m);

inline constexpr std::string_view kCriticalCsvHeader =
    "scenario,alpha,method,r,c_s,c_d,critical_t_s,critical_t_d,critical_t_joint";
/// Absent critical points are written as empty fields.
std::string critical_csv_row(const CriticalPointReport& rep);

}  // namespace frenetcp
