#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "frenetcp/data_model.hpp"

namespace frenetcp {

struct StepDependence {
  enum class Kind { Independent, Comonotone, Ar1 };
  Kind kind = Kind::Independent;
  double rho = 0.0;  // used by Ar1, in [0, 1)

  static StepDependence independent() { return {Kind::Independent, 0.0}; }
  static StepDependence comonotone() { return {Kind::Comonotone, 0.0}; }
  static StepDependence ar1(double rho) { return {Kind::Ar1, rho}; }
};

/// Parses "independent", "comonotone" or "ar1:<rho>".
StepDependence parse_step_dependence(const std::string& text);
std::string to_string(const StepDependence& dep);

struct SynthConfig {
  ScenarioClass scenario = ScenarioClass::NormalDriving;
  std::size_t n_records = 100;
  std::size_t modes = 1;
  std::size_t horizon = 40;  // 8 s at 5 Hz
  double dt = 0.2;
  double noise_scale_s = 0.12;
  double noise_scale_d = 0.05;
  double error_growth = 1.06;  // per-step multiplier of the noise standard deviation
  StepDependence dependence = StepDependence::ar1(0.8);
  std::uint64_t seed = 0;
  /// Shifts every mode laterally by a ramp reaching intent_offset at the last
  /// step: all modes keep the lane while the truth leaves it.
  bool wrong_intent = false;
  double intent_offset = 3.5;
  /// Standard deviation (seconds) of the true lane-change timing around the
  /// forecast's nominal manoeuvre time. Lane change only; treated as lateral
  /// noise, so it is off when noise_scale_d is zero.
  double lane_change_timing_sd = 0.6;

  /// Noise scales and dependence typical of each class; other fields default.
  static SynthConfig defaults_for(ScenarioClass scenario);

  /// Throws std::invalid_argument on zero counts, non-positive dt, negative
  /// scales, growth < 1 or rho outside [0, 1).
  void validate() const;
};

/// Route used by every record of the class: straight road (normal driving,
/// lane change), straight approach into a left quarter arc (intersection),
/// or a long circular arc (roundabout).
ReferenceRoute route_template(ScenarioClass scenario, double min_length);

/// Deterministic in the config (including seed). Truth follows the route
/// template; every mode is the truth plus Gaussian noise with standard
/// deviation scale * growth^t and the configured cross-step dependence.
std::vector<ScenarioRecord> generate(const SynthConfig& cfg);

}  // namespace frenetcp
