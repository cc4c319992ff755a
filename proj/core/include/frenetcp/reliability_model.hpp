#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frenetcp/copula_calibration.hpp"
#include "frenetcp/data_model.hpp"
#include "frenetcp/nonconformity.hpp"

namespace frenetcp {

/// Which of the three curve families contribute to the reliability model:
///   P(x)  = a x^3 + b x^2 + c x + d
///   E(x)  = f exp(g x + h)
///   SD(x) = k m exp(-m x) / (exp(-m x) + z)^2
struct TermSet {
  bool polynomial = false;
  bool exponential = false;
  bool sigmoid_derivative = false;

  std::size_t free_parameters() const {
    return (polynomial ? 4 : 0) + (exponential ? 3 : 0) + (sigmoid_derivative ? 3 : 0);
  }
  /// e.g. "P+SD+E"; the reverse of parse_term_set.
  std::string to_string() const;
  friend bool operator==(const TermSet&, const TermSet&) = default;
};

std::optional<TermSet> parse_term_set(std::string_view text);

struct ReliabilityCoefficients {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // polynomial
  double f = 0.0, g = 0.0, h = 0.0;           // exponential
  double k = 0.0, m = 0.0, z = 0.0;           // sigmoid derivative, z > 0 when active
  TermSet active;
};

struct RmValue {
  double value = 0.0;
  bool out_of_domain = false;  // an exp argument was clamped, or x left the fit domain
};

inline constexpr double kExpArgumentLimit = 700.0;

/// Sum of the active terms at x. Exponent arguments beyond +-700 are clamped
/// and flagged.
RmValue rm_eval(const ReliabilityCoefficients& coeffs, double x);

enum class Segment { Whole, LaneChange1, LaneChange2 };

std::string_view to_string(Segment segment);
std::optional<Segment> parse_segment(std::string_view name);

/// Fixed term set per scenario/segment: normal driving P+SD, lane change
/// phase 1 P+SD+E, phase 2 P+SD, intersection and roundabout P+E. Lane
/// change has no whole-range model of its own; P+SD+E is returned for it.
TermSet term_set_for(ScenarioClass scenario, Segment segment);

struct ReliabilityModel {
  ScenarioClass scenario = ScenarioClass::NormalDriving;
  Direction direction = Direction::Longitudinal;
  Segment segment = Segment::Whole;
  ReliabilityCoefficients coeffs;
  double fit_rmse = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  // Horizon steps [step_begin, step_end) whose pairs trained this model.
  std::size_t step_begin = 0;
  std::size_t step_end = 0;

  /// Evaluates the curve; x outside [x_min, x_max] is clamped to the
  /// boundary and flagged.
  RmValue predict(double x) const;
};

/// Per-step mean over records of the min-over-modes absolute error.
struct DeviationProfile {
  std::vector<double> mae_s;
  std::vector<double> mae_d;
  std::size_t n = 0;

  std::size_t horizon() const noexcept { return mae_s.size(); }
  const std::vector<double>& get(Direction dir) const {
    return dir == Direction::Longitudinal ? mae_s : mae_d;
  }
};

/// Throws EmptySet on no records, HorizonMismatch on mixed horizons.
DeviationProfile compute_deviation_profile(std::span<const ScenarioRecord> records);

struct TrainingPoint {
  double x = 0.0;  // deviation (MAE) at a step
  double y = 0.0;  // calibrated half-width at the same step
};

struct TrainingData {
  std::vector<TrainingPoint> points;  // one per step, in step order
  bool degenerate = false;            // every x identical, nothing to fit against
};

/// Pairs (mae[t], q[t]) for each step. Throws HorizonMismatch.
TrainingData pair_training_data(const DeviationProfile& profile, const CalibrationResult& cal,
                                Direction dir);

struct FitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  /// Additional starting point tried alongside the default ones.
  std::optional<ReliabilityCoefficients> warm_start;
};

struct FitReport {
  ReliabilityCoefficients coeffs;
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective (half the sum of squared residuals) after every accepted step
  /// of the winning start, beginning with its initial value.
  std::vector<double> objective_history;
};

/// Damped Gauss-Newton least squares over the active coefficients. Throws
/// InsufficientPoints (fewer than twice the free parameters, or degenerate
/// x) and FitDiverged (no start reduced the residual).
FitReport fit_coefficients(std::span<const TrainingPoint> points, TermSet terms,
                           const FitOptions& options = {});

ReliabilityModel fit_rm(std::span<const TrainingPoint> points, ScenarioClass scenario,
                        Direction direction, Segment segment = Segment::Whole,
                        const FitOptions& options = {});

/// Last index of the first lane-change phase: the split minimising the sum
/// of the two segments' straight-line least-squares residuals. Each side
/// keeps at least `min_first` / `min_second` points; ties go to the earlier
/// split. Throws InsufficientPoints when no split satisfies both minima.
std::size_t lane_change_changepoint(std::span<const TrainingPoint> points, std::size_t min_first,
                                    std::size_t min_second);

/// One model per segment for the scenario: lane change gets the two phase
/// models split at lane_change_changepoint, every other class one whole-range
/// model.
std::vector<ReliabilityModel> fit_scenario_models(const TrainingData& data,
                                                  ScenarioClass scenario, Direction direction,
                                                  const FitOptions& options = {});

/// Bound predicted by the per-segment models at each step of the profile.
std::vector<double> predicted_bounds(std::span<const ReliabilityModel> models,
                                     const DeviationProfile& profile, Direction direction);

}  // namespace frenetcp
