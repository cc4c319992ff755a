#include "frenetcp/intervals_metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "frenetcp/errors.hpp"

namespace frenetcp {

bool FrenetBox::contains(FrenetPoint p) const {
  return std::abs(p.s - center.s) <= half_s && std::abs(p.d - center.d) <= half_d;
}

IntervalBand::IntervalBand(std::size_t modes, std::size_t horizon, std::vector<FrenetBox> boxes)
    : k_(modes), t_f_(horizon), boxes_(std::move(boxes)) {
  if (boxes_.size() != k_ * t_f_) {
    throw std::invalid_argument(
        fmt::format("band needs {} boxes, got {}", k_ * t_f_, boxes_.size()));
  }
}

IntervalBand build_band(const MultimodalForecast& forecast, const CalibrationResult& cal) {
  const std::size_t t_f = forecast.horizon();
  if (cal.horizon() != t_f) {
    throw HorizonMismatch(
        fmt::format("forecast horizon {} but calibration horizon {}", t_f, cal.horizon()));
  }
  std::vector<FrenetBox> boxes;
  boxes.reserve(forecast.modes() * t_f);
  for (std::size_t k = 0; k < forecast.modes(); ++k) {
    for (std::size_t t = 0; t < t_f; ++t) {
      boxes.push_back({forecast.at(k, t), cal.quantiles.q_s[t], cal.quantiles.q_d[t]});
    }
  }
  return IntervalBand(forecast.modes(), t_f, std::move(boxes));
}

bool jointly_covered(const ScenarioRecord& r, const QuantileVector& q) {
  const MultimodalForecast& f = r.forecast;
  for (std::size_t k = 0; k < f.modes(); ++k) {
    bool all_steps = true;
    for (std::size_t t = 0; t < f.horizon() && all_steps; ++t) {
      all_steps = std::abs(r.truth[t].s - f.at(k, t).s) <= q.q_s[t] &&
                  std::abs(r.truth[t].d - f.at(k, t).d) <= q.q_d[t];
    }
    if (all_steps) return true;
  }
  return false;
}

double joint_coverage(std::span<const ScenarioRecord> records, const CalibrationResult& cal) {
  if (records.empty()) throw EmptyTestSet("joint coverage of an empty test set");
  std::size_t covered = 0;
  for (const ScenarioRecord& r : records) {
    if (r.horizon() != cal.horizon()) {
      throw HorizonMismatch(fmt::format("record '{}' has horizon {}, calibration has {}", r.id,
                                        r.horizon(), cal.horizon()));
    }
    if (jointly_covered(r, cal.quantiles)) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(records.size());
}

double avg_area_size(const CalibrationResult& cal, std::size_t k_modes) {
  const std::size_t t_f = cal.horizon();
  if (t_f == 0 || k_modes == 0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < k_modes; ++k) {
    for (std::size_t t = 0; t < t_f; ++t) {
      total += (2.0 * cal.quantiles.q_s[t]) * (2.0 * cal.quantiles.q_d[t]);
    }
  }
  return total / static_cast<double>(k_modes * t_f);
}

MetricsReport evaluate(std::span<const ScenarioRecord> test, const CalibrationResult& cal) {
  MetricsReport m;
  m.scenario = cal.scenario;
  m.method = cal.level.method;
  m.alpha = cal.level.alpha;
  m.avg_area_size = avg_area_size(cal, test.empty() ? 1 : test.front().forecast.modes());
  m.joint_coverage = joint_coverage(test, cal);
  m.n_test = test.size();
  return m;
}

}  // namespace frenetcp
