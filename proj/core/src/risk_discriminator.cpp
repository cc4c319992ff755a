#include "frenetcp/risk_discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "frenetcp/errors.hpp"

namespace frenetcp {

void RiskConfig::validate() const {
  if (!(c_s > 0.0) || !std::isfinite(c_s)) {
    throw std::invalid_argument(fmt::format("c_s must be positive, got {}", c_s));
  }
  if (!(c_d > 0.0) || !std::isfinite(c_d)) {
    throw std::invalid_argument(fmt::format("c_d must be positive, got {}", c_d));
  }
  if (!(threshold_r > 0.0 && threshold_r < 1.0)) {
    throw std::invalid_argument(fmt::format("risk threshold must lie in (0, 1), got {}", threshold_r));
  }
}

// Past width ~37 the quotient rounds to 1.0; hold it one ulp below.
double directional_risk(double width, double c) {
  return std::min(1.0 / (1.0 + c * std::exp(-width)), std::nextafter(1.0, 0.0));
}

double risk_at(double s_width, double d_width, const RiskConfig& cfg) {
  return std::max(directional_risk(s_width, cfg.c_s), directional_risk(d_width, cfg.c_d));
}

std::optional<double> directional_critical_point(std::span<const double> widths, double c,
                                                 double r, double dt) {
  for (std::size_t t = 0; t < widths.size(); ++t) {
    if (directional_risk(widths[t], c) > r) return static_cast<double>(t) * dt;
  }
  return std::nullopt;
}

CriticalPointReport critical_point_from_widths(std::span<const double> s_widths,
                                               std::span<const double> d_widths, double dt,
                                               const RiskConfig& cfg) {
  cfg.validate();
  if (s_widths.size() != d_widths.size()) {
    throw HorizonMismatch(fmt::format("{} longitudinal widths but {} lateral widths",
                                      s_widths.size(), d_widths.size()));
  }
  CriticalPointReport rep;
  rep.config = cfg;
  rep.critical_t_s = directional_critical_point(s_widths, cfg.c_s, cfg.threshold_r, dt);
  rep.critical_t_d = directional_critical_point(d_widths, cfg.c_d, cfg.threshold_r, dt);
  if (rep.critical_t_s && rep.critical_t_d) {
    rep.critical_t_joint = std::min(*rep.critical_t_s, *rep.critical_t_d);
  } else if (rep.critical_t_s) {
    rep.critical_t_joint = rep.critical_t_s;
  } else {
    rep.critical_t_joint = rep.critical_t_d;
  }
  rep.risk_series.reserve(s_widths.size());
  for (std::size_t t = 0; t < s_widths.size(); ++t) {
    rep.risk_series.push_back(risk_at(s_widths[t], d_widths[t], cfg));
  }
  return rep;
}

namespace {

void label(CriticalPointReport& rep, const CalibrationResult& cal) {
  rep.scenario = cal.scenario;
  rep.method = cal.level.method;
  rep.alpha = cal.level.alpha;
}

}  // namespace

CriticalPointReport critical_point(const CalibrationResult& cal, const RiskConfig& cfg) {
  if (cfg.source == RiskSource::RmPredictedBound) {
    throw std::invalid_argument("reliability-model risk source needs a profile and models");
  }
  CriticalPointReport rep =
      critical_point_from_widths(cal.quantiles.q_s, cal.quantiles.q_d, cal.dt, cfg);
  label(rep, cal);
  return rep;
}

CriticalPointReport critical_point(const CalibrationResult& cal, const RiskConfig& cfg,
                                   const DeviationProfile& profile,
                                   std::span<const ReliabilityModel> models) {
  if (cfg.source == RiskSource::CalibratedBound) return critical_point(cal, cfg);
  const auto s = predicted_bounds(models, profile, Direction::Longitudinal);
  const auto d = predicted_bounds(models, profile, Direction::Lateral);
  CriticalPointReport rep = critical_point_from_widths(s, d, cal.dt, cfg);
  label(rep, cal);
  return rep;
}

}  // namespace frenetcp
