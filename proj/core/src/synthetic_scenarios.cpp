#include "frenetcp/synthetic_scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace frenetcp {

StepDependence parse_step_dependence(const std::string& text) {
  if (text == "independent") return StepDependence::independent();
  if (text == "comonotone") return StepDependence::comonotone();
  if (text.rfind("ar1:", 0) == 0) {
    std::size_t used = 0;
    const std::string num = text.substr(4);
    double rho = 0.0;
    try {
      rho = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == num.size() && !num.empty() && rho >= 0.0 && rho < 1.0) {
      return StepDependence::ar1(rho);
    }
  }
  throw std::invalid_argument(fmt::format(
      "step dependence must be independent, comonotone or ar1:<rho in [0,1)>, got '{}'", text));
}

std::string to_string(const StepDependence& dep) {
  switch (dep.kind) {
    case StepDependence::Kind::Independent: return "independent";
    case StepDependence::Kind::Comonotone: return "comonotone";
    case StepDependence::Kind::Ar1: return fmt::format("ar1:{}", dep.rho);
  }
  return "independent";
}

SynthConfig SynthConfig::defaults_for(ScenarioClass scenario) {
  SynthConfig cfg;
  cfg.scenario = scenario;
  switch (scenario) {
    case ScenarioClass::NormalDriving:
      cfg.noise_scale_s = 0.12;
      cfg.noise_scale_d = 0.05;
      break;
    case ScenarioClass::LaneChange:
      cfg.noise_scale_s = 0.15;
      cfg.noise_scale_d = 0.06;
      break;
    case ScenarioClass::Roundabout:
      cfg.noise_scale_s = 0.2;
      cfg.noise_scale_d = 0.1;
      break;
    case ScenarioClass::Intersection:
      cfg.noise_scale_s = 0.36;
      cfg.noise_scale_d = 0.15;
      break;
  }
  return cfg;
}

void SynthConfig::validate() const {
  if (n_records == 0 || modes == 0 || horizon == 0) {
    throw std::invalid_argument("record, mode and horizon counts must be positive");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument(fmt::format("dt must be positive, got {}", dt));
  }
  if (!(noise_scale_s >= 0.0) || !(noise_scale_d >= 0.0)) {
    throw std::invalid_argument("noise scales must be non-negative");
  }
  if (!(error_growth >= 1.0) || !std::isfinite(error_growth)) {
    throw std::invalid_argument(fmt::format("error growth must be >= 1, got {}", error_growth));
  }
  if (dependence.kind == StepDependence::Kind::Ar1 &&
      !(dependence.rho >= 0.0 && dependence.rho < 1.0)) {
    throw std::invalid_argument(fmt::format("ar1 rho must lie in [0, 1), got {}", dependence.rho));
  }
  if (!(lane_change_timing_sd >= 0.0) || !std::isfinite(intent_offset)) {
    throw std::invalid_argument("lane change timing sd and intent offset must be finite, sd >= 0");
  }
}

namespace {

constexpr double kStartS = 20.0;
constexpr double kLaneWidth = 3.5;
constexpr double kLaneChangeTau = 0.5;

double speed_for(ScenarioClass scenario) {
  switch (scenario) {
    case ScenarioClass::NormalDriving: return 12.0;
    case ScenarioClass::LaneChange: return 12.0;
    case ScenarioClass::Intersection: return 8.0;
    case ScenarioClass::Roundabout: return 7.0;
  }
  return 10.0;
}

void append_arc(std::vector<PlanarPoint>& pts, PlanarPoint center, double radius, double from,
                double to, double max_step) {
  const double sweep = to - from;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(sweep) * radius / max_step));
  for (std::size_t i = 1; i <= n; ++i) {
    const double a = from + sweep * static_cast<double>(i) / static_cast<double>(n);
    pts.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

ReferenceRoute route_template(ScenarioClass scenario, double min_length) {
  using std::numbers::pi;
  std::vector<PlanarPoint> pts;
  switch (scenario) {
    case ScenarioClass::NormalDriving:
    case ScenarioClass::LaneChange:
      pts = {{0.0, 0.0}, {min_length, 0.0}};
      break;
    case ScenarioClass::Intersection: {
      // 30 m approach, left quarter arc of radius 15 m, then the exit leg.
      const double approach = 30.0;
      const double radius = 15.0;
      pts = {{0.0, 0.0}, {approach, 0.0}};
      append_arc(pts, {approach, radius}, radius, -pi / 2.0, 0.0, 1.0);
      double used = 0.0;
      for (std::size_t i = 1; i < pts.size(); ++i) {
        used += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
      }
      const double exit = std::max(min_length - used, 10.0);
      pts.push_back({approach + radius, radius + exit});
      break;
    }
    case ScenarioClass::Roundabout: {
      // 15 m entry, then counter-clockwise circulation on a 25 m circle for
      // as much arc as the horizon needs (at most one full turn).
      const double entry = 15.0;
      const double radius = 25.0;
      pts = {{0.0, 0.0}, {entry, 0.0}};
      // Chords run slightly short of the arc; 1% extra sweep covers that.
      const double sweep =
          std::min(1.01 * std::max(min_length - entry, 10.0) / radius, 2.0 * pi - 0.1);
      append_arc(pts, {entry, radius}, radius, -pi / 2.0, -pi / 2.0 + sweep, 1.0);
      break;
    }
  }
  return ReferenceRoute(std::move(pts));
}

std::vector<ScenarioRecord> generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t t_f = cfg.horizon;
  const double v = speed_for(cfg.scenario);
  const double horizon_time = static_cast<double>(t_f) * cfg.dt;

  std::vector<double> sigma(t_f);
  double grow = 1.0;
  for (std::size_t t = 0; t < t_f; ++t) {
    sigma[t] = grow;
    grow *= cfg.error_growth;
  }
  const double sigma_last = sigma.back() * std::max(cfg.noise_scale_s, cfg.noise_scale_d);
  const double path_needed = kStartS + v * horizon_time + 30.0 + 6.0 * sigma_last;
  const ReferenceRoute route = route_template(cfg.scenario, path_needed);

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(cfg.scenario)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto draw_path = [&](std::vector<double>& z) {
    switch (cfg.dependence.kind) {
      case StepDependence::Kind::Independent:
        for (double& e : z) e = normal(rng);
        break;
      case StepDependence::Kind::Comonotone: {
        const double shared = normal(rng);
        for (double& e : z) e = shared;
        break;
      }
      case StepDependence::Kind::Ar1: {
        const double rho = cfg.dependence.rho;
        const double innov = std::sqrt(1.0 - rho * rho);
        double prev = normal(rng);
        z[0] = prev;
        for (std::size_t t = 1; t < z.size(); ++t) {
          prev = rho * prev + innov * normal(rng);
          z[t] = prev;
        }
        break;
      }
    }
  };

  const bool lane_change = cfg.scenario == ScenarioClass::LaneChange;
  const double nominal_tc = horizon_time / 2.0;

  std::vector<ScenarioRecord> out;
  out.reserve(cfg.n_records);
  std::vector<double> zs(t_f), zd(t_f);
  for (std::size_t i = 0; i < cfg.n_records; ++i) {
    const double true_tc = lane_change && cfg.noise_scale_d > 0.0
                               ? nominal_tc + cfg.lane_change_timing_sd * normal(rng)
                               : nominal_tc;

    std::vector<FrenetPoint> truth(t_f);
    std::vector<double> nominal_d(t_f, 0.0);
    for (std::size_t t = 0; t < t_f; ++t) {
      const double time = static_cast<double>(t + 1) * cfg.dt;
      truth[t].s = kStartS + v * time;
      if (lane_change) {
        truth[t].d = kLaneWidth * sigmoid((time - true_tc) / kLaneChangeTau);
        nominal_d[t] = kLaneWidth * sigmoid((time - nominal_tc) / kLaneChangeTau);
      }
    }

    std::vector<std::vector<FrenetPoint>> modes(cfg.modes, std::vector<FrenetPoint>(t_f));
    for (std::size_t k = 0; k < cfg.modes; ++k) {
      draw_path(zs);
      draw_path(zd);
      for (std::size_t t = 0; t < t_f; ++t) {
        FrenetPoint& p = modes[k][t];
        p.s = truth[t].s + cfg.noise_scale_s * sigma[t] * zs[t];
        p.d = (lane_change ? nominal_d[t] : truth[t].d) + cfg.noise_scale_d * sigma[t] * zd[t];
        if (cfg.wrong_intent) {
          p.d += cfg.intent_offset * static_cast<double>(t + 1) / static_cast<double>(t_f);
        }
      }
    }

    out.push_back(ScenarioRecord{fmt::format("{}-{}-{:06d}", to_string(cfg.scenario), cfg.seed, i),
                                 cfg.scenario, route, MultimodalForecast(std::move(modes), cfg.dt),
                                 std::move(truth), fmt::format("agent-{:06d}", i)});
  }
  return out;
}

}  // namespace frenetcp
