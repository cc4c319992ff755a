#include "frenetcp/copula_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "frenetcp/errors.hpp"

namespace frenetcp {

std::string_view to_string(Method method) {
  return method == Method::CopulaShared ? "copula" : "bonferroni";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "copula") return Method::CopulaShared;
  if (name == "bonferroni") return Method::Bonferroni;
  return std::nullopt;
}

MarginalCdf::MarginalCdf(const ScoreMatrix& d1_scores)
    : n_(d1_scores.records()), t_f_(d1_scores.horizon()) {
  if (n_ == 0) throw EmptyCalibration("cannot fit marginal CDFs on an empty D1 set");
  sorted_.resize(2 * t_f_);
  for (std::size_t t = 0; t < t_f_; ++t) {
    for (Direction dir : {Direction::Longitudinal, Direction::Lateral}) {
      auto col = d1_scores.column(t, dir);
      std::stable_sort(col.begin(), col.end());
      sorted_[cell(t, dir)] = std::move(col);
    }
  }
}

std::span<const double> MarginalCdf::sorted(std::size_t step, Direction dir) const {
  return sorted_.at(cell(step, dir));
}

double MarginalCdf::cdf(std::size_t step, Direction dir, double x) const {
  const auto& s = sorted_.at(cell(step, dir));
  const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
  return static_cast<double>(count) / static_cast<double>(n_);
}

double MarginalCdf::order_statistic(std::size_t step, Direction dir, std::size_t k) const {
  if (k == 0 || k > n_) {
    throw std::out_of_range(fmt::format("order statistic {} of a sample of {}", k, n_));
  }
  return sorted_.at(cell(step, dir))[k - 1];
}

double MarginalCdf::inverse(std::size_t step, Direction dir, double beta) const {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument(fmt::format("inverse CDF level must lie in (0, 1], got {}", beta));
  }
  const double k = std::ceil(beta * static_cast<double>(n_) - 1e-9);
  const auto rank = static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(n_)));
  return order_statistic(step, dir, rank);
}

std::size_t MarginalCdf::covering_rank(std::size_t step, Direction dir, double x) const {
  const auto& s = sorted_.at(cell(step, dir));
  return static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), x) - s.begin()) + 1;
}

MarginalCdf fit_marginals(const ScoreMatrix& d1_scores) { return MarginalCdf(d1_scores); }

CopulaFit calibrate_copula_shared(const MarginalCdf& marginals, const ScoreMatrix& d2_scores,
                                  double alpha) {
  const std::size_t n1 = marginals.sample_size();
  const std::size_t n2 = d2_scores.records();
  const std::size_t t_f = marginals.horizon();
  if (n2 == 0) throw EmptyCalibration("copula level search needs a non-empty D2 set");
  if (d2_scores.horizon() != t_f) {
    throw HorizonMismatch(
        fmt::format("D1 horizon {} differs from D2 horizon {}", t_f, d2_scores.horizon()));
  }
  const std::size_t required = conformal_rank(alpha, n2);
  if (required > n2) {
    throw InfeasibleLevel(fmt::format(
        "alpha {} needs {} jointly covered D2 records but D2 holds only {}", alpha, required, n2));
  }

  // Each D2 record is jointly covered at rank k iff k >= its largest
  // per-cell covering rank.
  std::vector<std::size_t> record_rank(n2, 1);
  for (std::size_t i = 0; i < n2; ++i) {
    std::size_t worst = 1;
    for (std::size_t t = 0; t < t_f; ++t) {
      const StepScore& sc = d2_scores.at(i, t);
      worst = std::max(worst, marginals.covering_rank(t, Direction::Longitudinal, sc.s));
      worst = std::max(worst, marginals.covering_rank(t, Direction::Lateral, sc.d));
    }
    record_rank[i] = worst;
  }
  const auto covered_at = [&](std::size_t k) {
    return static_cast<std::size_t>(
        std::count_if(record_rank.begin(), record_rank.end(), [k](std::size_t r) { return r <= k; }));
  };

  if (covered_at(n1) < required) {
    throw InfeasibleLevel(fmt::format(
        "even the D1 maxima cover only {} of {} D2 records, {} required for alpha {}",
        covered_at(n1), n2, required, alpha));
  }

  std::size_t lo = 1;
  std::size_t hi = n1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (covered_at(mid) >= required) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }

  CopulaFit fit;
  fit.rank = lo;
  fit.covered = covered_at(lo);
  fit.required = required;
  fit.level = {static_cast<double>(lo) / static_cast<double>(n1), alpha, Method::CopulaShared};
  fit.quantiles.alpha = alpha;
  fit.quantiles.n = n2;
  fit.quantiles.q_s.resize(t_f);
  fit.quantiles.q_d.resize(t_f);
  for (std::size_t t = 0; t < t_f; ++t) {
    fit.quantiles.q_s[t] = marginals.order_statistic(t, Direction::Longitudinal, lo);
    fit.quantiles.q_d[t] = marginals.order_statistic(t, Direction::Lateral, lo);
  }
  return fit;
}

CalibrationResult calibrate_bonferroni(ScenarioClass scenario, const ScoreMatrix& scores,
                                       double alpha, double dt) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument(fmt::format("alpha must lie in (0, 1), got {}", alpha));
  }
  const std::size_t t_f = scores.horizon();
  if (scores.records() == 0 || t_f == 0) {
    throw EmptyCalibration("Bonferroni calibration on an empty score set");
  }
  const double cell_alpha = alpha / (2.0 * static_cast<double>(t_f));
  CalibrationResult out;
  out.scenario = scenario;
  out.quantiles = quantile_vector(scores, cell_alpha);
  out.quantiles.alpha = alpha;
  out.level = {1.0 - cell_alpha, alpha, Method::Bonferroni};
  out.n_d1 = scores.records();
  out.n_d2 = 0;
  out.dt = dt;
  return out;
}

CalibrationResult calibrate_copula(ScenarioClass scenario, const ScoreMatrix& d1_scores,
                                   const ScoreMatrix& d2_scores, double alpha, double dt) {
  const MarginalCdf marginals(d1_scores);
  CopulaFit fit = calibrate_copula_shared(marginals, d2_scores, alpha);
  CalibrationResult out;
  out.scenario = scenario;
  out.quantiles = std::move(fit.quantiles);
  out.level = fit.level;
  out.n_d1 = d1_scores.records();
  out.n_d2 = d2_scores.records();
  out.dt = dt;
  return out;
}

std::map<ScenarioClass, CalibrationResult> calibrate_scenario(const SplitResult& split,
                                                              double alpha, Method method) {
  std::map<ScenarioClass, CalibrationResult> out;
  for (ScenarioClass scenario : kAllScenarios) {
    auto d1 = filter_scenario(split.calib_d1, scenario);
    auto d2 = filter_scenario(split.calib_d2, scenario);
    if (d1.empty() && d2.empty()) continue;
    const std::string label(to_string(scenario));
    const double dt = !d1.empty() ? d1.front().dt() : d2.front().dt();
    try {
      if (method == Method::Bonferroni) {
        d1.insert(d1.end(), d2.begin(), d2.end());
        out.emplace(scenario, calibrate_bonferroni(scenario, score_matrix(d1), alpha, dt));
      } else {
        if (d1.empty() || d2.empty()) {
          throw InsufficientData(label, "copula calibration needs both D1 and D2 records");
        }
        out.emplace(scenario,
                    calibrate_copula(scenario, score_matrix(d1), score_matrix(d2), alpha, dt));
      }
    } catch (const AlphaTooSmallForN& e) {
      throw e.with_scenario(label);
    } catch (const InfeasibleLevel& e) {
      throw InfeasibleLevel(e.what(), label);
    } catch (const InsufficientData&) {
      throw;
    } catch (const Error& e) {
      throw CalibrationError(fmt::format("scenario {}: {}", label, e.what()));
    }
  }
  return out;
}

}  // namespace frenetcp
