#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "frenetcp/data_model.hpp"
#include "frenetcp/nonconformity.hpp"

namespace frenetcp {

enum class Method { CopulaShared, Bonferroni };

/// "copula" / "bonferroni".
std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

/// Empirical marginal CDFs of the D1 scores, one per (step, direction) cell.
class MarginalCdf {
 public:
  /// Throws EmptyCalibration when `d1_scores` has no records.
  explicit MarginalCdf(const ScoreMatrix& d1_scores);

  std::size_t sample_size() const noexcept { return n_; }
  std::size_t horizon() const noexcept { return t_f_; }

  /// (#scores <= x) / n; right-continuous step function with range [0, 1].
  double cdf(std::size_t step, Direction dir, double x) const;

  /// k-th smallest score with k = ceil(beta * n), beta in (0, 1].
  double inverse(std::size_t step, Direction dir, double beta) const;

  /// k-th smallest score (1-based).
  double order_statistic(std::size_t step, Direction dir, std::size_t k) const;

  /// Smallest rank k with x <= k-th smallest score, or n + 1 if x exceeds
  /// every sample.
  std::size_t covering_rank(std::size_t step, Direction dir, double x) const;

  std::span<const double> sorted(std::size_t step, Direction dir) const;

 private:
  std::size_t cell(std::size_t step, Direction dir) const {
    return 2 * step + (dir == Direction::Longitudinal ? 0 : 1);
  }

  std::size_t n_ = 0;
  std::size_t t_f_ = 0;
  std::vector<std::vector<double>> sorted_;
};

MarginalCdf fit_marginals(const ScoreMatrix& d1_scores);

struct CopulaLevel {
  /// Shared per-cell marginal level (copula) or the per-cell level
  /// 1 - alpha / (2 T_f) (Bonferroni).
  double beta = 1.0;
  double alpha = 0.0;
  Method method = Method::CopulaShared;
};

struct CopulaFit {
  CopulaLevel level;
  QuantileVector quantiles;
  std::size_t rank = 0;          // D1 order statistic shared by every cell
  std::size_t covered = 0;       // D2 records jointly covered at that rank
  std::size_t required = 0;      // ceil((1 - alpha)(n_d2 + 1))
};

/// Smallest shared level beta = k / n_d1 such that at least
/// ceil((1 - alpha)(n_d2 + 1)) D2 records have every (step, direction) score
/// at or below the D1 marginal quantile at beta. Throws InfeasibleLevel when
/// no level reaches the target.
CopulaFit calibrate_copula_shared(const MarginalCdf& marginals, const ScoreMatrix& d2_scores,
                                  double alpha);

struct CalibrationResult {
  ScenarioClass scenario = ScenarioClass::NormalDriving;
  QuantileVector quantiles;
  CopulaLevel level;
  std::size_t n_d1 = 0;
  std::size_t n_d2 = 0;
  double dt = 0.0;

  std::size_t horizon() const noexcept { return quantiles.horizon(); }
};

/// Split-conformal quantile at miscoverage alpha / (2 T_f) in every cell.
CalibrationResult calibrate_bonferroni(ScenarioClass scenario, const ScoreMatrix& scores,
                                       double alpha, double dt = 0.0);

CalibrationResult calibrate_copula(ScenarioClass scenario, const ScoreMatrix& d1_scores,
                                   const ScoreMatrix& d2_scores, double alpha, double dt = 0.0);

/// Calibrates every class present in the split independently. The copula
/// path uses D1 for marginals and D2 for the level search; Bonferroni pools
/// D1 and D2. Errors are relabelled with the failing class.
std::map<ScenarioClass, CalibrationResult> calibrate_scenario(const SplitResult& split,
                                                              double alpha, Method method);

}  // namespace frenetcp
