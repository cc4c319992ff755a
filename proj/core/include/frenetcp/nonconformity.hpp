#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "frenetcp/data_model.hpp"

namespace frenetcp {

enum class Direction { Longitudinal, Lateral };

inline constexpr char direction_tag(Direction dir) {
  return dir == Direction::Longitudinal ? 's' : 'd';
}

/// Per-step absolute deviations, each minimised over modes independently.
struct StepScore {
  double s = 0.0;
  double d = 0.0;

  double get(Direction dir) const { return dir == Direction::Longitudinal ? s : d; }
};

/// n records x T_f steps of StepScore, record-major.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t records, std::size_t horizon);

  std::size_t records() const noexcept { return n_; }
  std::size_t horizon() const noexcept { return t_f_; }

  StepScore& at(std::size_t record, std::size_t step) { return data_[record * t_f_ + step]; }
  const StepScore& at(std::size_t record, std::size_t step) const {
    return data_[record * t_f_ + step];
  }
  std::span<const StepScore> row(std::size_t record) const {
    return std::span<const StepScore>(data_).subspan(record * t_f_, t_f_);
  }

  std::vector<double> column(std::size_t step, Direction dir) const;

 private:
  std::size_t n_ = 0;
  std::size_t t_f_ = 0;
  std::vector<StepScore> data_;
};

struct QuantileVector {
  std::vector<double> q_s;
  std::vector<double> q_d;
  double alpha = 0.0;
  std::size_t n = 0;

  std::size_t horizon() const noexcept { return q_s.size(); }
  const std::vector<double>& get(Direction dir) const {
    return dir == Direction::Longitudinal ? q_s : q_d;
  }
};

/// Absolute deviation from the truth at each step, minimised over modes
/// separately for s and d (the two minima may come from different modes).
std::vector<StepScore> score(const ScenarioRecord& record);

/// Scores for a set of records sharing one horizon. Throws HorizonMismatch.
ScoreMatrix score_matrix(std::span<const ScenarioRecord> records);

/// Finite-sample conformal rank ceil((1 - alpha)(n + 1)).
std::size_t conformal_rank(double alpha, std::size_t n);

/// k-th smallest score with k = conformal_rank(alpha, n). Throws
/// EmptyCalibration for n == 0, AlphaTooSmallForN when k > n, and
/// std::invalid_argument for alpha outside (0, 1).
double quantile(std::span<const double> scores, double alpha);

/// Column-wise quantile; errors carry the (step, direction) cell.
QuantileVector quantile_vector(const ScoreMatrix& scores, double alpha);

}  // namespace frenetcp
