#include "frenetcp/nonconformity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "frenetcp/errors.hpp"

namespace frenetcp {

ScoreMatrix::ScoreMatrix(std::size_t records, std::size_t horizon)
    : n_(records), t_f_(horizon), data_(records * horizon) {}

std::vector<double> ScoreMatrix::column(std::size_t step, Direction dir) const {
  std::vector<double> out;
  out.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) out.push_back(at(i, step).get(dir));
  return out;
}

std::vector<StepScore> score(const ScenarioRecord& record) {
  const MultimodalForecast& f = record.forecast;
  std::vector<StepScore> out(f.horizon());
  for (std::size_t t = 0; t < f.horizon(); ++t) {
    double best_s = std::numeric_limits<double>::infinity();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.modes(); ++k) {
      best_s = std::min(best_s, std::abs(f.at(k, t).s - record.truth[t].s));
      best_d = std::min(best_d, std::abs(f.at(k, t).d - record.truth[t].d));
    }
    out[t] = {best_s, best_d};
  }
  return out;
}

ScoreMatrix score_matrix(std::span<const ScenarioRecord> records) {
  if (records.empty()) return {};
  const std::size_t t_f = records.front().horizon();
  ScoreMatrix m(records.size(), t_f);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].horizon() != t_f) {
      throw HorizonMismatch(fmt::format("record '{}' has horizon {}, expected {}", records[i].id,
                                        records[i].horizon(), t_f));
    }
    const auto row = score(records[i]);
    std::copy(row.begin(), row.end(), &m.at(i, 0));
  }
  return m;
}

std::size_t conformal_rank(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument(fmt::format("alpha must lie in (0, 1), got {}", alpha));
  }
  const double target = (1.0 - alpha) * (static_cast<double>(n) + 1.0);
  // Absorb representation error so that e.g. (1 - 0.1) * 10 ranks as 9.
  const double k = std::ceil(target - 1e-9);
  return static_cast<std::size_t>(std::max(k, 1.0));
}

double quantile(std::span<const double> scores, double alpha) {
  const std::size_t n = scores.size();
  const std::size_t k = conformal_rank(alpha, n);
  if (n == 0) throw EmptyCalibration("quantile of an empty score set");
  if (k > n) throw AlphaTooSmallForN(alpha, n, k);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return sorted[k - 1];
}

QuantileVector quantile_vector(const ScoreMatrix& scores, double alpha) {
  QuantileVector out;
  out.alpha = alpha;
  out.n = scores.records();
  out.q_s.resize(scores.horizon());
  out.q_d.resize(scores.horizon());
  for (std::size_t t = 0; t < scores.horizon(); ++t) {
    for (Direction dir : {Direction::Longitudinal, Direction::Lateral}) {
      const auto col = scores.column(t, dir);
      double q;
      try {
        q = quantile(col, alpha);
      } catch (const AlphaTooSmallForN& e) {
        throw e.with_cell({t, direction_tag(dir)});
      }
      (dir == Direction::Longitudinal ? out.q_s : out.q_d)[t] = q;
    }
  }
  return out;
}

}  // namespace frenetcp
