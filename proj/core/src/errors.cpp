#include "frenetcp/errors.hpp"

#include <fmt/format.h>

#include <utility>

namespace frenetcp {

namespace {

std::string describe_alpha(double alpha, std::size_t n, std::size_t rank,
                           const std::optional<AlphaTooSmallForN::Cell>& cell,
                           const std::string& scenario) {
  std::string msg = fmt::format(
      "alpha {} needs rank {} but only {} calibration scores are available", alpha,
      rank, n);
  if (cell) {
    msg += fmt::format(" (step {}, direction {})", cell->step, cell->direction);
  }
  if (!scenario.empty()) {
    msg += fmt::format(" [scenario {}]", scenario);
  }
  return msg;
}

}  // namespace

SchemaError::SchemaError(std::size_t line, std::string record_id, const std::string& what)
    : Error(fmt::format("line {}{}: {}", line,
                        record_id.empty() ? std::string{} : fmt::format(" (record '{}')", record_id),
                        what)),
      line_(line),
      record_id_(std::move(record_id)) {}

InsufficientData::InsufficientData(std::string scenario, const std::string& what)
    : Error(fmt::format("scenario {}: {}", scenario, what)), scenario_(std::move(scenario)) {}

AlphaTooSmallForN::AlphaTooSmallForN(double alpha, std::size_t n, std::size_t rank,
                                     std::optional<Cell> cell, std::string scenario)
    : CalibrationError(describe_alpha(alpha, n, rank, cell, scenario)),
      alpha_(alpha),
      n_(n),
      rank_(rank),
      cell_(cell),
      scenario_(std::move(scenario)) {}

AlphaTooSmallForN AlphaTooSmallForN::with_cell(Cell cell) const {
  return AlphaTooSmallForN(alpha_, n_, rank_, cell, scenario_);
}

AlphaTooSmallForN AlphaTooSmallForN::with_scenario(std::string scenario) const {
  return AlphaTooSmallForN(alpha_, n_, rank_, cell_, std::move(scenario));
}

InfeasibleLevel::InfeasibleLevel(const std::string& what, std::string scenario)
    : CalibrationError(scenario.empty() ? what : fmt::format("{} [scenario {}]", what, scenario)),
      scenario_(std::move(scenario)) {}

}  // namespace frenetcp
