#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace frenetcp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry

class GeometryError : public Error {
 public:
  using Error::Error;
};

class DegenerateRoute : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class OutOfRange : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// Input data

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string record_id, const std::string& what);

  std::size_t line() const noexcept { return line_; }
  const std::string& record_id() const noexcept { return record_id_; }

 private:
  std::size_t line_;
  std::string record_id_;
};

class InsufficientData : public Error {
 public:
  InsufficientData(std::string scenario, const std::string& what);
  const std::string& scenario() const noexcept { return scenario_; }

 private:
  std::string scenario_;
};

class HorizonMismatch : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class EmptyTestSet : public EmptySet {
 public:
  using EmptySet::EmptySet;
};

// Calibration

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class EmptyCalibration : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

/// Raised when ceil((1 - alpha)(n + 1)) exceeds n: more calibration data is
/// needed for the requested miscoverage.
class AlphaTooSmallForN : public CalibrationError {
 public:
  struct Cell {
    std::size_t step;
    char direction;  // 's' or 'd'
  };

  AlphaTooSmallForN(double alpha, std::size_t n, std::size_t rank,
                    std::optional<Cell> cell = std::nullopt,
                    std::string scenario = {});

  double alpha() const noexcept { return alpha_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t rank() const noexcept { return rank_; }
  const std::optional<Cell>& cell() const noexcept { return cell_; }
  const std::string& scenario() const noexcept { return scenario_; }

  AlphaTooSmallForN with_cell(Cell cell) const;
  AlphaTooSmallForN with_scenario(std::string scenario) const;

 private:
  double alpha_;
  std::size_t n_;
  std::size_t rank_;
  std::optional<Cell> cell_;
  std::string scenario_;
};

class InfeasibleLevel : public CalibrationError {
 public:
  InfeasibleLevel(const std::string& what, std::string scenario = {});
  const std::string& scenario() const noexcept { return scenario_; }

 private:
  std::string scenario_;
};

// Reliability fitting

class FitError : public Error {
 public:
  using Error::Error;
};

class FitDiverged : public FitError {
 public:
  using FitError::FitError;
};

class InsufficientPoints : public FitError {
 public:
  using FitError::FitError;
};

}  // namespace frenetcp
