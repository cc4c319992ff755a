#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frenetcp/route_geometry.hpp"

namespace frenetcp {

enum class ScenarioClass { LaneChange, Intersection, Roundabout, NormalDriving };

inline constexpr std::array<ScenarioClass, 4> kAllScenarios = {
    ScenarioClass::LaneChange, ScenarioClass::Intersection, ScenarioClass::Roundabout,
    ScenarioClass::NormalDriving};

/// Canonical names: lane_change, intersection, roundabout, normal_driving.
std::string_view to_string(ScenarioClass scenario);

/// Accepts canonical names case-insensitively, with '-' or no separator in
/// place of '_' (so "LaneChange" and "lane-change" both parse).
std::optional<ScenarioClass> parse_scenario(std::string_view name);

/// Comma separated list of canonical names, for diagnostics.
std::string scenario_names();

/// K x T_f grid of Frenet points, stored mode-major.
class MultimodalForecast {
 public:
  MultimodalForecast() = default;
  /// Throws std::invalid_argument on empty or ragged modes, non-finite points,
  /// or dt <= 0.
  MultimodalForecast(std::vector<std::vector<FrenetPoint>> modes, double dt);

  std::size_t modes() const noexcept { return k_; }
  std::size_t horizon() const noexcept { return t_f_; }
  double dt() const noexcept { return dt_; }

  const FrenetPoint& at(std::size_t mode, std::size_t step) const {
    return points_[mode * t_f_ + step];
  }
  std::span<const FrenetPoint> mode(std::size_t k) const {
    return std::span<const FrenetPoint>(points_).subspan(k * t_f_, t_f_);
  }

 private:
  std::size_t k_ = 0;
  std::size_t t_f_ = 0;
  double dt_ = 0.0;
  std::vector<FrenetPoint> points_;
};

struct ScenarioRecord {
  std::string id;
  ScenarioClass scenario = ScenarioClass::NormalDriving;
  ReferenceRoute route;
  MultimodalForecast forecast;
  std::vector<FrenetPoint> truth;
  std::string agent_id;

  std::size_t horizon() const noexcept { return forecast.horizon(); }
  double dt() const noexcept { return forecast.dt(); }
};

enum class CoordinateFrame { Frenet, Planar };

/// Parses one line of the record file. `line_number` is used in diagnostics.
ScenarioRecord parse_record(std::string_view line, std::size_t line_number);

/// Serialises a record in the Frenet frame as a single line (no newline).
std::string format_record(const ScenarioRecord& record);

/// Reads a line-delimited record file. Blank lines are skipped. Throws
/// SchemaError (with the 1-based line number) or GeometryError.
std::vector<ScenarioRecord> load_records(const std::filesystem::path& path);
std::vector<ScenarioRecord> load_records(std::istream& in);

void write_records(std::ostream& out, std::span<const ScenarioRecord> records);

struct SplitConfig {
  double calib_fraction = 0.5;
  double d1_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<ScenarioRecord> calib_d1;
  std::vector<ScenarioRecord> calib_d2;
  std::vector<ScenarioRecord> test;
};

/// Seeded, per-class stratified partition into D1, D2 and test. Within each
/// class: n_calib = floor(calib_fraction * n), n_d1 = floor(d1_fraction * n_calib),
/// and the remainder of each stage goes to the later bucket. Throws
/// InsufficientData if a present class has fewer than 3 records or would
/// leave a bucket empty.
SplitResult split(std::span<const ScenarioRecord> records, const SplitConfig& cfg);

/// Records of one class, in input order.
std::vector<ScenarioRecord> filter_scenario(std::span<const ScenarioRecord> records,
                                            ScenarioClass scenario);

}  // namespace frenetcp
