#include "frenetcp/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "frenetcp/errors.hpp"

namespace frenetcp {

using nlohmann::json;

std::string_view to_string(ScenarioClass scenario) {
  switch (scenario) {
    case ScenarioClass::LaneChange: return "lane_change";
    case ScenarioClass::Intersection: return "intersection";
    case ScenarioClass::Roundabout: return "roundabout";
    case ScenarioClass::NormalDriving: return "normal_driving";
  }
  return "unknown";
}

std::optional<ScenarioClass> parse_scenario(std::string_view name) {
  std::string folded;
  for (char c : name) {
    if (c == '_' || c == '-' || c == ' ') continue;
    folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (ScenarioClass s : kAllScenarios) {
    std::string canon;
    for (char c : to_string(s)) {
      if (c != '_') canon.push_back(c);
    }
    if (canon == folded) return s;
  }
  return std::nullopt;
}

std::string scenario_names() {
  std::string out;
  for (ScenarioClass s : kAllScenarios) {
    if (!out.empty()) out += ", ";
    out += to_string(s);
  }
  return out;
}

MultimodalForecast::MultimodalForecast(std::vector<std::vector<FrenetPoint>> modes, double dt)
    : k_(modes.size()), dt_(dt) {
  if (modes.empty()) throw std::invalid_argument("forecast needs at least one mode");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument(fmt::format("forecast dt must be positive, got {}", dt));
  }
  t_f_ = modes.front().size();
  if (t_f_ == 0) throw std::invalid_argument("forecast modes need at least one step");
  points_.reserve(k_ * t_f_);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k].size() != t_f_) {
      throw std::invalid_argument(fmt::format(
          "mode {} has {} steps, expected {}", k, modes[k].size(), t_f_));
    }
    for (const FrenetPoint& p : modes[k]) {
      if (!std::isfinite(p.s) || !std::isfinite(p.d)) {
        throw std::invalid_argument(fmt::format("mode {} contains a non-finite point", k));
      }
      points_.push_back(p);
    }
  }
}

namespace {

struct LineContext {
  std::size_t line;
  std::string id;

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(line, id, what); }
};

const json& require(const json& obj, const char* key, const LineContext& ctx) {
  const auto it = obj.find(key);
  if (it == obj.end()) ctx.fail(fmt::format("missing field '{}'", key));
  return *it;
}

std::pair<double, double> parse_pair(const json& j, const LineContext& ctx, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    ctx.fail(fmt::format("{} must be a pair of numbers", what));
  }
  const double a = j[0].get<double>();
  const double b = j[1].get<double>();
  if (!std::isfinite(a) || !std::isfinite(b)) ctx.fail(fmt::format("{} is not finite", what));
  return {a, b};
}

std::vector<std::pair<double, double>> parse_pairs(const json& j, const LineContext& ctx,
                                                   const char* what) {
  if (!j.is_array()) ctx.fail(fmt::format("'{}' must be a list of pairs", what));
  std::vector<std::pair<double, double>> out;
  out.reserve(j.size());
  for (const json& e : j) out.push_back(parse_pair(e, ctx, what));
  return out;
}

std::vector<FrenetPoint> to_frenet(const std::vector<std::pair<double, double>>& pts,
                                   CoordinateFrame frame, const ReferenceRoute& route) {
  if (frame == CoordinateFrame::Frenet) {
    std::vector<FrenetPoint> out;
    out.reserve(pts.size());
    for (const auto& [s, d] : pts) out.push_back({s, d});
    return out;
  }
  std::vector<PlanarPoint> planar;
  planar.reserve(pts.size());
  for (const auto& [x, y] : pts) planar.push_back({x, y});
  return project_trajectory(route, planar);
}

json pair_json(double a, double b) { return json::array({a, b}); }

}  // namespace

ScenarioRecord parse_record(std::string_view line, std::size_t line_number) {
  LineContext ctx{line_number, {}};
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    ctx.fail(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!obj.is_object()) ctx.fail("record must be a JSON object");

  const json& id = require(obj, "id", ctx);
  if (!id.is_string()) ctx.fail("'id' must be a string");
  ctx.id = id.get<std::string>();

  const json& scen = require(obj, "scenario", ctx);
  if (!scen.is_string()) ctx.fail("'scenario' must be a string");
  const auto scenario = parse_scenario(scen.get<std::string>());
  if (!scenario) {
    ctx.fail(fmt::format("unknown scenario '{}' (expected one of {})", scen.get<std::string>(),
                         scenario_names()));
  }

  const json& dt_j = require(obj, "dt", ctx);
  if (!dt_j.is_number()) ctx.fail("'dt' must be a number");
  const double dt = dt_j.get<double>();
  if (!(dt > 0.0) || !std::isfinite(dt)) ctx.fail(fmt::format("'dt' must be positive, got {}", dt));

  const json& frame_j = require(obj, "frame", ctx);
  if (!frame_j.is_string()) ctx.fail("'frame' must be a string");
  CoordinateFrame frame;
  if (frame_j == "frenet") {
    frame = CoordinateFrame::Frenet;
  } else if (frame_j == "planar") {
    frame = CoordinateFrame::Planar;
  } else {
    ctx.fail(fmt::format("'frame' must be \"frenet\" or \"planar\", got {}", frame_j.dump()));
  }

  std::vector<PlanarPoint> verts;
  for (const auto& [x, y] : parse_pairs(require(obj, "route", ctx), ctx, "route")) {
    verts.push_back({x, y});
  }
  std::optional<ReferenceRoute> route;
  try {
    route.emplace(std::move(verts));
  } catch (const DegenerateRoute& e) {
    throw DegenerateRoute(fmt::format("line {} (record '{}'): {}", line_number, ctx.id, e.what()));
  }

  const json& modes_j = require(obj, "modes", ctx);
  if (!modes_j.is_array() || modes_j.empty()) ctx.fail("'modes' must be a non-empty list");
  std::vector<std::vector<FrenetPoint>> modes;
  modes.reserve(modes_j.size());
  for (const json& m : modes_j) {
    modes.push_back(to_frenet(parse_pairs(m, ctx, "modes"), frame, *route));
  }
  const std::size_t t_f = modes.front().size();
  if (t_f == 0) ctx.fail("modes must have at least one step");
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k].size() != t_f) {
      ctx.fail(fmt::format("mode {} has {} steps, mode 0 has {}", k, modes[k].size(), t_f));
    }
  }

  std::vector<FrenetPoint> truth = to_frenet(parse_pairs(require(obj, "truth", ctx), ctx, "truth"),
                                             frame, *route);
  if (truth.size() != t_f) {
    ctx.fail(fmt::format("truth has {} steps but forecast horizon is {}", truth.size(), t_f));
  }

  std::string agent_id;
  if (const auto it = obj.find("agent_id"); it != obj.end()) {
    if (!it->is_string()) ctx.fail("'agent_id' must be a string");
    agent_id = it->get<std::string>();
  }

  return ScenarioRecord{ctx.id, *scenario, std::move(*route),
                        MultimodalForecast(std::move(modes), dt), std::move(truth),
                        std::move(agent_id)};
}

std::string format_record(const ScenarioRecord& r) {
  // ordered_json keeps the field order stable for byte-identical output.
  nlohmann::ordered_json obj;
  obj["id"] = r.id;
  obj["scenario"] = std::string(to_string(r.scenario));
  obj["agent_id"] = r.agent_id;
  obj["dt"] = r.dt();
  obj["frame"] = "frenet";
  auto route = json::array();
  for (const PlanarPoint& v : r.route.vertices()) route.push_back(pair_json(v.x, v.y));
  obj["route"] = std::move(route);
  auto modes = json::array();
  for (std::size_t k = 0; k < r.forecast.modes(); ++k) {
    auto mode = json::array();
    for (const FrenetPoint& p : r.forecast.mode(k)) mode.push_back(pair_json(p.s, p.d));
    modes.push_back(std::move(mode));
  }
  obj["modes"] = std::move(modes);
  auto truth = json::array();
  for (const FrenetPoint& p : r.truth) truth.push_back(pair_json(p.s, p.d));
  obj["truth"] = std::move(truth);
  return obj.dump();
}

std::vector<ScenarioRecord> load_records(std::istream& in) {
  std::vector<ScenarioRecord> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c) != 0; })) {
      continue;
    }
    out.push_back(parse_record(line, line_number));
  }
  return out;
}

std::vector<ScenarioRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(0, {}, fmt::format("cannot open record file '{}'", path.string()));
  return load_records(in);
}

void write_records(std::ostream& out, std::span<const ScenarioRecord> records) {
  for (const ScenarioRecord& r : records) out << format_record(r) << '\n';
}

namespace {

// Unbiased draw in [0, bound) from the raw 64-bit engine output, so the
// shuffle does not depend on the standard library's distribution code.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

}  // namespace

SplitResult split(std::span<const ScenarioRecord> records, const SplitConfig& cfg) {
  if (!(cfg.calib_fraction > 0.0 && cfg.calib_fraction < 1.0)) {
    throw std::invalid_argument(
        fmt::format("calib_fraction must lie in (0, 1), got {}", cfg.calib_fraction));
  }
  if (!(cfg.d1_fraction > 0.0 && cfg.d1_fraction < 1.0)) {
    throw std::invalid_argument(
        fmt::format("d1_fraction must lie in (0, 1), got {}", cfg.d1_fraction));
  }

  std::mt19937_64 rng(cfg.seed);
  SplitResult out;
  for (ScenarioClass scenario : kAllScenarios) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].scenario == scenario) idx.push_back(i);
    }
    if (idx.empty()) continue;
    const std::size_t n = idx.size();
    if (n < 3) {
      throw InsufficientData(std::string(to_string(scenario)),
                             fmt::format("{} records, at least 3 are needed to split", n));
    }
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(idx[i], idx[bounded(rng, i + 1)]);
    }
    const auto n_calib = static_cast<std::size_t>(std::floor(cfg.calib_fraction * static_cast<double>(n)));
    const auto n_d1 = static_cast<std::size_t>(std::floor(cfg.d1_fraction * static_cast<double>(n_calib)));
    const std::size_t n_d2 = n_calib - n_d1;
    const std::size_t n_test = n - n_calib;
    if (n_d1 == 0 || n_d2 == 0 || n_test == 0) {
      throw InsufficientData(
          std::string(to_string(scenario)),
          fmt::format("{} records give an empty bucket (D1 {}, D2 {}, test {})", n, n_d1, n_d2,
                      n_test));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const ScenarioRecord& r = records[idx[j]];
      if (j < n_d1) {
        out.calib_d1.push_back(r);
      } else if (j < n_calib) {
        out.calib_d2.push_back(r);
      } else {
        out.test.push_back(r);
      }
    }
  }
  return out;
}

std::vector<ScenarioRecord> filter_scenario(std::span<const ScenarioRecord> records,
                                            ScenarioClass scenario) {
  std::vector<ScenarioRecord> out;
  for (const ScenarioRecord& r : records) {
    if (r.scenario == scenario) out.push_back(r);
  }
  return out;
}

}  // namespace frenetcp
