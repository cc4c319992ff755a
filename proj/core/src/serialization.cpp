#include "frenetcp/serialization.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "frenetcp/errors.hpp"

namespace frenetcp {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw SchemaError(0, {}, what); }

ojson parse_object(std::string_view text, const char* kind) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    bad(fmt::format("malformed {} document: {}", kind, e.what()));
  }
  if (!j.is_object()) bad(fmt::format("{} document must be a JSON object", kind));
  return j;
}

const ojson& field(const ojson& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) bad(fmt::format("missing key '{}'", key));
  return *it;
}

double number(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_number()) bad(fmt::format("key '{}' must be a number", key));
  return v.get<double>();
}

std::size_t count(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_number_unsigned()) bad(fmt::format("key '{}' must be a non-negative integer", key));
  return v.get<std::size_t>();
}

std::string text(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_string()) bad(fmt::format("key '{}' must be a string", key));
  return v.get<std::string>();
}

std::vector<double> numbers(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_array()) bad(fmt::format("key '{}' must be an array", key));
  std::vector<double> out;
  out.reserve(v.size());
  for (const ojson& e : v) {
    if (!e.is_number()) bad(fmt::format("key '{}' must hold numbers only", key));
    out.push_back(e.get<double>());
  }
  return out;
}

ScenarioClass scenario_field(const ojson& j) {
  const std::string name = text(j, "scenario");
  const auto s = parse_scenario(name);
  if (!s) bad(fmt::format("unknown scenario '{}'", name));
  return *s;
}

Method method_field(const ojson& j) {
  const std::string name = text(j, "method");
  const auto m = parse_method(name);
  if (!m) bad(fmt::format("unknown method '{}'", name));
  return *m;
}

Direction direction_field(const ojson& j) {
  const std::string name = text(j, "direction");
  if (name == "s") return Direction::Longitudinal;
  if (name == "d") return Direction::Lateral;
  bad(fmt::format("direction must be \"s\" or \"d\", got '{}'", name));
}

}  // namespace

std::string serialize_calibration(const CalibrationResult& cal) {
  ojson j;
  j["scenario"] = std::string(to_string(cal.scenario));
  j["alpha"] = cal.level.alpha;
  j["method"] = std::string(to_string(cal.level.method));
  j["dt"] = cal.dt;
  j["q_s"] = cal.quantiles.q_s;
  j["q_d"] = cal.quantiles.q_d;
  j["n_d1"] = cal.n_d1;
  j["n_d2"] = cal.n_d2;
  j["beta"] = cal.level.beta;
  return j.dump(2) + "\n";
}

CalibrationResult parse_calibration(std::string_view doc) {
  const ojson j = parse_object(doc, "calibration");
  CalibrationResult cal;
  cal.scenario = scenario_field(j);
  cal.level.alpha = number(j, "alpha");
  cal.level.method = method_field(j);
  cal.level.beta = number(j, "beta");
  cal.dt = number(j, "dt");
  cal.quantiles.q_s = numbers(j, "q_s");
  cal.quantiles.q_d = numbers(j, "q_d");
  cal.quantiles.alpha = cal.level.alpha;
  cal.n_d1 = count(j, "n_d1");
  cal.n_d2 = count(j, "n_d2");
  cal.quantiles.n = cal.level.method == Method::CopulaShared ? cal.n_d2 : cal.n_d1;
  if (cal.quantiles.q_s.size() != cal.quantiles.q_d.size()) {
    bad("q_s and q_d must have the same length");
  }
  for (std::size_t t = 0; t < cal.quantiles.q_s.size(); ++t) {
    if (!(cal.quantiles.q_s[t] >= 0.0) || !(cal.quantiles.q_d[t] >= 0.0)) {
      bad(fmt::format("negative quantile at step {}", t));
    }
  }
  if (!(cal.level.alpha > 0.0 && cal.level.alpha < 1.0)) bad("alpha must lie in (0, 1)");
  return cal;
}

std::string serialize_reliability(const ReliabilityDocument& doc) {
  const ReliabilityModel& m = doc.model;
  const ReliabilityCoefficients& c = m.coeffs;
  ojson j;
  j["scenario"] = std::string(to_string(m.scenario));
  j["direction"] = std::string(1, direction_tag(m.direction));
  j["segment"] = std::string(to_string(m.segment));
  j["active_terms"] = c.active.to_string();
  j["a"] = c.a;
  j["b"] = c.b;
  j["c"] = c.c;
  j["d"] = c.d;
  j["f"] = c.f;
  j["g"] = c.g;
  j["h"] = c.h;
  j["k"] = c.k;
  j["m"] = c.m;
  j["z"] = c.z;
  j["fit_rmse"] = m.fit_rmse;
  j["x_min"] = m.x_min;
  j["x_max"] = m.x_max;
  j["step_begin"] = m.step_begin;
  j["step_end"] = m.step_end;
  j["alpha"] = doc.alpha;
  j["method"] = std::string(to_string(doc.method));
  return j.dump(2) + "\n";
}

ReliabilityDocument parse_reliability(std::string_view text_doc) {
  const ojson j = parse_object(text_doc, "reliability");
  ReliabilityDocument doc;
  ReliabilityModel& m = doc.model;
  m.scenario = scenario_field(j);
  m.direction = direction_field(j);
  const std::string seg = text(j, "segment");
  const auto segment = parse_segment(seg);
  if (!segment) bad(fmt::format("unknown segment '{}'", seg));
  m.segment = *segment;
  const std::string terms = text(j, "active_terms");
  const auto active = parse_term_set(terms);
  if (!active) bad(fmt::format("unknown term set '{}'", terms));
  ReliabilityCoefficients& c = m.coeffs;
  c.active = *active;
  c.a = number(j, "a");
  c.b = number(j, "b");
  c.c = number(j, "c");
  c.d = number(j, "d");
  c.f = number(j, "f");
  c.g = number(j, "g");
  c.h = number(j, "h");
  c.k = number(j, "k");
  c.m = number(j, "m");
  c.z = number(j, "z");
  m.fit_rmse = number(j, "fit_rmse");
  m.x_min = number(j, "x_min");
  m.x_max = number(j, "x_max");
  m.step_begin = count(j, "step_begin");
  m.step_end = count(j, "step_end");
  doc.alpha = number(j, "alpha");
  doc.method = method_field(j);
  if (c.active.sigmoid_derivative && !(c.z > 0.0)) bad("z must be positive when SD is active");
  if (m.x_min > m.x_max) bad("x_min exceeds x_max");
  return doc;
}

std::string serialize_profile(const ProfileDocument& doc) {
  ojson j;
  j["scenario"] = std::string(to_string(doc.scenario));
  j["n"] = doc.profile.n;
  j["mae_s"] = doc.profile.mae_s;
  j["mae_d"] = doc.profile.mae_d;
  return j.dump(2) + "\n";
}

ProfileDocument parse_profile(std::string_view text_doc) {
  const ojson j = parse_object(text_doc, "profile");
  ProfileDocument doc;
  doc.scenario = scenario_field(j);
  doc.profile.n = count(j, "n");
  doc.profile.mae_s = numbers(j, "mae_s");
  doc.profile.mae_d = numbers(j, "mae_d");
  if (doc.profile.mae_s.size() != doc.profile.mae_d.size()) {
    bad("mae_s and mae_d must have the same length");
  }
  return doc;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.10g}", v);
}

std::string metrics_csv_row(const MetricsReport& m) {
  return fmt::format("{},{},{},{},{},{}", to_string(m.scenario), format_number(m.alpha),
                     to_string(m.method), format_number(m.avg_area_size),
                     format_number(m.joint_coverage), m.n_test);
}

std::string critical_csv_row(const CriticalPointReport& rep) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string{};
  };
  return fmt::format("{},{},{},{},{},{},{},{},{}", to_string(rep.scenario),
                     format_number(rep.alpha), to_string(rep.method),
                     format_number(rep.config.threshold_r), format_number(rep.config.c_s),
                     format_number(rep.config.c_d), opt(rep.critical_t_s), opt(rep.critical_t_d),
                     opt(rep.critical_t_joint));
}

}  // namespace frenetcp
