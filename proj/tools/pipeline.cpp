#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include <fmt/format.h>

#include "frenetcp/intervals_metrics.hpp"
#include "frenetcp/nonconformity.hpp"
#include "frenetcp/reliability_model.hpp"
#include "frenetcp/serialization.hpp"
#include "frenetcp/synthetic_scenarios.hpp"

namespace frenetcp::cli {

MissingArtifact::MissingArtifact(const fs::path& path)
    : Error(fmt::format("missing artifact: {}", path.string())) {}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const MissingArtifact*>(&e)) return kExitMissing;
  if (dynamic_cast<const FitError*>(&e)) return kExitFit;
  if (dynamic_cast<const CalibrationError*>(&e) || dynamic_cast<const InsufficientData*>(&e) ||
      dynamic_cast<const EmptySet*>(&e)) {
    return kExitInfeasible;
  }
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const GeometryError*>(&e) || dynamic_cast<const HorizonMismatch*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e)) {
    return kExitConfig;
  }
  return 1;
}

std::vector<ScenarioClass> parse_scenarios(const std::vector<std::string>& names) {
  std::vector<ScenarioClass> out;
  for (const std::string& name : names) {
    const auto s = parse_scenario(name);
    if (!s) {
      throw ConfigError(
          fmt::format("unknown scenario '{}'; allowed: {}", name, scenario_names()));
    }
    if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
  }
  return out;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const std::string& name : names) {
    const auto m = parse_method(name);
    if (!m) {
      throw ConfigError(fmt::format("unknown method '{}'; allowed: copula, bonferroni", name));
    }
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  return out;
}

RiskSource parse_risk_source(const std::string& name) {
  if (name == "calibrated") return RiskSource::CalibratedBound;
  if (name == "rm") return RiskSource::RmPredictedBound;
  throw ConfigError(fmt::format("unknown risk source '{}'; allowed: calibrated, rm", name));
}

void check_alphas(const std::vector<double>& alphas) {
  if (alphas.empty()) throw ConfigError("at least one --alpha is required");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError(fmt::format("alpha must lie in (0, 1), got {}", a));
  }
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write failed for {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cell_stem(ScenarioClass scenario, double alpha, Method method) {
  return fmt::format("{}_{}_{}", to_string(scenario), format_number(alpha), to_string(method));
}

namespace {

std::vector<ScenarioRecord> load_input(const fs::path& path) {
  if (path.empty()) throw ConfigError("--input is required");
  if (!fs::exists(path)) throw MissingArtifact(path);
  return load_records(path);
}

void require_out(const fs::path& out) {
  if (out.empty()) throw ConfigError("--out is required");
}

bool selected(const std::vector<ScenarioClass>& filter, ScenarioClass s) {
  return filter.empty() || std::find(filter.begin(), filter.end(), s) != filter.end();
}

void remove_stale(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) return;
  std::vector<fs::path> stale;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      stale.push_back(entry.path());
    }
  }
  for (const auto& p : stale) fs::remove(p);
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const fs::path& path) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw SchemaError(1, {}, fmt::format("{} has no column '{}'", path.string(), name));
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Csv read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  Csv csv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (csv.header.empty()) {
      csv.header = std::move(fields);
      continue;
    }
    if (fields.size() != csv.header.size()) {
      throw SchemaError(line_no, {}, fmt::format("{}: expected {} fields, got {}", path.string(),
                                                 csv.header.size(), fields.size()));
    }
    csv.rows.push_back(std::move(fields));
  }
  if (csv.header.empty()) throw SchemaError(0, {}, fmt::format("{} is empty", path.string()));
  return csv;
}

std::string join_lines(const std::string_view header, const std::vector<std::string>& rows) {
  std::string out(header);
  out += '\n';
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

const char* bucket_name(int b) {
  static const char* names[] = {"d1", "d2", "test"};
  return names[b];
}

// Records of split.csv, grouped by bucket, in file order.
struct StoredSplit {
  std::map<std::string, int> bucket_of;  // id -> 0 (d1), 1 (d2), 2 (test)
  std::vector<std::string> order;
};

StoredSplit load_split(const fs::path& dir) {
  const fs::path path = dir / "split.csv";
  const Csv csv = read_csv(path);
  const std::size_t id_col = csv.column("id", path);
  const std::size_t bucket_col = csv.column("bucket", path);
  StoredSplit out;
  for (const auto& row : csv.rows) {
    int b = -1;
    for (int i = 0; i < 3; ++i) {
      if (row[bucket_col] == bucket_name(i)) b = i;
    }
    if (b < 0) throw SchemaError(0, row[id_col], fmt::format("unknown bucket '{}'", row[bucket_col]));
    out.bucket_of[row[id_col]] = b;
    out.order.push_back(row[id_col]);
  }
  return out;
}

// Records of `scenario` in the given buckets, following split.csv order.
std::vector<ScenarioRecord> records_in(const StoredSplit& sp,
                                       const std::map<std::string, const ScenarioRecord*>& by_id,
                                       ScenarioClass scenario, std::initializer_list<int> buckets) {
  std::vector<ScenarioRecord> out;
  for (const std::string& id : sp.order) {
    const int b = sp.bucket_of.at(id);
    if (std::find(buckets.begin(), buckets.end(), b) == buckets.end()) continue;
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw SchemaError(0, id, "record listed in split.csv is missing from --input");
    }
    if (it->second->scenario == scenario) out.push_back(*it->second);
  }
  return out;
}

std::map<std::string, const ScenarioRecord*> index_by_id(const std::vector<ScenarioRecord>& recs) {
  std::map<std::string, const ScenarioRecord*> out;
  for (const auto& r : recs) out.emplace(r.id, &r);
  return out;
}

fs::path reliability_path(const fs::path& dir, const ReliabilityDocument& doc) {
  const ReliabilityModel& m = doc.model;
  return dir / "reliability" /
         fmt::format("{}_{}_{}.json", cell_stem(m.scenario, doc.alpha, doc.method),
                     direction_tag(m.direction), to_string(m.segment));
}

std::vector<ReliabilityDocument> load_reliability(const fs::path& dir) {
  const fs::path rdir = dir / "reliability";
  std::vector<ReliabilityDocument> out;
  if (fs::is_directory(rdir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(rdir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(parse_reliability(read_file(f)));
  }
  if (out.empty()) throw MissingArtifact(rdir);
  return out;
}

std::vector<ReliabilityModel> models_for(const std::vector<ReliabilityDocument>& docs,
                                         const CalibrationResult& cal) {
  std::vector<ReliabilityModel> out;
  for (const auto& doc : docs) {
    if (doc.model.scenario == cal.scenario && doc.method == cal.level.method &&
        format_number(doc.alpha) == format_number(cal.level.alpha)) {
      out.push_back(doc.model);
    }
  }
  return out;
}

double combined_rmse(const std::vector<ReliabilityModel>& models, Direction dir, bool& any) {
  double sse = 0.0;
  std::size_t n = 0;
  for (const auto& m : models) {
    if (m.direction != dir) continue;
    const std::size_t k = m.step_end - m.step_begin;
    sse += m.fit_rmse * m.fit_rmse * static_cast<double>(k);
    n += k;
  }
  any = n > 0;
  return any ? std::sqrt(sse / static_cast<double>(n)) : 0.0;
}

}  // namespace

std::vector<CalibrationResult> load_calibrations(const fs::path& dir) {
  const fs::path cdir = dir / "calibration";
  std::vector<CalibrationResult> out;
  if (fs::is_directory(cdir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cdir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        out.push_back(parse_calibration(read_file(f)));
      } catch (const SchemaError& e) {
        throw SchemaError(0, {}, fmt::format("{}: {}", f.string(), e.what()));
      }
    }
  }
  if (out.empty()) throw MissingArtifact(cdir);
  std::stable_sort(out.begin(), out.end(), [](const CalibrationResult& a, const CalibrationResult& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    if (a.level.alpha != b.level.alpha) return a.level.alpha > b.level.alpha;
    return a.level.method < b.level.method;
  });
  return out;
}

void run_synth(const SynthOptions& opt) {
  require_out(opt.out);
  const std::vector<ScenarioClass> scenarios =
      opt.scenarios.empty() ? std::vector<ScenarioClass>(kAllScenarios.begin(), kAllScenarios.end())
                            : opt.scenarios;
  std::ostringstream body;
  for (ScenarioClass scenario : scenarios) {
    SynthConfig cfg = SynthConfig::defaults_for(scenario);
    cfg.n_records = opt.n;
    cfg.seed = opt.seed;
    if (opt.modes) cfg.modes = *opt.modes;
    if (opt.horizon) cfg.horizon = *opt.horizon;
    if (opt.dt) cfg.dt = *opt.dt;
    if (opt.noise_s) cfg.noise_scale_s = *opt.noise_s;
    if (opt.noise_d) cfg.noise_scale_d = *opt.noise_d;
    if (opt.growth) cfg.error_growth = *opt.growth;
    if (opt.dependence) cfg.dependence = parse_step_dependence(*opt.dependence);
    if (opt.intent_offset) cfg.intent_offset = *opt.intent_offset;
    cfg.wrong_intent = opt.wrong_intent;
    const auto records = generate(cfg);
    write_records(body, records);
  }
  write_file_atomic(opt.out, body.str());
}

void run_calibrate(const CalibrateOptions& opt) {
  require_out(opt.out);
  check_alphas(opt.alphas);
  if (opt.methods.empty()) throw ConfigError("at least one --method is required");
  if (!(opt.split.calib_fraction > 0.0 && opt.split.calib_fraction < 1.0) ||
      !(opt.split.d1_fraction > 0.0 && opt.split.d1_fraction < 1.0)) {
    throw ConfigError("split fractions must lie in (0, 1)");
  }
  std::vector<ScenarioRecord> records = load_input(opt.input);
  if (!opt.scenarios.empty()) {
    std::erase_if(records, [&](const ScenarioRecord& r) { return !selected(opt.scenarios, r.scenario); });
  }
  if (records.empty()) throw InsufficientData("any", "no records for the selected scenarios");

  const SplitResult parts = split(records, opt.split);

  std::vector<std::pair<fs::path, std::string>> docs;
  std::vector<std::string> rows;
  std::map<ScenarioClass, std::vector<ScenarioRecord>> test_of;
  for (ScenarioClass s : kAllScenarios) {
    auto t = filter_scenario(parts.test, s);
    if (!t.empty()) test_of.emplace(s, std::move(t));
  }
  std::map<std::pair<double, Method>, std::map<ScenarioClass, CalibrationResult>> by_cell;
  for (double alpha : opt.alphas) {
    for (Method method : opt.methods) {
      by_cell.try_emplace({alpha, method}, calibrate_scenario(parts, alpha, method));
    }
  }
  for (ScenarioClass s : kAllScenarios) {
    if (!test_of.contains(s)) continue;
    for (double alpha : opt.alphas) {
      for (Method method : opt.methods) {
        const CalibrationResult& cal = by_cell.at({alpha, method}).at(s);
        docs.emplace_back(opt.out / "calibration" / (cell_stem(s, alpha, method) + ".json"),
                          serialize_calibration(cal));
        rows.push_back(metrics_csv_row(evaluate(test_of.at(s), cal)));
      }
    }
  }

  std::string split_csv = "id,scenario,bucket\n";
  const std::vector<ScenarioRecord>* buckets[] = {&parts.calib_d1, &parts.calib_d2, &parts.test};
  for (int b = 0; b < 3; ++b) {
    for (const auto& r : *buckets[b]) {
      split_csv += fmt::format("{},{},{}\n", r.id, to_string(r.scenario), bucket_name(b));
    }
  }

  remove_stale(opt.out / "calibration", ".json");
  for (const auto& [path, text] : docs) write_file_atomic(path, text);
  write_file_atomic(opt.out / "metrics.csv", join_lines(kMetricsCsvHeader, rows));
  write_file_atomic(opt.out / "split.csv", split_csv);
}

void run_evaluate(const EvaluateOptions& opt) {
  require_out(opt.out);
  const auto cals = load_calibrations(opt.out);
  const auto records = load_input(opt.input);
  std::vector<std::string> rows;
  for (const auto& cal : cals) {
    if (!selected(opt.scenarios, cal.scenario)) continue;
    const auto recs = filter_scenario(records, cal.scenario);
    if (recs.empty()) {
      std::cerr << fmt::format("note: no {} records in {}; skipped\n", to_string(cal.scenario),
                               opt.input.string());
      continue;
    }
    rows.push_back(metrics_csv_row(evaluate(recs, cal)));
  }
  write_file_atomic(opt.out / "evaluation.csv", join_lines(kMetricsCsvHeader, rows));
}

void run_fit_reliability(const FitReliabilityOptions& opt) {
  require_out(opt.out);
  const auto cals = load_calibrations(opt.out);
  const StoredSplit sp = load_split(opt.out);
  const auto records = load_input(opt.input);
  const auto by_id = index_by_id(records);

  std::map<ScenarioClass, DeviationProfile> profiles;
  std::vector<std::pair<fs::path, std::string>> docs;
  std::vector<std::string> curve_rows, point_rows;

  for (const auto& cal : cals) {
    if (!selected(opt.scenarios, cal.scenario)) continue;
    const std::string scen(to_string(cal.scenario));
    auto pit = profiles.find(cal.scenario);
    if (pit == profiles.end()) {
      const auto calib = records_in(sp, by_id, cal.scenario, {0, 1});
      if (calib.empty()) throw InsufficientData(scen, "no calibration records in split.csv");
      pit = profiles.emplace(cal.scenario, compute_deviation_profile(calib)).first;
    }
    const DeviationProfile& profile = pit->second;
    const std::string alpha = format_number(cal.level.alpha);
    const std::string method(to_string(cal.level.method));

    for (Direction dir : {Direction::Longitudinal, Direction::Lateral}) {
      const TrainingData data = pair_training_data(profile, cal, dir);
      std::vector<ReliabilityModel> models;
      try {
        models = fit_scenario_models(data, cal.scenario, dir);
      } catch (const FitDiverged& e) {
        throw FitDiverged(fmt::format("{} alpha {} {} direction {}: {}", scen, alpha, method,
                                      direction_tag(dir), e.what()));
      } catch (const InsufficientPoints& e) {
        throw InsufficientPoints(fmt::format("{} alpha {} {} direction {}: {}", scen, alpha,
                                             method, direction_tag(dir), e.what()));
      }
      for (const auto& m : models) {
        const ReliabilityDocument doc{m, cal.level.alpha, cal.level.method};
        docs.emplace_back(reliability_path(opt.out, doc), serialize_reliability(doc));
        const std::size_t n = std::max<std::size_t>(opt.curve_samples, 2);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = m.x_min + (m.x_max - m.x_min) * static_cast<double>(i) /
                                         static_cast<double>(n - 1);
          curve_rows.push_back(fmt::format("{},{},{},{},{},{},{}", scen, alpha, method,
                                           direction_tag(dir), to_string(m.segment),
                                           format_number(x), format_number(m.predict(x).value)));
        }
        for (std::size_t t = m.step_begin; t < m.step_end; ++t) {
          const auto& p = data.points[t];
          point_rows.push_back(fmt::format("{},{},{},{},{},{},{},{}", scen, alpha, method,
                                           direction_tag(dir), to_string(m.segment), t,
                                           format_number(p.x), format_number(p.y)));
        }
      }
    }
  }

  remove_stale(opt.out / "reliability", ".json");
  for (const auto& [path, text] : docs) write_file_atomic(path, text);
  for (const auto& [scenario, profile] : profiles) {
    write_file_atomic(opt.out / "profiles" / (std::string(to_string(scenario)) + ".json"),
                      serialize_profile({scenario, profile}));
  }
  write_file_atomic(opt.out / "reliability_curves.csv",
                    join_lines("scenario,alpha,method,direction,segment,x,y", curve_rows));
  write_file_atomic(opt.out / "reliability_points.csv",
                    join_lines("scenario,alpha,method,direction,segment,step,x,y", point_rows));
}

void run_discriminate(const DiscriminateOptions& opt) {
  require_out(opt.out);
  opt.risk.validate();
  const auto cals = load_calibrations(opt.out);
  std::vector<ReliabilityDocument> rel;
  std::map<ScenarioClass, DeviationProfile> profiles;
  if (opt.risk.source == RiskSource::RmPredictedBound) rel = load_reliability(opt.out);

  std::vector<std::string> rows;
  for (const auto& cal : cals) {
    if (!selected(opt.scenarios, cal.scenario)) continue;
    CriticalPointReport rep;
    if (opt.risk.source == RiskSource::RmPredictedBound) {
      auto pit = profiles.find(cal.scenario);
      if (pit == profiles.end()) {
        const fs::path p = opt.out / "profiles" / (std::string(to_string(cal.scenario)) + ".json");
        pit = profiles.emplace(cal.scenario, parse_profile(read_file(p)).profile).first;
      }
      const auto models = models_for(rel, cal);
      if (models.empty()) {
        throw MissingArtifact(opt.out / "reliability" /
                              (cell_stem(cal.scenario, cal.level.alpha, cal.level.method) + "_*.json"));
      }
      rep = critical_point(cal, opt.risk, pit->second, models);
    } else {
      rep = critical_point(cal, opt.risk);
    }
    rows.push_back(critical_csv_row(rep));
  }
  write_file_atomic(opt.out / "critical_points.csv", join_lines(kCriticalCsvHeader, rows));
}

void run_report(const ReportOptions& opt) {
  require_out(opt.out);
  const fs::path metrics_path = opt.out / "metrics.csv";
  const fs::path critical_path = opt.out / "critical_points.csv";
  const Csv metrics = read_csv(metrics_path);
  const Csv critical = read_csv(critical_path);
  const auto cals = load_calibrations(opt.out);
  const auto rel = load_reliability(opt.out);
  const StoredSplit sp = load_split(opt.out);
  const auto records = load_input(opt.input);
  const auto by_id = index_by_id(records);

  const auto key_of = [](const std::string& s, const std::string& a, const std::string& m) {
    return s + "," + a + "," + m;
  };

  // metrics: scenario, alpha, method -> (area, coverage, n_test)
  std::map<std::string, std::vector<std::string>> metric_of;
  std::vector<std::pair<std::string, std::string>> cells;  // (scenario, alpha), first-seen order
  {
    const std::size_t cs = metrics.column("scenario", metrics_path);
    const std::size_t ca = metrics.column("alpha", metrics_path);
    const std::size_t cm = metrics.column("method", metrics_path);
    const std::size_t carea = metrics.column("avg_area_size", metrics_path);
    const std::size_t ccov = metrics.column("joint_coverage", metrics_path);
    const std::size_t cn = metrics.column("n_test", metrics_path);
    for (const auto& row : metrics.rows) {
      metric_of[key_of(row[cs], row[ca], row[cm])] = {row[carea], row[ccov], row[cn]};
      const std::pair<std::string, std::string> cell{row[cs], row[ca]};
      if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
    }
  }

  struct CriticalRow {
    std::string t_s, t_d, t_joint;
    RiskConfig cfg;
  };
  std::map<std::string, CriticalRow> critical_of;
  {
    const std::size_t cs = critical.column("scenario", critical_path);
    const std::size_t ca = critical.column("alpha", critical_path);
    const std::size_t cm = critical.column("method", critical_path);
    const std::size_t cr = critical.column("r", critical_path);
    const std::size_t ccs = critical.column("c_s", critical_path);
    const std::size_t ccd = critical.column("c_d", critical_path);
    const std::size_t cts = critical.column("critical_t_s", critical_path);
    const std::size_t ctd = critical.column("critical_t_d", critical_path);
    const std::size_t ctj = critical.column("critical_t_joint", critical_path);
    for (const auto& row : critical.rows) {
      CriticalRow c{row[cts], row[ctd], row[ctj], {}};
      try {
        c.cfg.threshold_r = std::stod(row[cr]);
        c.cfg.c_s = std::stod(row[ccs]);
        c.cfg.c_d = std::stod(row[ccd]);
      } catch (const std::exception&) {
        throw SchemaError(0, {}, fmt::format("{}: malformed risk parameters", critical_path.string()));
      }
      critical_of[key_of(row[cs], row[ca], row[cm])] = c;
    }
  }

  std::string header = "scenario,alpha,n_test";
  for (Method m : {Method::CopulaShared, Method::Bonferroni}) {
    for (const char* col : {"avg_area_size", "joint_coverage", "critical_t_s", "critical_t_d",
                            "critical_t_joint", "rm_rmse_s", "rm_rmse_d"}) {
      header += fmt::format(",{}_{}", to_string(m), col);
    }
  }

  std::vector<std::string> rows;
  for (const auto& [scen, alpha] : cells) {
    std::string n_test;
    std::string tail;
    for (Method m : {Method::CopulaShared, Method::Bonferroni}) {
      const std::string key = key_of(scen, alpha, std::string(to_string(m)));
      const auto mit = metric_of.find(key);
      const auto cit = critical_of.find(key);
      if (mit != metric_of.end()) {
        if (n_test.empty()) n_test = mit->second[2];
        tail += fmt::format(",{},{}", mit->second[0], mit->second[1]);
      } else {
        tail += ",,";
      }
      if (cit != critical_of.end()) {
        tail += fmt::format(",{},{},{}", cit->second.t_s, cit->second.t_d, cit->second.t_joint);
      } else {
        tail += ",,,";
      }
      std::vector<ReliabilityModel> models;
      for (const auto& doc : rel) {
        if (to_string(doc.model.scenario) == scen && format_number(doc.alpha) == alpha &&
            doc.method == m) {
          models.push_back(doc.model);
        }
      }
      for (Direction dir : {Direction::Longitudinal, Direction::Lateral}) {
        bool any = false;
        const double r = combined_rmse(models, dir, any);
        tail += any ? "," + format_number(r) : std::string(",");
      }
    }
    rows.push_back(fmt::format("{},{},{}{}", scen, alpha, n_test, tail));
  }

  const fs::path plots = opt.out / "plots";
  std::vector<std::pair<fs::path, std::string>> files;
  std::map<ScenarioClass, std::vector<ScenarioRecord>> shown;
  for (const auto& cal : cals) {
    auto sit = shown.find(cal.scenario);
    if (sit == shown.end()) {
      auto test = records_in(sp, by_id, cal.scenario, {2});
      if (test.size() > opt.plot_records) {
        test.erase(test.begin() + static_cast<std::ptrdiff_t>(opt.plot_records), test.end());
      }
      sit = shown.emplace(cal.scenario, std::move(test)).first;
      std::string truth = "record_id,t,x,y\n";
      for (const auto& r : sit->second) {
        for (std::size_t t = 0; t < r.truth.size(); ++t) {
          FrenetPoint f = r.truth[t];
          f.s = std::clamp(f.s, 0.0, r.route.length());
          const PlanarPoint p = unproject(r.route, f);
          truth += fmt::format("{},{},{},{}\n", r.id, t, format_number(p.x), format_number(p.y));
        }
      }
      files.emplace_back(plots / fmt::format("truth_{}.csv", to_string(cal.scenario)), truth);
    }
    const std::string stem = cell_stem(cal.scenario, cal.level.alpha, cal.level.method);
    std::string bands = "record_id,mode,t,corner,x,y\n";
    for (const auto& r : sit->second) {
      const IntervalBand band = build_band(r.forecast, cal);
      for (std::size_t k = 0; k < band.modes(); ++k) {
        for (std::size_t t = 0; t < band.horizon(); ++t) {
          const FrenetBox& box = band.at(k, t);
          const FrenetPoint corners[4] = {{box.s_min(), box.d_min()},
                                          {box.s_max(), box.d_min()},
                                          {box.s_max(), box.d_max()},
                                          {box.s_min(), box.d_max()}};
          for (int c = 0; c < 4; ++c) {
            FrenetPoint f = corners[c];
            f.s = std::clamp(f.s, 0.0, r.route.length());
            const PlanarPoint p = unproject(r.route, f);
            bands += fmt::format("{},{},{},{},{},{}\n", r.id, k, t, c, format_number(p.x),
                                 format_number(p.y));
          }
        }
      }
    }
    files.emplace_back(plots / fmt::format("bands_{}.csv", stem), bands);

    const auto cit = critical_of.find(key_of(std::string(to_string(cal.scenario)),
                                             format_number(cal.level.alpha),
                                             std::string(to_string(cal.level.method))));
    if (cit != critical_of.end()) {
      const RiskConfig& cfg = cit->second.cfg;
      std::string risk = "t,s_width,d_width,risk\n";
      for (std::size_t t = 0; t < cal.horizon(); ++t) {
        const double qs = cal.quantiles.q_s[t];
        const double qd = cal.quantiles.q_d[t];
        risk += fmt::format("{},{},{},{}\n", format_number(static_cast<double>(t) * cal.dt),
                            format_number(qs), format_number(qd),
                            format_number(risk_at(qs, qd, cfg)));
      }
      files.emplace_back(plots / fmt::format("risk_{}.csv", stem), risk);
    }
  }

  remove_stale(plots, ".csv");
  for (const auto& [path, text] : files) write_file_atomic(path, text);
  write_file_atomic(opt.out / "summary.csv", join_lines(header, rows));
}

}  // namespace frenetcp::cli
