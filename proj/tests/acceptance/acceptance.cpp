#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "frenetcp/copula_calibration.hpp"
#include "frenetcp/intervals_metrics.hpp"
#include "frenetcp/nonconformity.hpp"
#include "frenetcp/reliability_model.hpp"
#include "frenetcp/risk_discriminator.hpp"
#include "frenetcp/route_geometry.hpp"
#include "frenetcp/synthetic_scenarios.hpp"
#include "test_support.hpp"

using namespace frenetcp;
namespace fs = std::filesystem;

namespace {

constexpr std::array<double, 3> kAlphas = {0.2, 0.1, 0.05};
constexpr std::array<Method, 2> kMethods = {Method::CopulaShared, Method::Bonferroni};

struct Outcome {
  bool pass = true;
  std::vector<std::string> failures;
  std::string summary;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 8) failures.push_back(what);
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1 and 2: coverage validity and monotone trends

struct CellResult {
  double coverage = 0.0;
  double area = 0.0;
};

using CellKey = std::tuple<ScenarioClass, Method, double>;

std::map<CellKey, CellResult> g_cells;

SynthConfig coverage_config(ScenarioClass c, std::size_t n, std::uint64_t seed) {
  SynthConfig cfg = SynthConfig::defaults_for(c);
  cfg.horizon = 16;
  cfg.dt = 0.5;
  cfg.error_growth = 1.16;
  cfg.dependence = StepDependence::ar1(0.6);
  cfg.modes = 1;
  cfg.n_records = n;
  cfg.seed = seed;
  return cfg;
}

Outcome coverage_validity() {
  Outcome out;
  double worst_margin = std::numeric_limits<double>::infinity();
  double slowest = 0.0;
  std::uint64_t seed = 1000;
  for (ScenarioClass c : kAllScenarios) {
    const auto calib = generate(coverage_config(c, 2000, seed++));
    const auto test = generate(coverage_config(c, 2000, seed++));
    SplitResult s;
    s.calib_d1.assign(calib.begin(), calib.begin() + 1000);
    s.calib_d2.assign(calib.begin() + 1000, calib.end());
    for (double alpha : kAlphas) {
      for (Method m : kMethods) {
        const std::string label =
            fmt::format("{} alpha={} {}", to_string(c), alpha, to_string(m));
        const auto start = Clock::now();
        try {
          const CalibrationResult cal = calibrate_scenario(s, alpha, m).at(c);
          const MetricsReport rep = evaluate(test, cal);
          const double elapsed = seconds_since(start);
          slowest = std::max(slowest, elapsed);
          g_cells[{c, m, alpha}] = {rep.joint_coverage, rep.avg_area_size};
          const double margin = rep.joint_coverage - (1.0 - alpha - 0.02);
          worst_margin = std::min(worst_margin, margin);
          out.check(margin >= 0.0, fmt::format("{} coverage {}", label, rep.joint_coverage));
          out.check(elapsed < 30.0, fmt::format("{} took {:.1f} s", label, elapsed));
        } catch (const std::exception& e) {
          out.check(false, fmt::format("{}: {}", label, e.what()));
        }
      }
    }
  }
  out.summary = fmt::format("24 cells, worst coverage margin {:+.4f}, slowest cell {:.2f} s",
                            worst_margin, slowest);
  return out;
}

Outcome monotone_trends() {
  Outcome out;
  std::size_t chains = 0;
  for (ScenarioClass c : kAllScenarios) {
    for (Method m : kMethods) {
      for (std::size_t i = 1; i < kAlphas.size(); ++i) {
        const auto prev = g_cells.find({c, m, kAlphas[i - 1]});
        const auto cur = g_cells.find({c, m, kAlphas[i]});
        const std::string label = fmt::format("{} {} alpha {} -> {}", to_string(c), to_string(m),
                                              kAlphas[i - 1], kAlphas[i]);
        if (prev == g_cells.end() || cur == g_cells.end()) {
          out.check(false, label + ": cell missing");
          continue;
        }
        out.check(cur->second.area >= prev->second.area, label + ": area decreased");
        out.check(cur->second.coverage >= prev->second.coverage, label + ": coverage decreased");
        ++chains;
      }
    }
  }
  out.summary = fmt::format("{} alpha steps checked on area and coverage", chains);
  return out;
}

// ---------------------------------------------------------------------------
// 3: copula efficiency

void append_scores(ScoreMatrix& dst, std::size_t& row, const ScoreMatrix& src) {
  for (std::size_t i = 0; i < src.records(); ++i, ++row) {
    for (std::size_t t = 0; t < src.horizon(); ++t) dst.at(row, t) = src.at(i, t);
  }
}

// Scores of n records, generated in chunks so the routes never all sit in memory.
ScoreMatrix chunked_scores(SynthConfig cfg, std::size_t n) {
  const std::size_t chunk = 10000;
  ScoreMatrix all(n, cfg.horizon);
  std::size_t row = 0;
  const std::uint64_t base = cfg.seed;
  for (std::size_t done = 0; done < n; done += chunk) {
    cfg.n_records = std::min(chunk, n - done);
    cfg.seed = base + done / chunk;
    append_scores(all, row, score_matrix(generate(cfg)));
  }
  return all;
}

ScoreMatrix rows(const ScoreMatrix& m, std::size_t begin, std::size_t end) {
  ScoreMatrix out(end - begin, m.horizon());
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t t = 0; t < m.horizon(); ++t) out.at(i - begin, t) = m.at(i, t);
  }
  return out;
}

Outcome copula_efficiency() {
  Outcome out;
  const std::size_t n = 200000;
  double worst_comonotone = 0.0;
  double worst_independent = 0.0;
  for (const StepDependence dep : {StepDependence::comonotone(), StepDependence::independent()}) {
    SynthConfig cfg = SynthConfig::defaults_for(ScenarioClass::NormalDriving);
    cfg.horizon = 8;
    cfg.modes = 1;
    cfg.dependence = dep;
    cfg.seed = dep.kind == StepDependence::Kind::Comonotone ? 30000 : 40000;
    const ScoreMatrix pooled = chunked_scores(cfg, n);
    const ScoreMatrix d1 = rows(pooled, 0, n / 2);
    const ScoreMatrix d2 = rows(pooled, n / 2, n);
    for (double alpha : kAlphas) {
      const double copula =
          avg_area_size(calibrate_copula(cfg.scenario, d1, d2, alpha, cfg.dt));
      const double bonferroni =
          avg_area_size(calibrate_bonferroni(cfg.scenario, pooled, alpha, cfg.dt));
      const double ratio = copula / bonferroni;
      if (dep.kind == StepDependence::Kind::Comonotone) {
        worst_comonotone = std::max(worst_comonotone, ratio);
        out.check(copula <= 0.7 * bonferroni,
                  fmt::format("comonotone alpha={} ratio {:.4f}", alpha, ratio));
      } else {
        worst_independent = std::max(worst_independent, ratio);
        out.check(copula <= bonferroni + 1e-9,
                  fmt::format("independent alpha={} copula {} > bonferroni {}", alpha, copula,
                              bonferroni));
      }
    }
  }
  out.summary = fmt::format(
      "T_f=8, n_calib={}, worst area ratio comonotone {:.3f}, independent {:.4f}", n,
      worst_comonotone, worst_independent);
  return out;
}

// ---------------------------------------------------------------------------
// 4: oracle equivalences

double sort_oracle(std::vector<double> v, double alpha) {
  std::sort(v.begin(), v.end());
  const double level = (1.0 - alpha) * static_cast<double>(v.size() + 1);
  std::size_t k = 1;
  while (static_cast<double>(k) < level - 1e-9) ++k;
  return v.at(k - 1);
}

bool covered_oracle(const ScenarioRecord& r, const QuantileVector& q) {
  for (std::size_t k = 0; k < r.forecast.modes(); ++k) {
    bool all = true;
    for (std::size_t t = 0; t < r.horizon() && all; ++t) {
      all = std::abs(r.truth[t].s - r.forecast.at(k, t).s) <= q.q_s[t] &&
            std::abs(r.truth[t].d - r.forecast.at(k, t).d) <= q.q_d[t];
    }
    if (all) return true;
  }
  return false;
}

std::optional<double> first_crossing(const std::vector<double>& w, double c, double r, double dt) {
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (1.0 / (1.0 + c * std::exp(-w[t])) > r) return static_cast<double>(t) * dt;
  }
  return std::nullopt;
}

Outcome oracle_equivalences() {
  Outcome out;
  const int instances = 200;
  support::Rng rng(4242);

  for (int i = 0; i < instances; ++i) {
    const std::size_t n = rng.index(1, 400);
    std::vector<double> v(n);
    for (double& x : v) x = std::abs(rng.normal(1.5));
    if (i % 5 == 0) {
      for (double& x : v) x = std::round(x * 4.0) / 4.0;  // heavy ties
    }
    const double alpha = rng.uniform(0.01, 0.5);
    if (conformal_rank(alpha, n) > n) continue;
    out.check(quantile(v, alpha) == sort_oracle(v, alpha), fmt::format("quantile instance {}", i));
  }

  for (int i = 0; i < instances; ++i) {
    const std::size_t k = rng.index(1, 5), t_f = rng.index(1, 8);
    std::vector<ScenarioRecord> rs;
    for (int j = 0; j < 50; ++j) rs.push_back(support::random_record(rng, k, t_f));
    CalibrationResult cal;
    cal.quantiles.q_s.resize(t_f);
    cal.quantiles.q_d.resize(t_f);
    for (std::size_t t = 0; t < t_f; ++t) {
      cal.quantiles.q_s[t] = rng.uniform(0.1, 2.5);
      cal.quantiles.q_d[t] = rng.uniform(0.1, 2.5);
    }
    std::size_t hits = 0;
    for (const auto& r : rs) hits += covered_oracle(r, cal.quantiles) ? 1 : 0;
    out.check(joint_coverage(rs, cal) == static_cast<double>(hits) / 50.0,
              fmt::format("coverage instance {}", i));

    const ScenarioRecord& r = rs.front();
    const auto scores = score(r);
    for (std::size_t t = 0; t < t_f; ++t) {
      double best_s = std::numeric_limits<double>::infinity(), best_d = best_s;
      for (std::size_t m = 0; m < k; ++m) {
        best_s = std::min(best_s, std::abs(r.forecast.at(m, t).s - r.truth[t].s));
        best_d = std::min(best_d, std::abs(r.forecast.at(m, t).d - r.truth[t].d));
      }
      out.check(scores[t].s == best_s && scores[t].d == best_d,
                fmt::format("score instance {} step {}", i, t));
    }
  }

  for (int i = 0; i < instances; ++i) {
    const std::size_t t_f = rng.index(1, 40);
    std::vector<double> ws(t_f), wd(t_f);
    for (std::size_t t = 0; t < t_f; ++t) {
      ws[t] = rng.uniform(0.0, 3.0);
      wd[t] = rng.uniform(0.0, 3.0);
    }
    RiskConfig cfg;
    cfg.c_s = rng.uniform(0.2, 3.0);
    cfg.c_d = rng.uniform(0.2, 3.0);
    cfg.threshold_r = rng.uniform(0.5, 0.95);
    const CriticalPointReport rep = critical_point_from_widths(ws, wd, 0.1, cfg);
    const auto ts = first_crossing(ws, cfg.c_s, cfg.threshold_r, 0.1);
    const auto td = first_crossing(wd, cfg.c_d, cfg.threshold_r, 0.1);
    std::optional<double> joint;
    if (ts || td) {
      joint = std::min(ts.value_or(std::numeric_limits<double>::infinity()),
                       td.value_or(std::numeric_limits<double>::infinity()));
    }
    out.check(rep.critical_t_s == ts && rep.critical_t_d == td && rep.critical_t_joint == joint,
              fmt::format("critical point instance {}", i));
  }
  out.summary = fmt::format("{} instances each: quantile, coverage, score, joint critical point",
                            instances);
  return out;
}

// ---------------------------------------------------------------------------
// 5: geometry round trip

struct Corridor {
  std::string name;
  std::vector<PlanarPoint> vertices;
  double max_d;
};

Outcome geometry_round_trip() {
  Outcome out;
  std::vector<Corridor> routes;
  routes.push_back({"straight", {{0, 0}, {200, 0}}, 5.0});
  routes.push_back({"right-angle", {{0, 0}, {50, 0}, {50, 50}}, 5.0});
  {
    std::vector<PlanarPoint> arc;
    const double radius = 30.0;
    for (int i = 0; i <= 60; ++i) {
      const double a = std::numbers::pi * i / 60.0;
      arc.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    routes.push_back({"arc", arc, 5.0});
  }

  support::Rng rng(5);
  double worst = 0.0;
  const int per_route = 10000;
  for (const Corridor& c : routes) {
    const ReferenceRoute route(c.vertices);
    const std::size_t segs = c.vertices.size() - 1;
    double base = 0.0;
    std::vector<double> cum = {0.0};
    for (std::size_t i = 0; i < segs; ++i) {
      base += std::hypot(c.vertices[i + 1].x - c.vertices[i].x, c.vertices[i + 1].y - c.vertices[i].y);
      cum.push_back(base);
    }
    int accepted = 0;
    while (accepted < per_route) {
      const std::size_t seg = rng.index(0, segs - 1);
      const PlanarPoint a = c.vertices[seg], b = c.vertices[seg + 1];
      const double len = cum[seg + 1] - cum[seg];
      // Keep the perpendicular foot strictly inside its own segment's wedge.
      double turn = 0.0;
      auto angle = [&](std::size_t i) {
        return std::atan2(c.vertices[i + 1].y - c.vertices[i].y, c.vertices[i + 1].x - c.vertices[i].x);
      };
      auto bend = [&](std::size_t i) {
        return std::abs(std::remainder(angle(i + 1) - angle(i), 2.0 * std::numbers::pi));
      };
      if (seg > 0) turn = std::max(turn, bend(seg - 1));
      if (seg + 1 < segs) turn = std::max(turn, bend(seg));
      const double d = rng.uniform(-c.max_d, c.max_d);
      const double margin = std::abs(d) * std::tan(turn / 2.0) + 1e-3;
      if (len <= 2.0 * margin) continue;
      const double u = rng.uniform(margin, len - margin);
      const double tx = (b.x - a.x) / len, ty = (b.y - a.y) / len;
      const PlanarPoint p{a.x + u * tx - d * ty, a.y + u * ty + d * tx};
      const FrenetPoint expected{cum[seg] + u, d};

      const FrenetPoint f = project(route, p);
      const PlanarPoint p_back = unproject(route, f);
      const PlanarPoint q = unproject(route, expected);
      const FrenetPoint f_back = project(route, q);
      const double err = std::max({std::abs(f.s - expected.s), std::abs(f.d - expected.d),
                                   std::hypot(p_back.x - p.x, p_back.y - p.y),
                                   std::abs(f_back.s - expected.s), std::abs(f_back.d - expected.d)});
      worst = std::max(worst, err);
      out.check(err < 1e-9, fmt::format("{} point ({}, {}) error {:.3g}", c.name, p.x, p.y, err));
      ++accepted;
    }
  }
  out.summary = fmt::format("{} points on each of 3 routes, worst error {:.3g} m", per_route, worst);
  return out;
}

// ---------------------------------------------------------------------------
// 6: reliability fit recovery

double closed_form(const ReliabilityCoefficients& c, double x) {
  double y = 0.0;
  if (c.active.polynomial) y += ((c.a * x + c.b) * x + c.c) * x + c.d;
  if (c.active.exponential) y += c.f * std::exp(c.g * x + c.h);
  if (c.active.sigmoid_derivative) {
    const double e = std::exp(-c.m * x);
    y += c.k * c.m * e / ((e + c.z) * (e + c.z));
  }
  return y;
}

struct FitCase {
  std::string name;
  ReliabilityCoefficients truth;
  double lo, hi;
};

std::vector<FitCase> fit_cases() {
  std::vector<FitCase> cases;
  ReliabilityCoefficients pe;
  pe.active = {true, true, false};
  pe.a = 0.01, pe.c = 0.2, pe.d = 0.1, pe.f = 0.05, pe.g = 0.8;
  cases.push_back({"P+E", pe, 0.0, 3.0});

  ReliabilityCoefficients psd;
  psd.active = {true, false, true};
  psd.a = 0.02, psd.b = -0.1, psd.c = 0.5, psd.d = 0.2, psd.k = 2.0, psd.m = 1.5, psd.z = 0.5;
  cases.push_back({"P+SD", psd, 0.0, 4.0});

  ReliabilityCoefficients all;
  all.active = {true, true, true};
  all.a = 0.01, all.b = 0.05, all.c = 0.3, all.d = 0.1, all.f = 0.1, all.g = 0.6, all.k = 1.5,
  all.m = 2.0, all.z = 0.8;
  cases.push_back({"P+SD+E", all, 0.0, 3.0});

  ReliabilityCoefficients p;
  p.active.polynomial = true;
  p.a = 0.3, p.b = -1.0, p.c = 2.0, p.d = 0.5;
  cases.push_back({"P", p, 0.0, 4.0});
  return cases;
}

Outcome fit_recovery() {
  Outcome out;
  const std::size_t n_points = 40;
  double worst_noisy = 0.0, worst_exact = 0.0;
  support::Rng rng(66);
  for (const FitCase& fc : fit_cases()) {
    for (const double sigma : {0.01, 0.0}) {
      std::vector<TrainingPoint> pts;
      for (std::size_t i = 0; i < n_points; ++i) {
        const double x = fc.lo + (fc.hi - fc.lo) * static_cast<double>(i) / (n_points - 1);
        pts.push_back({x, closed_form(fc.truth, x) + (sigma > 0 ? rng.normal(sigma) : 0.0)});
      }
      try {
        const FitReport rep = fit_coefficients(pts, fc.truth.active);
        if (sigma > 0) {
          double sum = 0.0;
          const int grid = 400;
          for (int i = 0; i <= grid; ++i) {
            const double x = fc.lo + (fc.hi - fc.lo) * i / grid;
            const double e = rm_eval(rep.coeffs, x).value - closed_form(fc.truth, x);
            sum += e * e;
          }
          const double rmse = std::sqrt(sum / (grid + 1));
          worst_noisy = std::max(worst_noisy, rmse);
          out.check(rmse < 0.05, fmt::format("{} noisy curve rmse {:.4g}", fc.name, rmse));
        } else {
          worst_exact = std::max(worst_exact, rep.rmse);
          out.check(rep.rmse < 1e-6, fmt::format("{} exact residual {:.3g}", fc.name, rep.rmse));
        }
      } catch (const std::exception& e) {
        out.check(false, fmt::format("{} sigma={}: {}", fc.name, sigma, e.what()));
      }
    }
  }
  out.summary = fmt::format("P+E, P+SD, P+SD+E, P: worst noisy curve rmse {:.4f} m, "
                            "worst exact residual {:.3g}",
                            worst_noisy, worst_exact);
  return out;
}

// ---------------------------------------------------------------------------
// 7: critical-point trend

constexpr std::array<double, 5> kThresholds = {0.6, 0.7, 0.8, 0.9, 0.95};

double or_inf(const std::optional<double>& t) {
  return t.value_or(std::numeric_limits<double>::infinity());
}

Outcome critical_point_trend() {
  Outcome out;
  std::size_t defined = 0, total = 0;
  for (ScenarioClass c : kAllScenarios) {
    SynthConfig cfg = SynthConfig::defaults_for(c);
    cfg.n_records = 8000;
    cfg.seed = 7000 + static_cast<std::uint64_t>(c);
    const SplitResult s = split(generate(cfg), {});
    for (Method m : kMethods) {
      // reports[alpha index][threshold index]
      std::vector<std::vector<CriticalPointReport>> reports;
      try {
        for (double alpha : kAlphas) {
          const CalibrationResult cal = calibrate_scenario(s, alpha, m).at(c);
          auto& row = reports.emplace_back();
          for (double r : kThresholds) {
            RiskConfig rc;
            rc.threshold_r = r;
            row.push_back(critical_point(cal, rc));
          }
        }
      } catch (const std::exception& e) {
        out.check(false, fmt::format("{} {}: {}", to_string(c), to_string(m), e.what()));
        continue;
      }
      auto points = [](const CriticalPointReport& rep) {
        return std::array<double, 3>{or_inf(rep.critical_t_s), or_inf(rep.critical_t_d),
                                     or_inf(rep.critical_t_joint)};
      };
      for (std::size_t a = 0; a < kAlphas.size(); ++a) {
        for (std::size_t r = 0; r < kThresholds.size(); ++r) {
          const auto cur = points(reports[a][r]);
          for (double t : cur) {
            ++total;
            defined += std::isfinite(t) ? 1 : 0;
          }
          const std::string label = fmt::format("{} {} alpha={} r={}", to_string(c),
                                                to_string(m), kAlphas[a], kThresholds[r]);
          for (std::size_t i = 0; i < 3; ++i) {
            if (a > 0) {
              out.check(cur[i] <= points(reports[a - 1][r])[i], label + ": later than larger alpha");
            }
            if (r > 0) {
              out.check(cur[i] >= points(reports[a][r - 1])[i], label + ": earlier than smaller r");
            }
          }
        }
      }
    }
  }
  out.check(defined > 0, "no critical point defined anywhere");

  std::size_t zero_cells = 0;
  for (ScenarioClass c : kAllScenarios) {
    SynthConfig cfg = SynthConfig::defaults_for(c);
    cfg.n_records = 8000;
    cfg.noise_scale_s = 0.0;
    cfg.noise_scale_d = 0.0;
    cfg.seed = 8000 + static_cast<std::uint64_t>(c);
    const SplitResult s = split(generate(cfg), {});
    for (Method m : kMethods) {
      for (double alpha : kAlphas) {
        try {
          const CalibrationResult cal = calibrate_scenario(s, alpha, m).at(c);
          for (double r : kThresholds) {
            RiskConfig rc;
            rc.threshold_r = r;
            const CriticalPointReport rep = critical_point(cal, rc);
            out.check(!rep.critical_t_s && !rep.critical_t_d && !rep.critical_t_joint,
                      fmt::format("zero noise {} {} alpha={} r={} has a critical point",
                                  to_string(c), to_string(m), alpha, r));
            ++zero_cells;
          }
        } catch (const std::exception& e) {
          out.check(false, fmt::format("zero noise {} {}: {}", to_string(c), to_string(m), e.what()));
        }
      }
    }
  }
  out.summary = fmt::format("{}/{} points defined, ordering exact in alpha and r; "
                            "{} zero-noise cells without a critical point",
                            defined, total, zero_cells);
  return out;
}

// ---------------------------------------------------------------------------
// 8: risk function

Outcome risk_function() {
  Outcome out;
  std::vector<double> widths;
  for (int i = 0; i <= 600; ++i) widths.push_back(0.05 * i);  // 0..30, where steps stay resolvable
  const std::vector<double> extreme = {40.0, 100.0, 1e3, 1e100, std::numeric_limits<double>::max()};
  const std::vector<double> cs = {0.05, 0.5, 1.0, 2.0, 10.0};
  std::size_t checks = 0;

  auto in_unit = [&](double v, const std::string& label) {
    out.check(v > 0.0 && v < 1.0, fmt::format("{} = {} outside (0,1)", label, v));
    ++checks;
  };
  for (double c_s : cs) {
    for (double c_d : cs) {
      RiskConfig cfg;
      cfg.c_s = c_s;
      cfg.c_d = c_d;
      for (double s : widths) {
        for (std::size_t j = 0; j < widths.size(); j += 20) {
          const double d = widths[j];
          const double v = risk_at(s, d, cfg);
          in_unit(v, fmt::format("risk_at({}, {}) c=({}, {})", s, d, c_s, c_d));
        }
      }
      for (double w : extreme) {
        in_unit(risk_at(w, 0.0, cfg), fmt::format("risk_at({}, 0)", w));
        in_unit(risk_at(0.0, w, cfg), fmt::format("risk_at(0, {})", w));
        in_unit(risk_at(w, w, cfg), fmt::format("risk_at({}, {})", w, w));
      }
    }
  }

  // Each directional term rises strictly with its width; the joint risk
  // rises strictly when both widths grow together.
  for (double c : cs) {
    RiskConfig cfg;
    cfg.c_s = c;
    cfg.c_d = c;
    for (std::size_t i = 1; i < widths.size(); ++i) {
      const double w0 = widths[i - 1], w1 = widths[i];
      out.check(directional_risk(w1, c) > directional_risk(w0, c),
                fmt::format("directional c={} not increasing at {}", c, w0));
      out.check(risk_at(w1, w1, cfg) > risk_at(w0, w0, cfg),
                fmt::format("joint c={} not increasing at {}", c, w0));
      for (std::size_t j = 0; j < widths.size(); j += 20) {
        const double other = widths[j];
        out.check(risk_at(w1, other, cfg) >= risk_at(w0, other, cfg),
                  fmt::format("joint c={} decreased in s at ({}, {})", c, w0, other));
        out.check(risk_at(other, w1, cfg) >= risk_at(other, w0, cfg),
                  fmt::format("joint c={} decreased in d at ({}, {})", c, other, w0));
        if (other <= w0) {
          out.check(risk_at(w1, other, cfg) > risk_at(w0, other, cfg),
                    fmt::format("joint c={} flat in dominant s at ({}, {})", c, w0, other));
        }
      }
      checks += 2;
    }
  }

  RiskConfig unit;
  out.check(risk_at(0.0, 0.0, unit) == 0.5, "risk_at(0, 0) with c=1 is not 0.5");
  RiskConfig mixed;
  mixed.c_s = 3.0;
  const double one = risk_at(1.0, 1.0, mixed);
  out.check(std::abs(one - 0.7311) <= 1e-4, fmt::format("risk at width 1 is {}", one));
  out.check(std::abs(directional_risk(1.0, 1.0) - 0.7311) <= 1e-4, "directional risk at width 1");
  out.summary = fmt::format("{} range and slope checks over widths 0..30 plus extremes; "
                            "risk(0,0)=0.5, risk(1,1)={:.6f}",
                            checks, one);
  return out;
}

// ---------------------------------------------------------------------------
// 9: determinism

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      fmt::format("\"{}\" {} > \"{}\" 2>&1", FRENETCP_CLI_PATH, args, log.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() == ".log") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[fs::relative(entry.path(), root).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

Outcome determinism() {
  Outcome out;
  const fs::path base =
      fs::temp_directory_path() / fmt::format("frenetcp_acceptance_{}", ::getpid());
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = base / fmt::format("run{}", run);
    fs::create_directories(dir);
    const std::string in = (dir / "records.jsonl").string(), res = (dir / "out").string();
    const fs::path log = dir / "cli.log";
    const std::vector<std::string> stages = {
        fmt::format("synth --seed 11 --out {}", in),
        fmt::format("calibrate --input {} --out {} --seed 12", in, res),
        fmt::format("evaluate --input {} --out {}", in, res),
        fmt::format("fit-reliability --input {} --out {}", in, res),
        fmt::format("discriminate --out {}", res),
        fmt::format("discriminate --out {} --risk-source rm", res),
        fmt::format("report --input {} --out {}", in, res),
    };
    for (const std::string& stage : stages) {
      const int code = run_cli(stage, log);
      out.check(code == 0, fmt::format("run {} `{}` exited {}", run, stage.substr(0, stage.find(' ')), code));
      if (code != 0) break;
    }
    runs.push_back(tree_contents(dir));
  }
  std::size_t compared = 0, bytes = 0;
  if (runs.size() == 2) {
    out.check(runs[0].size() == runs[1].size(),
              fmt::format("{} files vs {} files", runs[0].size(), runs[1].size()));
    for (const auto& [name, content] : runs[0]) {
      const auto other = runs[1].find(name);
      if (other == runs[1].end()) {
        out.check(false, name + " missing from second run");
        continue;
      }
      out.check(other->second == content, name + " differs");
      ++compared;
      bytes += content.size();
    }
  }
  out.check(compared > 20, fmt::format("only {} files produced", compared));
  std::error_code ec;
  fs::remove_all(base, ec);
  out.summary = fmt::format("{} files, {:.1f} MB, identical across two seeded runs", compared,
                            static_cast<double>(bytes) / 1e6);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "coverage validity", coverage_validity},
      {2, "monotonic trends", monotone_trends},
      {3, "copula efficiency", copula_efficiency},
      {4, "oracle equivalences", oracle_equivalences},
      {5, "geometry round trip", geometry_round_trip},
      {6, "reliability fit recovery", fit_recovery},
      {7, "critical-point trend", critical_point_trend},
      {8, "risk function", risk_function},
      {9, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.failures.push_back(std::string("uncaught: ") + e.what());
    }
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.summary.c_str(), seconds_since(start));
    for (const std::string& f : o.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
