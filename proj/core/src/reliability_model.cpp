#include "frenetcp/reliability_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "frenetcp/errors.hpp"

namespace frenetcp {

std::string TermSet::to_string() const {
  std::string out;
  const auto add = [&out](const char* name) {
    if (!out.empty()) out += '+';
    out += name;
  };
  if (polynomial) add("P");
  if (sigmoid_derivative) add("SD");
  if (exponential) add("E");
  return out;
}

std::optional<TermSet> parse_term_set(std::string_view text) {
  TermSet out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find('+', pos), text.size());
    const std::string_view tok = text.substr(pos, next - pos);
    if (tok == "P") {
      out.polynomial = true;
    } else if (tok == "E") {
      out.exponential = true;
    } else if (tok == "SD") {
      out.sigmoid_derivative = true;
    } else if (!tok.empty() || !text.empty()) {
      return std::nullopt;
    }
    pos = next + 1;
  }
  return out;
}

namespace {

double clamp_exp_arg(double arg, bool& clamped) {
  if (arg > kExpArgumentLimit) {
    clamped = true;
    return kExpArgumentLimit;
  }
  if (arg < -kExpArgumentLimit) {
    clamped = true;
    return -kExpArgumentLimit;
  }
  return arg;
}

}  // namespace

RmValue rm_eval(const ReliabilityCoefficients& c, double x) {
  RmValue out;
  double v = 0.0;
  if (c.active.polynomial) v += ((c.a * x + c.b) * x + c.c) * x + c.d;
  if (c.active.exponential) v += c.f * std::exp(clamp_exp_arg(c.g * x + c.h, out.out_of_domain));
  if (c.active.sigmoid_derivative) {
    const double u = std::exp(clamp_exp_arg(-c.m * x, out.out_of_domain));
    const double den = u + c.z;
    v += c.k * c.m * u / (den * den);
  }
  out.value = v;
  return out;
}

std::string_view to_string(Segment segment) {
  switch (segment) {
    case Segment::Whole: return "whole";
    case Segment::LaneChange1: return "lane_change_1";
    case Segment::LaneChange2: return "lane_change_2";
  }
  return "unknown";
}

std::optional<Segment> parse_segment(std::string_view name) {
  for (Segment s : {Segment::Whole, Segment::LaneChange1, Segment::LaneChange2}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

TermSet term_set_for(ScenarioClass scenario, Segment segment) {
  switch (scenario) {
    case ScenarioClass::NormalDriving: return {true, false, true};
    case ScenarioClass::LaneChange:
      return segment == Segment::LaneChange2 ? TermSet{true, false, true} : TermSet{true, true, true};
    case ScenarioClass::Intersection:
    case ScenarioClass::Roundabout: return {true, true, false};
  }
  return {true, false, false};
}

RmValue ReliabilityModel::predict(double x) const {
  const double xc = std::clamp(x, x_min, x_max);
  RmValue v = rm_eval(coeffs, xc);
  v.out_of_domain = v.out_of_domain || xc != x;
  return v;
}

DeviationProfile compute_deviation_profile(std::span<const ScenarioRecord> records) {
  if (records.empty()) throw EmptySet("deviation profile of an empty record set");
  const ScoreMatrix scores = score_matrix(records);
  DeviationProfile p;
  p.n = scores.records();
  p.mae_s.assign(scores.horizon(), 0.0);
  p.mae_d.assign(scores.horizon(), 0.0);
  for (std::size_t i = 0; i < scores.records(); ++i) {
    for (std::size_t t = 0; t < scores.horizon(); ++t) {
      p.mae_s[t] += scores.at(i, t).s;
      p.mae_d[t] += scores.at(i, t).d;
    }
  }
  for (std::size_t t = 0; t < scores.horizon(); ++t) {
    p.mae_s[t] /= static_cast<double>(p.n);
    p.mae_d[t] /= static_cast<double>(p.n);
  }
  return p;
}

TrainingData pair_training_data(const DeviationProfile& profile, const CalibrationResult& cal,
                                Direction dir) {
  if (profile.horizon() != cal.horizon()) {
    throw HorizonMismatch(fmt::format("deviation profile horizon {} but calibration horizon {}",
                                      profile.horizon(), cal.horizon()));
  }
  TrainingData out;
  const auto& xs = profile.get(dir);
  const auto& ys = cal.quantiles.get(dir);
  out.points.reserve(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) out.points.push_back({xs[t], ys[t]});
  out.degenerate = std::all_of(out.points.begin(), out.points.end(),
                               [&](const TrainingPoint& p) { return p.x == out.points.front().x; });
  return out;
}

namespace {

// Coefficient slots in a fixed order; the active subset forms the parameter
// vector seen by the optimiser.
enum Slot { kA, kB, kC, kD, kF, kG, kH, kK, kM, kZ, kSlotCount };

using Params = std::array<double, kSlotCount>;

Params to_params(const ReliabilityCoefficients& c) {
  return {c.a, c.b, c.c, c.d, c.f, c.g, c.h, c.k, c.m, c.z};
}

ReliabilityCoefficients to_coeffs(const Params& p, TermSet terms) {
  ReliabilityCoefficients c{p[kA], p[kB], p[kC], p[kD], p[kF], p[kG], p[kH], p[kK], p[kM], p[kZ], terms};
  if (!terms.polynomial) c.a = c.b = c.c = c.d = 0.0;
  if (!terms.exponential) c.f = c.g = c.h = 0.0;
  if (!terms.sigmoid_derivative) c.k = c.m = c.z = 0.0;
  return c;
}

std::vector<Slot> active_slots(TermSet terms) {
  std::vector<Slot> out;
  if (terms.polynomial) out.insert(out.end(), {kA, kB, kC, kD});
  if (terms.exponential) out.insert(out.end(), {kF, kG, kH});
  if (terms.sigmoid_derivative) out.insert(out.end(), {kK, kM, kZ});
  return out;
}

// Partial derivatives of the model with respect to every slot at x.
Params gradient(const Params& p, TermSet terms, double x) {
  Params g{};
  bool clamped = false;
  if (terms.polynomial) {
    g[kA] = x * x * x;
    g[kB] = x * x;
    g[kC] = x;
    g[kD] = 1.0;
  }
  if (terms.exponential) {
    const double e = std::exp(clamp_exp_arg(p[kG] * x + p[kH], clamped));
    g[kF] = e;
    g[kG] = p[kF] * x * e;
    g[kH] = p[kF] * e;
  }
  if (terms.sigmoid_derivative) {
    const double k = p[kK], m = p[kM], z = p[kZ];
    const double u = std::exp(clamp_exp_arg(-m * x, clamped));
    const double den = u + z;
    const double den2 = den * den;
    const double den3 = den2 * den;
    g[kK] = m * u / den2;
    g[kM] = k * (u / den2 - m * x * u / den2 + 2.0 * m * x * u * u / den3);
    g[kZ] = -2.0 * k * m * u / den3;
  }
  return g;
}

struct Problem {
  std::span<const TrainingPoint> points;
  TermSet terms;
  std::vector<Slot> slots;

  bool admissible(const Params& p) const {
    for (Slot s : slots) {
      if (!std::isfinite(p[s])) return false;
    }
    return !terms.sigmoid_derivative || p[kZ] > 0.0;
  }

  double objective(const Params& p) const {
    if (!admissible(p)) return std::numeric_limits<double>::infinity();
    const ReliabilityCoefficients c = to_coeffs(p, terms);
    double sum = 0.0;
    for (const TrainingPoint& pt : points) {
      const double r = rm_eval(c, pt.x).value - pt.y;
      sum += r * r;
    }
    return std::isfinite(sum) ? 0.5 * sum : std::numeric_limits<double>::infinity();
  }
};

struct LmResult {
  Params params;
  double objective;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

LmResult levenberg_marquardt(const Problem& prob, Params start, const FitOptions& opt) {
  const std::size_t n = prob.points.size();
  const std::size_t np = prob.slots.size();
  LmResult res{start, prob.objective(start), 0, false, {}};
  res.history.push_back(res.objective);
  if (!std::isfinite(res.objective)) return res;

  double lambda = 1e-3;
  Eigen::MatrixXd jac(n, np);
  Eigen::VectorXd resid(n);
  while (res.iterations < opt.max_iterations) {
    const ReliabilityCoefficients c = to_coeffs(res.params, prob.terms);
    for (std::size_t i = 0; i < n; ++i) {
      const Params g = gradient(res.params, prob.terms, prob.points[i].x);
      for (std::size_t j = 0; j < np; ++j) jac(i, j) = g[prob.slots[j]];
      resid(i) = rm_eval(c, prob.points[i].x).value - prob.points[i].y;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * resid;
    const double diag_floor = std::max(jtj.diagonal().maxCoeff(), 1.0) * 1e-12;

    bool accepted = false;
    while (!accepted && res.iterations < opt.max_iterations) {
      ++res.iterations;
      Eigen::MatrixXd damped = jtj;
      for (std::size_t j = 0; j < np; ++j) {
        damped(j, j) += lambda * std::max(jtj(j, j), diag_floor);
      }
      const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      Params trial = res.params;
      for (std::size_t j = 0; j < np; ++j) trial[prob.slots[j]] += step(j);
      const double obj = prob.objective(trial);
      if (obj < res.objective) {
        const double rel = (res.objective - obj) / std::max(res.objective, 1e-300);
        res.params = trial;
        res.objective = obj;
        res.history.push_back(obj);
        lambda = std::max(lambda / 9.0, 1e-12);
        accepted = true;
        if (rel < opt.relative_tolerance || obj < 1e-30) {
          res.converged = true;
          return res;
        }
      } else {
        lambda *= 11.0;
        if (lambda > 1e20) {
          // No descent direction left at machine precision.
          res.converged = true;
          return res;
        }
      }
    }
  }
  return res;
}

// Solves the linear coefficients (a, b, c, d, f, k) by least squares with
// the nonlinear ones (g, h, m, z) held at the values in `p`.
Params solve_linear(const Problem& prob, Params p) {
  std::vector<Slot> lin;
  if (prob.terms.polynomial) lin.insert(lin.end(), {kA, kB, kC, kD});
  if (prob.terms.exponential) lin.push_back(kF);
  if (prob.terms.sigmoid_derivative) lin.push_back(kK);
  const std::size_t n = prob.points.size();
  Eigen::MatrixXd design(n, lin.size());
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    Params unit = p;
    for (Slot s : lin) unit[s] = 0.0;
    for (std::size_t j = 0; j < lin.size(); ++j) {
      Params e = unit;
      e[lin[j]] = 1.0;
      design(i, j) = rm_eval(to_coeffs(e, prob.terms), prob.points[i].x).value;
    }
    y(i) = prob.points[i].y;
  }
  const Eigen::VectorXd sol = design.colPivHouseholderQr().solve(y);
  for (std::size_t j = 0; j < lin.size(); ++j) {
    if (std::isfinite(sol(j))) p[lin[j]] = sol(j);
  }
  return p;
}

std::optional<Params> projected_start(const Problem& prob, double x_scale);

std::vector<Params> starting_points(const Problem& prob, const FitOptions& opt) {
  std::vector<Params> starts;
  double y_mean = 0.0;
  double x_scale = 0.0;
  for (const TrainingPoint& pt : prob.points) {
    y_mean += pt.y;
    x_scale = std::max(x_scale, std::abs(pt.x));
  }
  y_mean /= static_cast<double>(prob.points.size());
  x_scale = std::max(x_scale, 1e-6);

  Params base{};
  for (Slot s : prob.slots) base[s] = 1e-2;
  if (prob.terms.polynomial) base[kD] = y_mean;
  starts.push_back(base);
  if (opt.warm_start) starts.push_back(to_params(*opt.warm_start));

  const std::vector<double> rates = prob.terms.exponential
                                        ? std::vector<double>{-2.0, -0.5, 0.5, 2.0}
                                        : std::vector<double>{0.0};
  const std::vector<double> slopes = prob.terms.sigmoid_derivative
                                         ? std::vector<double>{0.5, 2.0, 8.0}
                                         : std::vector<double>{0.0};
  const std::vector<double> offsets = prob.terms.sigmoid_derivative
                                          ? std::vector<double>{0.1, 1.0, 10.0}
                                          : std::vector<double>{0.0};
  for (double g : rates) {
    for (double m : slopes) {
      for (double z : offsets) {
        Params p = base;
        if (prob.terms.exponential) {
          p[kG] = g / x_scale;
          p[kH] = 0.0;
        }
        if (prob.terms.sigmoid_derivative) {
          p[kM] = m / x_scale;
          p[kZ] = z;
        }
        starts.push_back(solve_linear(prob, p));
      }
    }
  }
  if (auto p = projected_start(prob, x_scale)) starts.push_back(*p);
  return starts;
}

// Levenberg-Marquardt over the nonlinear coefficients alone (g, m and log z),
// with the linear ones re-solved at every evaluation and h pinned at 0, since
// f exp(g x + h) only depends on f e^h.
Params variable_projection(const Problem& prob, double g, double m, double z, int max_iterations) {
  const bool has_e = prob.terms.exponential, has_sd = prob.terms.sigmoid_derivative;
  std::vector<double> theta;
  if (has_e) theta.push_back(g);
  if (has_sd) theta.insert(theta.end(), {m, std::log(z)});
  const std::size_t nt = theta.size(), n = prob.points.size();

  auto expand = [&](const std::vector<double>& th) {
    Params p{};
    std::size_t i = 0;
    if (has_e) p[kG] = th[i++];
    if (has_sd) {
      p[kM] = th[i++];
      p[kZ] = std::exp(th[i++]);
    }
    return solve_linear(prob, p);
  };
  auto residuals = [&](const Params& p, Eigen::VectorXd& r) {
    const ReliabilityCoefficients c = to_coeffs(p, prob.terms);
    for (std::size_t i = 0; i < n; ++i) r(i) = rm_eval(c, prob.points[i].x).value - prob.points[i].y;
  };

  Params cur = expand(theta);
  double obj = prob.objective(cur);
  if (!std::isfinite(obj)) return cur;
  double lambda = 1e-3;
  Eigen::MatrixXd jac(n, nt);
  Eigen::VectorXd r(n), lo(n), hi(n);
  int iterations = 0;
  while (iterations < max_iterations && obj > 1e-30) {
    residuals(cur, r);
    for (std::size_t j = 0; j < nt; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
      std::vector<double> a = theta, b = theta;
      a[j] -= h;
      b[j] += h;
      residuals(expand(a), lo);
      residuals(expand(b), hi);
      jac.col(j) = (hi - lo) / (2.0 * h);
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    const double diag_floor = std::max(jtj.diagonal().maxCoeff(), 1.0) * 1e-12;
    bool accepted = false;
    while (!accepted && iterations < max_iterations) {
      ++iterations;
      Eigen::MatrixXd damped = jtj;
      for (std::size_t j = 0; j < nt; ++j) damped(j, j) += lambda * std::max(jtj(j, j), diag_floor);
      const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      std::vector<double> trial = theta;
      for (std::size_t j = 0; j < nt; ++j) trial[j] += step(j);
      const Params p = expand(trial);
      const double o = prob.objective(p);
      if (o < obj) {
        const double rel = (obj - o) / std::max(obj, 1e-300);
        theta = trial;
        cur = p;
        obj = o;
        lambda = std::max(lambda / 9.0, 1e-12);
        accepted = true;
        if (rel < 1e-12) return cur;
      } else {
        lambda *= 11.0;
        if (lambda > 1e20) return cur;
      }
    }
  }
  return cur;
}

// Best variable-projection optimum over a grid of nonlinear starts.
std::optional<Params> projected_start(const Problem& prob, double x_scale) {
  if (!prob.terms.exponential && !prob.terms.sigmoid_derivative) return std::nullopt;
  const std::vector<double> rates = prob.terms.exponential
                                        ? std::vector<double>{-2.0, -1.0, -0.3, 0.3, 1.0, 2.0}
                                        : std::vector<double>{0.0};
  const std::vector<double> slopes = prob.terms.sigmoid_derivative
                                         ? std::vector<double>{0.5, 1.0, 2.0, 4.0, 8.0}
                                         : std::vector<double>{0.0};
  const std::vector<double> offsets = prob.terms.sigmoid_derivative
                                          ? std::vector<double>{0.1, 0.3, 1.0, 3.0, 10.0}
                                          : std::vector<double>{1.0};
  std::optional<Params> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (double g : rates) {
    for (double m : slopes) {
      for (double z : offsets) {
        const Params p = variable_projection(prob, g / x_scale, m / x_scale, z, 100);
        const double o = prob.objective(p);
        if (o < best_obj) {
          best_obj = o;
          best = p;
        }
      }
    }
  }
  return best;
}

}  // namespace

FitReport fit_coefficients(std::span<const TrainingPoint> points, TermSet terms,
                           const FitOptions& options) {
  const std::size_t free = terms.free_parameters();
  if (free == 0) throw InsufficientPoints("no active reliability terms to fit");
  if (points.size() < 2 * free) {
    throw InsufficientPoints(fmt::format("{} points for {} free coefficients ({} required)",
                                         points.size(), free, 2 * free));
  }
  const bool degenerate = std::all_of(points.begin(), points.end(),
                                      [&](const TrainingPoint& p) { return p.x == points.front().x; });
  if (degenerate) {
    throw InsufficientPoints("every training point has the same deviation value");
  }
  for (const TrainingPoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InsufficientPoints("training data contains non-finite values");
    }
  }

  const Problem prob{points, terms, active_slots(terms)};
  std::optional<LmResult> best;
  bool any_progress = false;
  for (const Params& start : starting_points(prob, options)) {
    LmResult r = levenberg_marquardt(prob, start, options);
    if (!std::isfinite(r.objective)) continue;
    any_progress = any_progress || r.history.size() > 1 || r.objective < 1e-20;
    if (!best || r.objective < best->objective) best = std::move(r);
  }
  if (!best || !any_progress) {
    throw FitDiverged(fmt::format("{} fit did not reduce the residual from any start",
                                  terms.to_string()));
  }

  FitReport out;
  out.coeffs = to_coeffs(best->params, terms);
  out.rmse = std::sqrt(2.0 * best->objective / static_cast<double>(points.size()));
  out.iterations = best->iterations;
  out.converged = best->converged;
  out.objective_history = std::move(best->history);
  return out;
}

ReliabilityModel fit_rm(std::span<const TrainingPoint> points, ScenarioClass scenario,
                        Direction direction, Segment segment, const FitOptions& options) {
  const FitReport rep = fit_coefficients(points, term_set_for(scenario, segment), options);
  ReliabilityModel model;
  model.scenario = scenario;
  model.direction = direction;
  model.segment = segment;
  model.coeffs = rep.coeffs;
  model.fit_rmse = rep.rmse;
  const auto [lo, hi] = std::minmax_element(
      points.begin(), points.end(),
      [](const TrainingPoint& a, const TrainingPoint& b) { return a.x < b.x; });
  model.x_min = lo->x;
  model.x_max = hi->x;
  model.step_begin = 0;
  model.step_end = points.size();
  return model;
}

namespace {

double line_sse(std::span<const TrainingPoint> pts) {
  const auto n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  if (sxx <= 0.0) return syy;
  return std::max(syy - sxy * sxy / sxx, 0.0);
}

}  // namespace

std::size_t lane_change_changepoint(std::span<const TrainingPoint> points, std::size_t min_first,
                                    std::size_t min_second) {
  const std::size_t n = points.size();
  min_first = std::max<std::size_t>(min_first, 2);
  min_second = std::max<std::size_t>(min_second, 2);
  if (n < min_first + min_second) {
    throw InsufficientPoints(fmt::format(
        "{} points cannot form lane change segments of at least {} and {}", n, min_first,
        min_second));
  }
  std::size_t best = min_first - 1;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t last = min_first - 1; last + min_second < n; ++last) {
    const double sse = line_sse(points.subspan(0, last + 1)) + line_sse(points.subspan(last + 1));
    if (sse < best_sse) {
      best_sse = sse;
      best = last;
    }
  }
  return best;
}

std::vector<ReliabilityModel> fit_scenario_models(const TrainingData& data,
                                                  ScenarioClass scenario, Direction direction,
                                                  const FitOptions& options) {
  if (data.degenerate) {
    throw InsufficientPoints(fmt::format("degenerate training data for {} ({})",
                                         to_string(scenario), direction_tag(direction)));
  }
  const std::span<const TrainingPoint> pts(data.points);
  if (scenario != ScenarioClass::LaneChange) {
    return {fit_rm(pts, scenario, direction, Segment::Whole, options)};
  }
  const std::size_t min1 = 2 * term_set_for(scenario, Segment::LaneChange1).free_parameters();
  const std::size_t min2 = 2 * term_set_for(scenario, Segment::LaneChange2).free_parameters();
  const std::size_t last = lane_change_changepoint(pts, min1, min2);
  ReliabilityModel first =
      fit_rm(pts.subspan(0, last + 1), scenario, direction, Segment::LaneChange1, options);
  ReliabilityModel second =
      fit_rm(pts.subspan(last + 1), scenario, direction, Segment::LaneChange2, options);
  first.step_begin = 0;
  first.step_end = last + 1;
  second.step_begin = last + 1;
  second.step_end = pts.size();
  return {first, second};
}

std::vector<double> predicted_bounds(std::span<const ReliabilityModel> models,
                                     const DeviationProfile& profile, Direction direction) {
  const auto& xs = profile.get(direction);
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const ReliabilityModel* chosen = nullptr;
    for (const ReliabilityModel& m : models) {
      if (m.direction == direction && t >= m.step_begin && t < m.step_end) {
        chosen = &m;
        break;
      }
    }
    if (chosen == nullptr) {
      throw HorizonMismatch(fmt::format("no reliability model covers step {}", t));
    }
    out[t] = std::max(chosen->predict(xs[t]).value, 0.0);
  }
  return out;
}

}  // namespace frenetcp
