#include <gtest/gtest.h>

#include <cmath>

#include "frenetcp/errors.hpp"
#include "frenetcp/reliability_model.hpp"
#include "test_support.hpp"

using namespace frenetcp;

namespace {

double closed_form(const ReliabilityCoefficients& c, double x) {
  double y = 0.0;
  if (c.active.polynomial) y += c.a * x * x * x + c.b * x * x + c.c * x + c.d;
  if (c.active.exponential) y += c.f * std::exp(c.g * x + c.h);
  if (c.active.sigmoid_derivative) {
    const double e = std::exp(-c.m * x);
    y += c.k * c.m * e / ((e + c.z) * (e + c.z));
  }
  return y;
}

std::vector<TrainingPoint> sample(const ReliabilityCoefficients& c, double lo, double hi,
                                  std::size_t n, double sigma, std::uint64_t seed) {
  support::Rng rng(seed);
  std::vector<TrainingPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    pts.push_back({x, closed_form(c, x) + (sigma > 0 ? rng.normal(sigma) : 0.0)});
  }
  return pts;
}

double curve_rmse(const ReliabilityCoefficients& fit, const ReliabilityCoefficients& truth,
                  double lo, double hi) {
  double sum = 0.0;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double e = rm_eval(fit, x).value - closed_form(truth, x);
    sum += e * e;
  }
  return std::sqrt(sum / (n + 1));
}

ReliabilityCoefficients pe_truth() {
  ReliabilityCoefficients c;
  c.active = {true, true, false};
  c.a = 0.01;
  c.c = 0.2;
  c.d = 0.1;
  c.f = 0.05;
  c.g = 0.8;
  return c;
}

ReliabilityCoefficients psd_truth() {
  ReliabilityCoefficients c;
  c.active = {true, false, true};
  c.a = 0.02;
  c.b = -0.1;
  c.c = 0.5;
  c.d = 0.2;
  c.k = 2.0;
  c.m = 1.5;
  c.z = 0.5;
  return c;
}

ScenarioRecord exact_record(std::size_t t_f, double offset_s, double offset_d) {
  std::vector<FrenetPoint> truth(t_f), mode(t_f);
  for (std::size_t t = 0; t < t_f; ++t) {
    truth[t] = {50.0 + static_cast<double>(t), 0.0};
    mode[t] = {truth[t].s + offset_s, offset_d};
  }
  return support::make_record({mode}, truth);
}

}  // namespace

TEST(TermSet, NamesAndParameterCounts) {
  const TermSet all{true, true, true};
  EXPECT_EQ(all.free_parameters(), 10u);
  EXPECT_EQ(parse_term_set(all.to_string()), all);
  EXPECT_EQ(parse_term_set("P+E"), (TermSet{true, true, false}));
  EXPECT_FALSE(parse_term_set("Q").has_value());
  EXPECT_EQ(term_set_for(ScenarioClass::NormalDriving, Segment::Whole), (TermSet{true, false, true}));
  EXPECT_EQ(term_set_for(ScenarioClass::LaneChange, Segment::LaneChange1), (TermSet{true, true, true}));
  EXPECT_EQ(term_set_for(ScenarioClass::LaneChange, Segment::LaneChange2), (TermSet{true, false, true}));
  EXPECT_EQ(term_set_for(ScenarioClass::Intersection, Segment::Whole), (TermSet{true, true, false}));
  EXPECT_EQ(term_set_for(ScenarioClass::Roundabout, Segment::Whole), (TermSet{true, true, false}));
}

TEST(RmEval, HandValues) {
  ReliabilityCoefficients zero;
  zero.active = {true, true, true};
  zero.z = 1.0;
  EXPECT_EQ(rm_eval(ReliabilityCoefficients{}, 3.0).value, 0.0);

  ReliabilityCoefficients p;
  p.active.polynomial = true;
  p.c = 2;
  p.d = 1;
  EXPECT_DOUBLE_EQ(rm_eval(p, 3.0).value, 7.0);

  ReliabilityCoefficients sd;
  sd.active.sigmoid_derivative = true;
  sd.k = 1;
  sd.m = 1;
  sd.z = 1;
  EXPECT_DOUBLE_EQ(rm_eval(sd, 0.0).value, 0.25);
}

TEST(RmEval, MatchesClosedFormAndFlagsOverflow) {
  ReliabilityCoefficients c = pe_truth();
  c.active.sigmoid_derivative = true;
  c.k = 1.2;
  c.m = 0.7;
  c.z = 0.3;
  for (double x = -2.0; x <= 5.0; x += 0.25) {
    const RmValue v = rm_eval(c, x);
    EXPECT_NEAR(v.value, closed_form(c, x), 1e-12 * (1.0 + std::abs(v.value)));
    EXPECT_FALSE(v.out_of_domain);
  }
  ReliabilityCoefficients big;
  big.active.exponential = true;
  big.f = 1.0;
  big.g = 1000.0;
  const RmValue v = rm_eval(big, 1.0);
  EXPECT_TRUE(v.out_of_domain);
  EXPECT_TRUE(std::isfinite(v.value));
}

TEST(Segments, Names) {
  for (Segment s : {Segment::Whole, Segment::LaneChange1, Segment::LaneChange2}) {
    EXPECT_EQ(parse_segment(to_string(s)), s);
  }
}

TEST(DeviationProfile, ExactForecastsGiveZero) {
  const std::vector<ScenarioRecord> rs = {exact_record(4, 0, 0), exact_record(4, 0, 0)};
  const DeviationProfile p = compute_deviation_profile(rs);
  EXPECT_EQ(p.n, 2u);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(p.mae_s[t], 0.0);
    EXPECT_EQ(p.mae_d[t], 0.0);
  }
}

TEST(DeviationProfile, ArithmeticMean) {
  const std::vector<ScenarioRecord> rs = {exact_record(2, 1.0, 0.5), exact_record(2, -3.0, 0.1)};
  const DeviationProfile p = compute_deviation_profile(rs);
  EXPECT_DOUBLE_EQ(p.mae_s[0], 2.0);
  EXPECT_DOUBLE_EQ(p.mae_d[1], 0.3);
}

TEST(DeviationProfile, MatchesLoopOracle) {
  support::Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ScenarioRecord> rs;
    for (int i = 0; i < 30; ++i) rs.push_back(support::random_record(rng, 3, 5));
    const DeviationProfile p = compute_deviation_profile(rs);
    for (std::size_t t = 0; t < 5; ++t) {
      double sum_s = 0.0, sum_d = 0.0;
      for (const auto& r : rs) {
        double bs = INFINITY, bd = INFINITY;
        for (std::size_t k = 0; k < 3; ++k) {
          bs = std::min(bs, std::abs(r.forecast.at(k, t).s - r.truth[t].s));
          bd = std::min(bd, std::abs(r.forecast.at(k, t).d - r.truth[t].d));
        }
        sum_s += bs;
        sum_d += bd;
      }
      EXPECT_DOUBLE_EQ(p.mae_s[t], sum_s / 30.0);
      EXPECT_DOUBLE_EQ(p.mae_d[t], sum_d / 30.0);
    }
  }
}

TEST(DeviationProfile, Errors) {
  EXPECT_THROW(compute_deviation_profile({}), EmptySet);
  const std::vector<ScenarioRecord> rs = {exact_record(2, 0, 0), exact_record(3, 0, 0)};
  EXPECT_THROW(compute_deviation_profile(rs), HorizonMismatch);
}

TEST(PairTrainingData, PairsAndDegeneracy) {
  DeviationProfile p;
  p.mae_s = {1, 2, 3};
  p.mae_d = {0, 0, 0};
  CalibrationResult c;
  c.quantiles.q_s = {2, 4, 6};
  c.quantiles.q_d = {1, 1, 1};
  const TrainingData s = pair_training_data(p, c, Direction::Longitudinal);
  ASSERT_EQ(s.points.size(), 3u);
  EXPECT_EQ(s.points[1].x, 2.0);
  EXPECT_EQ(s.points[2].y, 6.0);
  EXPECT_FALSE(s.degenerate);
  const TrainingData d = pair_training_data(p, c, Direction::Lateral);
  EXPECT_TRUE(d.degenerate);
  EXPECT_THROW(fit_scenario_models(d, ScenarioClass::Roundabout, Direction::Lateral),
               InsufficientPoints);
  c.quantiles.q_s.pop_back();
  EXPECT_THROW(pair_training_data(p, c, Direction::Longitudinal), HorizonMismatch);
}

TEST(FitCoefficients, RecoversExponentialPolynomialCurve) {
  const ReliabilityCoefficients truth = pe_truth();
  const auto pts = sample(truth, 0.0, 3.0, 40, 0.01, 7);
  const FitReport rep = fit_coefficients(pts, truth.active);
  EXPECT_LT(curve_rmse(rep.coeffs, truth, 0.0, 3.0), 0.05);
  EXPECT_LT(rep.rmse, 0.02);
}

TEST(FitCoefficients, ExactPolynomialInterpolates) {
  ReliabilityCoefficients truth;
  truth.active.polynomial = true;
  truth.a = 0.3;
  truth.b = -1.0;
  truth.c = 2.0;
  truth.d = 0.5;
  const FitReport rep = fit_coefficients(sample(truth, 0.0, 4.0, 12, 0.0, 1), truth.active);
  EXPECT_LT(rep.rmse, 1e-6);
  EXPECT_NEAR(rep.coeffs.a, 0.3, 1e-6);
}

TEST(FitCoefficients, ExactFullModelInterpolates) {
  ReliabilityCoefficients truth;
  truth.active = {true, true, true};
  truth.a = 0.01, truth.b = 0.05, truth.c = 0.3, truth.d = 0.1;
  truth.f = 0.1, truth.g = 0.6;
  truth.k = 1.5, truth.m = 2.0, truth.z = 0.8;
  const FitReport rep = fit_coefficients(sample(truth, 0.0, 3.0, 40, 0.0, 1), truth.active);
  EXPECT_LT(rep.rmse, 1e-6);
  EXPECT_LT(curve_rmse(rep.coeffs, truth, 0.0, 3.0), 1e-6);
}

TEST(FitCoefficients, ObjectiveNeverIncreases) {
  const ReliabilityCoefficients truth = psd_truth();
  const FitReport rep = fit_coefficients(sample(truth, 0.0, 4.0, 40, 0.01, 3), truth.active);
  ASSERT_FALSE(rep.objective_history.empty());
  for (std::size_t i = 1; i < rep.objective_history.size(); ++i) {
    EXPECT_LE(rep.objective_history[i], rep.objective_history[i - 1]);
  }
  EXPECT_GT(rep.coeffs.z, 0.0);
}

TEST(FitCoefficients, TooFewPoints) {
  const ReliabilityCoefficients truth = pe_truth();
  EXPECT_THROW(fit_coefficients(sample(truth, 0, 1, 13, 0, 1), truth.active), InsufficientPoints);
  std::vector<TrainingPoint> same(20, TrainingPoint{1.0, 2.0});
  EXPECT_THROW(fit_coefficients(same, truth.active), InsufficientPoints);
}

TEST(FitRm, CarriesDomainAndTermSet) {
  const ReliabilityCoefficients truth = pe_truth();
  const auto pts = sample(truth, 0.5, 2.5, 30, 0.01, 5);
  const ReliabilityModel m = fit_rm(pts, ScenarioClass::Intersection, Direction::Lateral);
  EXPECT_EQ(m.coeffs.active, (TermSet{true, true, false}));
  EXPECT_DOUBLE_EQ(m.x_min, 0.5);
  EXPECT_DOUBLE_EQ(m.x_max, 2.5);
  EXPECT_TRUE(m.predict(3.0).out_of_domain);
  EXPECT_EQ(m.predict(3.0).value, m.predict(2.5).value);
  EXPECT_FALSE(m.predict(1.0).out_of_domain);
}

TEST(LaneChangeChangepoint, FindsKink) {
  std::vector<TrainingPoint> pts;
  for (int i = 0; i < 40; ++i) {
    const double x = 0.1 * i;
    pts.push_back({x, i < 25 ? x : 3.0 + 4.0 * (x - 2.5)});
  }
  EXPECT_EQ(lane_change_changepoint(pts, 5, 5), 24u);
  EXPECT_THROW(lane_change_changepoint(pts, 30, 20), InsufficientPoints);
}

TEST(FitScenarioModels, LaneChangeSegmentsBeatWholeRange) {
  support::Rng rng(13);
  TrainingData data;
  for (int i = 0; i < 50; ++i) {
    const double x = 0.05 * i;
    const double y = i < 28 ? 0.4 * x + 0.1 : 1.22 + 2.0 * (x - 1.4) * (x - 1.4) + 0.8 * (x - 1.4);
    data.points.push_back({x, y + rng.normal(0.01)});
  }
  const auto models = fit_scenario_models(data, ScenarioClass::LaneChange, Direction::Lateral);
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models[0].segment, Segment::LaneChange1);
  EXPECT_EQ(models[1].segment, Segment::LaneChange2);
  EXPECT_EQ(models[0].step_end, models[1].step_begin);
  EXPECT_EQ(models[1].step_end, 50u);

  double seg_sse = 0.0;
  for (const auto& m : models) {
    for (std::size_t t = m.step_begin; t < m.step_end; ++t) {
      const double e = m.predict(data.points[t].x).value - data.points[t].y;
      seg_sse += e * e;
    }
  }
  const ReliabilityModel whole =
      fit_rm(data.points, ScenarioClass::LaneChange, Direction::Lateral, Segment::Whole);
  EXPECT_LT(std::sqrt(seg_sse / 50.0), whole.fit_rmse);
}

TEST(PredictedBounds, UsesSegmentOwningEachStep) {
  ReliabilityModel a, b;
  a.coeffs.active.polynomial = true;
  a.coeffs.d = 1.0;
  a.step_begin = 0;
  a.step_end = 2;
  a.x_max = 10;
  b.coeffs.active.polynomial = true;
  b.coeffs.d = 5.0;
  b.step_begin = 2;
  b.step_end = 3;
  b.x_max = 10;
  DeviationProfile p;
  p.mae_s = {0.1, 0.2, 0.3};
  p.mae_d = {0, 0, 0};
  const std::vector<ReliabilityModel> ms = {a, b};
  EXPECT_EQ(predicted_bounds(ms, p, Direction::Longitudinal), (std::vector<double>{1, 1, 5}));
}
