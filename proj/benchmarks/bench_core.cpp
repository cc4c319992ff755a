#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "frenetcp/copula_calibration.hpp"
#include "frenetcp/intervals_metrics.hpp"
#include "frenetcp/nonconformity.hpp"
#include "frenetcp/reliability_model.hpp"
#include "frenetcp/route_geometry.hpp"
#include "frenetcp/synthetic_scenarios.hpp"

using namespace frenetcp;

namespace {

ReferenceRoute arc_route(int segments) {
  std::vector<PlanarPoint> v;
  for (int i = 0; i <= segments; ++i) {
    const double a = std::numbers::pi * i / segments;
    v.push_back({30.0 * std::cos(a), 30.0 * std::sin(a)});
  }
  return ReferenceRoute(std::move(v));
}

std::vector<ScenarioRecord> records(std::size_t n, std::size_t horizon) {
  SynthConfig cfg = SynthConfig::defaults_for(ScenarioClass::Roundabout);
  cfg.n_records = n;
  cfg.horizon = horizon;
  cfg.seed = 1;
  return generate(cfg);
}

}  // namespace

static void BM_Project(benchmark::State& state) {
  const ReferenceRoute route = arc_route(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-35.0, 35.0);
  std::vector<PlanarPoint> pts(1024);
  for (auto& p : pts) p = {u(rng), std::abs(u(rng))};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(project(route, pts[i++ & 1023]));
  }
}
BENCHMARK(BM_Project)->Arg(8)->Arg(64)->Arg(512);

static void BM_Quantile(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (double& x : v) x = std::abs(g(rng));
  for (auto _ : state) benchmark::DoNotOptimize(quantile(v, 0.05));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Quantile)->Range(1 << 10, 1 << 18)->Complexity();

static void BM_CopulaCalibration(benchmark::State& state) {
  const auto rs = records(static_cast<std::size_t>(state.range(0)), 40);
  const std::size_t half = rs.size() / 2;
  const ScoreMatrix d1 = score_matrix(std::span(rs).first(half));
  const ScoreMatrix d2 = score_matrix(std::span(rs).subspan(half));
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate_copula(ScenarioClass::Roundabout, d1, d2, 0.1, 0.2));
  }
}
BENCHMARK(BM_CopulaCalibration)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

static void BM_JointCoverage(benchmark::State& state) {
  const auto rs = records(4000, 40);
  const CalibrationResult cal =
      calibrate_bonferroni(ScenarioClass::Roundabout, score_matrix(rs), 0.2, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(joint_coverage(rs, cal));
}
BENCHMARK(BM_JointCoverage)->Unit(benchmark::kMillisecond);

static void BM_FitReliability(benchmark::State& state) {
  ReliabilityCoefficients truth;
  truth.active = {true, state.range(0) != 0, true};
  truth.a = 0.01, truth.c = 0.3, truth.d = 0.1, truth.f = 0.1, truth.g = 0.6;
  truth.k = 1.5, truth.m = 2.0, truth.z = 0.8;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<TrainingPoint> pts;
  for (int i = 0; i < 40; ++i) {
    const double x = 3.0 * i / 39.0;
    pts.push_back({x, rm_eval(truth, x).value + noise(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_coefficients(pts, truth.active));
}
BENCHMARK(BM_FitReliability)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
