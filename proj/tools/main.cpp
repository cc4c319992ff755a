#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"

namespace cli = frenetcp::cli;

namespace {

template <typename T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target,
                   const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

std::vector<double> unique_alphas(const std::vector<double>& in) {
  std::vector<double> out;
  for (double a : in) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-aware conformal intervals and reliability critical points for "
               "Frenet-frame trajectory forecasts"};
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  std::vector<std::string> scenarios;
  std::vector<std::string> methods{"copula", "bonferroni"};
  std::vector<double> alphas{0.2, 0.1, 0.05};
  std::uint64_t seed = 0;
  std::string risk_source = "calibrated";

  cli::SynthOptions synth;
  cli::CalibrateOptions calib;
  cli::EvaluateOptions eval;
  cli::FitReliabilityOptions fit;
  cli::DiscriminateOptions disc;
  cli::ReportOptions report;

  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic scenario records");
  synth_cmd->add_option("--out", synth.out, "Record file to write")->required();
  synth_cmd->add_option("--scenario", scenarios, "Scenario class (repeatable; default all)");
  synth_cmd->add_option("--n", synth.n, "Records per scenario")->capture_default_str();
  synth_cmd->add_option("--seed", seed, "Generator seed")->capture_default_str();
  optional_flag(synth_cmd, "--k", synth.modes, "Modes per forecast");
  optional_flag(synth_cmd, "--horizon", synth.horizon, "Forecast steps");
  optional_flag(synth_cmd, "--dt", synth.dt, "Step length in seconds");
  optional_flag(synth_cmd, "--noise-s", synth.noise_s, "Longitudinal noise scale (m)");
  optional_flag(synth_cmd, "--noise-d", synth.noise_d, "Lateral noise scale (m)");
  optional_flag(synth_cmd, "--growth", synth.growth, "Per-step noise growth factor");
  optional_flag(synth_cmd, "--dependence", synth.dependence,
                "independent | comonotone | ar1:<rho>");
  synth_cmd->add_flag("--wrong-intent", synth.wrong_intent, "Offset every mode laterally");
  optional_flag(synth_cmd, "--intent-offset", synth.intent_offset,
                "Lateral offset reached at the last step (m)");

  auto* calib_cmd = app.add_subcommand("calibrate", "Split, calibrate and score the test split");
  calib_cmd->add_option("--input", calib.input, "Record file")->required();
  calib_cmd->add_option("--out", calib.out, "Output directory")->required();
  calib_cmd->add_option("--alpha", alphas, "Miscoverage level (repeatable)")->capture_default_str();
  calib_cmd->add_option("--method", methods, "copula | bonferroni (repeatable)")
      ->capture_default_str();
  calib_cmd->add_option("--seed", seed, "Split seed")->capture_default_str();
  calib_cmd->add_option("--calib-fraction", calib.split.calib_fraction,
                        "Share of each class used for calibration")->capture_default_str();
  calib_cmd->add_option("--d1-fraction", calib.split.d1_fraction,
                        "Share of the calibration portion used for marginals")
      ->capture_default_str();
  calib_cmd->add_option("--scenario", scenarios, "Restrict to these classes (repeatable)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score stored calibrations on a record file");
  eval_cmd->add_option("--input", eval.input, "Record file")->required();
  eval_cmd->add_option("--out", eval.out, "Directory holding calibration/")->required();
  eval_cmd->add_option("--scenario", scenarios, "Restrict to these classes (repeatable)");

  auto* fit_cmd = app.add_subcommand("fit-reliability", "Fit reliability curves per calibration");
  fit_cmd->add_option("--input", fit.input, "Record file used by calibrate")->required();
  fit_cmd->add_option("--out", fit.out, "Directory holding calibration/ and split.csv")
      ->required();
  fit_cmd->add_option("--scenario", scenarios, "Restrict to these classes (repeatable)");
  fit_cmd->add_option("--curve-samples", fit.curve_samples, "Points per fitted curve")
      ->capture_default_str();

  auto* disc_cmd = app.add_subcommand("discriminate", "Critical points from the joint risk");
  disc_cmd->add_option("--out", disc.out, "Directory holding calibration/")->required();
  disc_cmd->add_option("--risk-threshold", disc.risk.threshold_r, "Risk threshold r")
      ->capture_default_str();
  disc_cmd->add_option("--c-s", disc.risk.c_s, "Longitudinal risk constant")
      ->capture_default_str();
  disc_cmd->add_option("--c-d", disc.risk.c_d, "Lateral risk constant")->capture_default_str();
  disc_cmd->add_option("--risk-source", risk_source, "calibrated | rm")->capture_default_str();
  disc_cmd->add_option("--scenario", scenarios, "Restrict to these classes (repeatable)");

  auto* report_cmd = app.add_subcommand("report", "Summary table and plot data");
  report_cmd->add_option("--input", report.input, "Record file used by calibrate")->required();
  report_cmd->add_option("--out", report.out, "Pipeline output directory")->required();
  report_cmd->add_option("--plot-records", report.plot_records,
                         "Test records per class in the band plots")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  try {
    const auto classes = cli::parse_scenarios(scenarios);
    if (synth_cmd->parsed()) {
      synth.scenarios = classes;
      synth.seed = seed;
      cli::run_synth(synth);
    } else if (calib_cmd->parsed()) {
      calib.alphas = unique_alphas(alphas);
      calib.methods = cli::parse_methods(methods);
      calib.split.seed = seed;
      calib.scenarios = classes;
      cli::run_calibrate(calib);
    } else if (eval_cmd->parsed()) {
      eval.scenarios = classes;
      cli::run_evaluate(eval);
    } else if (fit_cmd->parsed()) {
      fit.scenarios = classes;
      cli::run_fit_reliability(fit);
    } else if (disc_cmd->parsed()) {
      disc.risk.source = cli::parse_risk_source(risk_source);
      disc.scenarios = classes;
      cli::run_discriminate(disc);
    } else if (report_cmd->parsed()) {
      cli::run_report(report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kExitOk;
}
