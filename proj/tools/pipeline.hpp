#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "frenetcp/copula_calibration.hpp"
#include "frenetcp/data_model.hpp"
#include "frenetcp/errors.hpp"
#include "frenetcp/risk_discriminator.hpp"

namespace frenetcp::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitFit = 4,
  kExitMissing = 5,
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(const fs::path& path);
};

/// Maps an exception thrown by a command to its process exit code.
int exit_code_for(const std::exception& e);

std::vector<ScenarioClass> parse_scenarios(const std::vector<std::string>& names);
std::vector<Method> parse_methods(const std::vector<std::string>& names);
RiskSource parse_risk_source(const std::string& name);
void check_alphas(const std::vector<double>& alphas);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);

/// "<scenario>_<alpha>_<method>", the stem shared by per-cell artifacts.
std::string cell_stem(ScenarioClass scenario, double alpha, Method method);

struct SynthOptions {
  fs::path out;
  std::vector<ScenarioClass> scenarios;  // empty: all four classes
  std::size_t n = 8000;  // per class; the copula search at alpha 0.05 needs it at T_f = 40
  std::optional<std::size_t> modes;
  std::optional<std::size_t> horizon;
  std::optional<double> dt;
  std::optional<double> noise_s;
  std::optional<double> noise_d;
  std::optional<double> growth;
  std::optional<std::string> dependence;
  bool wrong_intent = false;
  std::optional<double> intent_offset;
  std::uint64_t seed = 0;
};

struct CalibrateOptions {
  fs::path input;
  fs::path out;
  std::vector<double> alphas{0.2, 0.1, 0.05};
  std::vector<Method> methods{Method::CopulaShared, Method::Bonferroni};
  SplitConfig split;
  std::vector<ScenarioClass> scenarios;
};

struct EvaluateOptions {
  fs::path input;
  fs::path out;
  std::vector<ScenarioClass> scenarios;
};

struct FitReliabilityOptions {
  fs::path input;
  fs::path out;
  std::vector<ScenarioClass> scenarios;
  std::size_t curve_samples = 101;
};

struct DiscriminateOptions {
  fs::path out;
  RiskConfig risk;
  std::vector<ScenarioClass> scenarios;
};

struct ReportOptions {
  fs::path input;
  fs::path out;
  std::size_t plot_records = 20;
};

void run_synth(const SynthOptions& opt);
void run_calibrate(const CalibrateOptions& opt);
void run_evaluate(const EvaluateOptions& opt);
void run_fit_reliability(const FitReliabilityOptions& opt);
void run_discriminate(const DiscriminateOptions& opt);
void run_report(const ReportOptions& opt);

/// Calibration documents under <dir>/calibration, ordered by scenario, then
/// alpha descending, then method. Throws MissingArtifact when there are none.
std::vector<CalibrationResult> load_calibrations(const fs::path& dir);

}  // namespace frenetcp::cli
