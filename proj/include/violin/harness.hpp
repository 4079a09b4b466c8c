#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "violin/metrics.hpp"

namespace violin {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  Family family = Family::Linear;
  std::size_t dim = 4;
  std::size_t num_hypotheses = 8;
  std::size_t hidden = 4;
  std::size_t horizon = 100;
  LearnerKind learner = LearnerKind::Hedge;
  SupervisionMode mode = SupervisionMode::FiniteDiff;
  FiniteDiffConfig fd;
  AscentConfig ascent;
  std::optional<double> learning_rate;
  double eps = 0.1;
  std::optional<double> eps_h;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "violin_out";
  std::size_t threads = 0;
  std::size_t search_budget = 64;

  StationaryThresholds thresholds() const;
  void validate() const;
};

// Parses the JSON config format; unknown keys and out-of-range values are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Applies VIOLIN_OUTPUT_DIR and VIOLIN_THREADS.
void apply_env_overrides(ExperimentConfig& cfg);
std::string config_to_json(const ExperimentConfig& cfg);

struct Instance {
  HypothesisSet theta;
  std::size_t truth;
};
Instance make_instance(const ExperimentConfig& cfg, std::uint64_t seed);

struct ExperimentResult {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> files;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool dry_run = false);

// Renders one run as CSV rows (no header).
std::string ledger_csv_rows(const RunLedger& ledger, const Vec& local_prefix, const Vec& standard_prefix);
std::string csv_header();
std::string format_number(double v);

// Summary table of an aggregate or per-seed CSV.
std::string report(std::istream& csv);

// Quick property checks by module ("all", "kernels", "model", "online",
// "bandit", "rl", "hard", "metrics"). Prints one line per check; returns the
// number of failures.
int run_checks(const std::string& selector, std::uint64_t seed, std::ostream& out);

}  // namespace violin
