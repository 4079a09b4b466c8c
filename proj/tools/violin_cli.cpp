#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "violin/hard_instances.hpp"
#include "violin/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ViOlin nonlinear bandit and model-based RL simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string config_path;
  bool dry_run = false;
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_flag("--dry-run", dry_run, "validate the config and write the manifest only");

  auto* check = app.add_subcommand("check", "Run quick property checks");
  std::string selector = "all";
  std::uint64_t check_seed = 1;
  check->add_option("selector", selector, "all|kernels|model|online|bandit|rl|hard|metrics");
  check->add_option("--seed", check_seed, "seed");

  auto* packing = app.add_subcommand("packing", "Generate a sphere packing");
  std::size_t dim = 3;
  double separation = 0.5;
  std::uint64_t packing_seed = 1;
  std::size_t attempts = 100000;
  std::string out_path;
  packing->add_option("--dim", dim, "dimension")->required();
  packing->add_option("--separation", separation, "minimum pairwise distance")->required();
  packing->add_option("--seed", packing_seed, "seed");
  packing->add_option("--max-attempts", attempts, "rejection-sampling attempts");
  packing->add_option("--out", out_path, "output file (stdout when omitted)");

  auto* rep = app.add_subcommand("report", "Summarize a ledger CSV");
  std::string csv_path;
  rep->add_option("csv", csv_path, "CSV file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = violin::load_config(config_path);
      violin::apply_env_overrides(cfg);
      const auto res = violin::run_experiment(cfg, dry_run);
      for (const auto& f : res.files) std::cout << f.string() << "\n";
      return 0;
    }
    if (*check) {
      const int failures = violin::run_checks(selector, check_seed, std::cout);
      return failures == 0 ? 0 : 1;
    }
    if (*packing) {
      const auto p = violin::build_packing(dim, separation, packing_seed, attempts);
      if (out_path.empty()) {
        violin::write_packing(std::cout, p);
      } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        violin::write_packing(out, p);
        std::cerr << p.points.size() << " points written to " << out_path << "\n";
      }
      return 0;
    }
    if (*rep) {
      std::ifstream in(csv_path);
      std::cout << violin::report(in);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
