// Command-line front end: experiment runner, statistical comparison,
// target-correlation analysis and model bundle tools.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rlc/bundle.hpp"
#include "rlc/dataset.hpp"
#include "rlc/ensemble.hpp"
#include "rlc/error.hpp"
#include "rlc/experiment.hpp"
#include "rlc/io.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> folds;
  std::optional<std::size_t> r;
  std::optional<std::size_t> k;
  std::optional<std::size_t> iterations;
  std::optional<double> learning_rate;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> jobs;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--folds", folds, "Cross-validation folds");
    cmd->add_option("--r", r, "Number of target combinations for RLC");
    cmd->add_option("--k", k, "Targets per combination for RLC");
    cmd->add_option("--iterations", iterations, "Boosting iterations");
    cmd->add_option("--learning-rate", learning_rate, "Boosting learning rate");
    cmd->add_option("--output-dir", output_dir, "Output directory");
    cmd->add_option("--jobs", jobs, "Worker threads");
  }

  void apply(rlc::ExperimentConfig& c) const {
    if (seed) c.seed = *seed;
    if (folds) c.folds = *folds;
    if (iterations) c.gbm.iterations = *iterations;
    if (learning_rate) c.gbm.learning_rate = *learning_rate;
    if (output_dir) c.output_dir = *output_dir;
    if (jobs) c.jobs = *jobs;
    for (auto& m : c.methods) {
      if (m.kind != rlc::MethodEntry::Kind::kRlc) continue;
      if (r) m.r = *r;
      if (k) m.k = *k;
      if (r || k) m.name.clear();  // regenerate the label from the new parameters
    }
  }
};

rlc::TargetSpec target_spec(std::optional<std::size_t> count, const std::vector<std::string>& names) {
  rlc::TargetSpec spec;
  spec.count = count;
  spec.names = names;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-target regression with random linear target combinations"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  Overrides overrides;
  overrides.add_to(run);

  // compare
  auto* compare = app.add_subcommand("compare", "Compare methods over a methods x datasets result table");
  std::string table_path;
  double alpha = 0.1;
  std::string compare_out;
  compare->add_option("table", table_path, "Result table CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("--alpha", alpha, "Significance level (0.05 or 0.1)");
  compare->add_option("--output-dir", compare_out, "Write comparison.json and comparison.txt here");

  // correlations
  auto* corr = app.add_subcommand("correlations", "Pairwise target correlations of a dataset");
  std::string corr_path, corr_name, corr_out = ".";
  std::optional<std::size_t> corr_targets;
  std::vector<std::string> corr_names;
  corr->add_option("dataset", corr_path, "ARFF or CSV dataset")->required()->check(CLI::ExistingFile);
  corr->add_option("--targets", corr_targets, "Number of targets (last attributes)");
  corr->add_option("--target-names", corr_names, "Target attribute names")->delimiter(',');
  corr->add_option("--name", corr_name, "Dataset label for output files");
  corr->add_option("--output-dir", corr_out, "Output directory");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print the parameters of a saved model bundle");
  std::string bundle_path;
  inspect->add_option("bundle", bundle_path, "Bundle directory")->required()->check(CLI::ExistingDirectory);

  // train
  auto* train = app.add_subcommand("train", "Train RLC or ST on a dataset and save a model bundle");
  std::string train_path, method = "rlc", train_out;
  std::optional<std::size_t> train_targets;
  std::vector<std::string> train_names;
  rlc::RlcParams params;
  std::size_t train_jobs = 1;
  train->add_option("dataset", train_path, "ARFF or CSV dataset")->required()->check(CLI::ExistingFile);
  train->add_option("--targets", train_targets, "Number of targets (last attributes)");
  train->add_option("--target-names", train_names, "Target attribute names")->delimiter(',');
  train->add_option("--method", method, "rlc or st")->check(CLI::IsMember({"rlc", "st"}));
  train->add_option("--r", params.r, "Number of target combinations");
  train->add_option("--k", params.k, "Targets per combination");
  train->add_option("--seed", params.seed, "Seed");
  train->add_option("--iterations", params.gbm.iterations, "Boosting iterations");
  train->add_option("--learning-rate", params.gbm.learning_rate, "Boosting learning rate");
  train->add_option("--jobs", train_jobs, "Worker threads");
  train->add_option("--output-dir", train_out, "Bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto config = rlc::ExperimentConfig::load(config_path);
      overrides.apply(config);
      const auto summary = rlc::run_experiment(config, &std::cerr);
      std::cout << "wrote " << summary.files.size() + 1 << " files to " << config.output_dir.string() << '\n';
      if (summary.failed()) {
        std::cerr << summary.failed() << " cell(s) failed\n";
        return 1;
      }
      return 0;
    }
    if (*compare) {
      const auto report = rlc::compare_methods(table_path, alpha);
      std::cout << report.to_text();
      if (!compare_out.empty()) {
        rlc::write_text_file(std::filesystem::path(compare_out) / "comparison.json", report.to_json());
        rlc::write_text_file(std::filesystem::path(compare_out) / "comparison.txt", report.to_text());
      }
      return 0;
    }
    if (*corr) {
      const auto data = rlc::load_dataset(corr_path, target_spec(corr_targets, corr_names));
      const auto name = corr_name.empty() ? std::filesystem::path(corr_path).stem().string() : corr_name;
      const auto out = rlc::run_correlations(data, name, corr_out);
      for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "median |r| = " << rlc::format_real(out.summary.median_abs) << ", stdev |r| = "
                << (out.summary.stdev_abs ? rlc::format_real(*out.summary.stdev_abs) : std::string("-")) << '\n';
      return 0;
    }
    if (*inspect) {
      std::cout << rlc::inspect_bundle(bundle_path).describe();
      return 0;
    }
    if (*train) {
      const auto data = rlc::load_dataset(train_path, target_spec(train_targets, train_names));
      params.gbm.seed = params.seed;
      if (method == "st") {
        rlc::save_bundle(train_out, rlc::train_st(data, params.gbm, train_jobs));
      } else {
        rlc::save_bundle(train_out, rlc::train_rlc(data, params, train_jobs));
      }
      std::cout << "saved " << method << " bundle to " << train_out << '\n';
      return 0;
    }
  } catch (const rlc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
