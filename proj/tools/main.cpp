// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "harness.hpp"

using namespace nsgda::harness;

int main(int argc, char** argv) {
  CLI::App app{"nsgda: train and verify one-layer generators with nested stochastic gradient descent-ascent"};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions opts;
  std::string out_dir;
  int checkpoint_every = -1;
  std::string level = "quick";
  bool corrupt = false;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed-offset", opts.seed_offset, "added to every configured seed");
    sub->add_flag("--dry-run", opts.dry_run, "print resolved budgets and exit without sampling");
    sub->add_option("--checkpoint-every", checkpoint_every, "write a checkpoint every N outer iterations")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* train = app.add_subcommand("train", "run nested SGDA for every configured seed");
  add_run_flags(train);
  CLI::App* sweep = app.add_subcommand("sweep", "train across a grid of samples, dimensions or epsilons");
  add_run_flags(sweep);
  CLI::App* trunc = app.add_subcommand("truncated-gaussian", "recover a box-truncated Gaussian covariance");
  add_run_flags(trunc);
  CLI::App* check = app.add_subcommand("check", "run the invariant suites and print a pass/fail table");
  check->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  check->add_flag("--corrupt-gradient", corrupt, "test hook: flip the discriminator gradient sign")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  if (check->parsed()) {
    return cmd_check(level == "full" ? CheckLevel::Full : CheckLevel::Quick, CheckHooks{corrupt}, std::cout);
  }

  ExperimentConfig cfg;
  try {
    cfg = load_experiment_file(config_path);
  } catch (const std::exception& e) {
    return report_error(e, std::cerr);
  }
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (checkpoint_every >= 0) opts.checkpoint_every = checkpoint_every;

  if (train->parsed()) return cmd_train(cfg, opts, std::cout, std::cerr);
  if (sweep->parsed()) return cmd_sweep(cfg, opts, std::cout, std::cerr);
  return cmd_truncated_gaussian(cfg, opts, std::cout, std::cerr);
}
