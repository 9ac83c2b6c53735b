// s2g <subcommand> --config <file> [--seed N] [--out DIR] [--dry-run]
//
// Exit status: 0 success, 1 validation error, 2 runtime error.

#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "s2g/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-to-graph experiments: generate data, train, evaluate, render"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool dry_run = false;

  const std::pair<const char*, const char*> subcommands[] = {
      {"generate", "build or reuse the cached datasets"},
      {"train", "generate, then train and write model.ckpt, metrics.csv, summary.json"},
      {"evaluate", "score model.ckpt on the test split into evaluation.json"},
      {"render", "draw test-set triangulations as SVG"},
      {"all", "generate, train, evaluate and render"}};
  for (const auto& [name, help] : subcommands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out, "override the output directory");
    sub->add_flag("--dry-run", dry_run, "validate and print the plan without writing anything");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  s2g::cli::ExperimentConfig cfg;
  try {
    cfg = s2g::cli::parse_config_file(config_path);
    if (seed) s2g::cli::apply_seed(cfg, *seed);
    if (out) cfg.out = *out;
  } catch (const s2g::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  }

  if (dry_run) {
    s2g::cli::print_plan(cfg, subcommand, std::cout);
    return kOk;
  }

  try {
    if (subcommand == "generate") s2g::cli::run_generate(cfg, std::cout);
    else if (subcommand == "train") s2g::cli::run_train(cfg, std::cout);
    else if (subcommand == "evaluate") s2g::cli::run_evaluate(cfg, std::cout);
    else if (subcommand == "render") s2g::cli::run_render(cfg, std::cout);
    else s2g::cli::run_all(cfg, std::cout);
  } catch (const s2g::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
