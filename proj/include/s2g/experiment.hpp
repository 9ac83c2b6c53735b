#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "s2g/config.hpp"

namespace s2g::cli {

/// Bumped whenever generated samples would change for identical parameters.
inline constexpr int kGeneratorVersion = 1;

struct Datasets {
  std::vector<data::Sample> train, val, test;
  std::string cache_key;
  bool from_cache = false;
};

/// Stable FNV-1a hash (hex) of the generation parameters and generator version.
std::string cache_key(const ExperimentConfig& cfg);

/// Loads <out>/data/<key>/ when present, otherwise generates and writes it.
/// A cache directory whose recorded parameters disagree with `cfg` is an error.
Datasets load_or_generate(const ExperimentConfig& cfg);

/// Human-readable plan for --dry-run; touches nothing on disk.
void print_plan(const ExperimentConfig& cfg, const std::string& subcommand, std::ostream& os);

struct Paths {
  std::filesystem::path checkpoint, metrics, summary, evaluation, renders;
};
Paths artifact_paths(const ExperimentConfig& cfg);

void run_generate(const ExperimentConfig& cfg, std::ostream& log);
/// Trains, then writes checkpoint, metrics CSV (train/val per epoch plus the
/// final test row) and summary JSON.
void run_train(const ExperimentConfig& cfg, std::ostream& log);
/// Scores the saved checkpoint on the test split.
void run_evaluate(const ExperimentConfig& cfg, std::ostream& log);
/// Up to 8 truth/prediction SVG pairs for planar tasks.
void run_render(const ExperimentConfig& cfg, std::ostream& log);
void run_all(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace s2g::cli
