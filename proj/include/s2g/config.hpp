#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "s2g/dataset.hpp"
#include "s2g/models.hpp"
#include "s2g/train.hpp"

namespace s2g::cli {

struct SplitSizes {
  std::size_t train = 0, val = 0, test = 0;
};

struct ExperimentConfig {
  data::Task task = data::Task::delaunay;
  std::uint64_t seed = 0;
  data::DataSpec data;
  SplitSizes sizes;
  nn::ModelConfig model;
  train::TrainConfig train;
  std::filesystem::path out;

  nlohmann::json to_json() const;
};

/// Task-dependent defaults: desk-scale widths, set sizes and split sizes.
ExperimentConfig default_config(data::Task task, std::uint64_t seed);

/// Validates and fills defaults. `task` and `seed` are required; unknown keys,
/// bad enum values and out-of-range numbers raise ValidationError with the
/// dotted key path in the message.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Re-derives seeds after a --seed override so the whole run follows it.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace s2g::cli
