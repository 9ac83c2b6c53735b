#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "s2g/dataset.hpp"
#include "s2g/metrics.hpp"
#include "s2g/models.hpp"

namespace s2g::train {

struct LossWeights {
  double bce = 1.0;
  double f1 = 1.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 60;
  std::size_t patience = 20;
  LossWeights loss_weights;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamState {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t t = 0;
  std::vector<std::vector<double>> m, v;

  /// Zero moments shaped like `params`.
  static AdamState like(std::span<const Tensor> params);
};

/// One bias-corrected Adam update using each parameter's accumulated gradient.
/// Parameters without a gradient buffer are treated as having zero gradient.
void adam_step(std::span<Tensor> params, AdamState& state, double lr);

/// True once the best (strictly improving, first occurrence) value is at least `patience` epochs old.
bool early_stopping(std::span<const double> history, std::size_t patience);

struct MetricsRecord {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0;
  double f1 = 0, precision = 0, recall = 0, accuracy = 0;
  std::optional<double> rand_index, adjusted_rand_index, auc_roc;
};

inline constexpr const char* kMetricsCsvHeader = "epoch,split,loss,f1,precision,recall,accuracy,ri,ari,auc";

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& rows);

/// Combined per-set loss w_bce·BCE + w_f1·softF1 on the set's model output.
Tensor sample_loss(const nn::ModelOutput& out, const data::Sample& s, const LossWeights& w);

/// Runs the model over a split without recording; returns loss and task metrics.
///
/// Edge tasks pool the confusion counts of every unordered pair in the split;
/// the partition task scores the connected-component closure of the prediction
/// and averages RI/ARI per set. Hull tasks score candidates and pool the AUC.
MetricsRecord evaluate(const nn::Model& model, std::span<const data::Sample> samples,
                       const LossWeights& w, std::size_t epoch = 0, const std::string& split = "test");

struct TrainResult {
  std::vector<std::vector<double>> best_parameters;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0;
  std::vector<MetricsRecord> history;  // one train and one val row per epoch
};

/// Mini-batch Adam with seeded shuffling, validation F1 after every epoch,
/// early stopping, and best-by-validation parameter snapshot. On return the
/// model holds the best parameters.
TrainResult train(nn::Model& model, std::span<const data::Sample> train_set,
                  std::span<const data::Sample> val_set, const TrainConfig& cfg,
                  const std::function<void(const MetricsRecord&)>& on_epoch = {});

}  // namespace s2g::train
