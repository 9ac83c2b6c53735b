#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "s2g/tensor.hpp"
#include "s2g/types.hpp"

namespace s2g::train {

/// Symmetrize (z_ij + z_ji)/2, then label 1 where sigmoid > 0.5 (strict). Zero diagonal.
EdgeLabels predict_edges(const Tensor& logits);

/// Union-find components of a symmetric prediction, each closed into a clique.
/// Throws std::invalid_argument on asymmetric input.
std::pair<Partition, EdgeLabels> connected_components_to_cliques(const EdgeLabels& pred);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  Confusion& operator+=(const Confusion& o);
};

struct BinaryScores {
  double precision = 0, recall = 0, f1 = 0, accuracy = 0;
};

/// Each unordered pair i<j counted once.
Confusion edge_confusion(const EdgeLabels& pred, const EdgeLabels& truth);
Confusion binary_confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth);

/// With no positives in either prediction or truth every score is 1.
BinaryScores scores_from(const Confusion& c);
BinaryScores f1_precision_recall_accuracy(const EdgeLabels& pred, const EdgeLabels& truth);

/// Contingency-table Rand index; 1 for n < 2.
double rand_index(const Partition& a, const Partition& b);
/// Permutation-model ARI; a 0/0 adjustment yields 1 for identical partitions, else 0.
double adjusted_rand_index(const Partition& a, const Partition& b);

/// Mann–Whitney AUC, ties count one half. Both classes must be present.
double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace s2g::train
