#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "s2g/tensor.hpp"
#include "s2g/types.hpp"

namespace s2g::train {

/// Mean binary cross-entropy over entries where mask != 0, computed from
/// logits as max(z,0) - z·y + log(1 + exp(-|z|)).
Tensor masked_bce_with_logits(const Tensor& logits, std::span<const double> targets,
                              std::span<const std::uint8_t> mask);

/// 1 - 2·Σpy / (Σp + Σy) over masked entries; 0 when both sums vanish.
Tensor masked_soft_f1(const Tensor& probs, std::span<const double> targets,
                      std::span<const std::uint8_t> mask);

/// Off-diagonal mean BCE over an n×n logit grid.
Tensor bce_edge_loss(const Tensor& logits, const EdgeLabels& labels);
/// Dice-style soft F1 over the off-diagonal of an n×n probability grid.
Tensor soft_f1_loss(const Tensor& probs, const EdgeLabels& labels);

Tensor triplet_bce_loss(const Tensor& logits, std::span<const std::uint8_t> labels);
Tensor triplet_soft_f1_loss(const Tensor& probs, std::span<const std::uint8_t> labels);

}  // namespace s2g::train
