#include "s2g/losses.hpp"

#include <cmath>

namespace s2g::train {

namespace {

void check_sizes(const Tensor& x, std::size_t targets, std::size_t mask, const char* op) {
  if (x.size() != targets || x.size() != mask) {
    throw DimensionError(std::string(op) + ": " + std::to_string(x.size()) + " predictions, " +
                         std::to_string(targets) + " targets, " + std::to_string(mask) + " mask entries");
  }
}

std::vector<std::uint8_t> off_diagonal(std::size_t n) {
  std::vector<std::uint8_t> m(n * n, 1);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 0;
  return m;
}

std::vector<double> as_targets(std::span<const std::uint8_t> labels) {
  return std::vector<double>(labels.begin(), labels.end());
}

void check_grid(const Tensor& grid, const EdgeLabels& labels, const char* op) {
  if (grid.rank() != 2 || grid.extent(0) != labels.n || grid.extent(1) != labels.n) {
    throw DimensionError(std::string(op) + ": grid " + shape_str(grid.shape()) + " vs labels n=" +
                         std::to_string(labels.n));
  }
}

}  // namespace

Tensor masked_bce_with_logits(const Tensor& logits, std::span<const double> targets,
                              std::span<const std::uint8_t> mask) {
  check_sizes(logits, targets.size(), mask.size(), "masked_bce_with_logits");
  auto z = logits.data();
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!mask[i]) continue;
    total += std::max(z[i], 0.0) - z[i] * targets[i] + std::log1p(std::exp(-std::abs(z[i])));
    ++count;
  }
  const double inv = count ? 1.0 / static_cast<double>(count) : 0.0;
  Tensor cz = logits;
  std::vector<double> t(targets.begin(), targets.end());
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  return make_result({1}, {total * inv}, {logits},
                     [cz, t = std::move(t), m = std::move(m), inv](std::span<const double> g) mutable {
                       if (!cz.requires_grad()) return;
                       auto z = cz.data();
                       auto d = cz.grad_mut();
                       for (std::size_t i = 0; i < z.size(); ++i) {
                         if (!m[i]) continue;
                         double s;
                         if (z[i] >= 0.0) {
                           s = 1.0 / (1.0 + std::exp(-z[i]));
                         } else {
                           const double e = std::exp(z[i]);
                           s = e / (1.0 + e);
                         }
                         d[i] += g[0] * inv * (s - t[i]);
                       }
                     });
}

Tensor masked_soft_f1(const Tensor& probs, std::span<const double> targets,
                      std::span<const std::uint8_t> mask) {
  check_sizes(probs, targets.size(), mask.size(), "masked_soft_f1");
  auto p = probs.data();
  double tp = 0.0, sp = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!mask[i]) continue;
    tp += p[i] * targets[i];
    sp += p[i];
    sy += targets[i];
  }
  const double denom = sp + sy;
  const double loss = denom > 0.0 ? 1.0 - 2.0 * tp / denom : 0.0;
  Tensor cp = probs;
  std::vector<double> t(targets.begin(), targets.end());
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  return make_result({1}, {loss}, {probs},
                     [cp, t = std::move(t), m = std::move(m), tp, denom](std::span<const double> g) mutable {
                       if (!cp.requires_grad() || denom <= 0.0) return;
                       auto d = cp.grad_mut();
                       const double inv2 = 1.0 / (denom * denom);
                       for (std::size_t i = 0; i < t.size(); ++i) {
                         if (!m[i]) continue;
                         d[i] += g[0] * -2.0 * (t[i] * denom - tp) * inv2;
                       }
                     });
}

Tensor bce_edge_loss(const Tensor& logits, const EdgeLabels& labels) {
  check_grid(logits, labels, "bce_edge_loss");
  const auto mask = off_diagonal(labels.n);
  return masked_bce_with_logits(logits, as_targets(labels.adj), mask);
}

Tensor soft_f1_loss(const Tensor& probs, const EdgeLabels& labels) {
  check_grid(probs, labels, "soft_f1_loss");
  const auto mask = off_diagonal(labels.n);
  return masked_soft_f1(probs, as_targets(labels.adj), mask);
}

Tensor triplet_bce_loss(const Tensor& logits, std::span<const std::uint8_t> labels) {
  const std::vector<std::uint8_t> mask(labels.size(), 1);
  return masked_bce_with_logits(logits, as_targets(labels), mask);
}

Tensor triplet_soft_f1_loss(const Tensor& probs, std::span<const std::uint8_t> labels) {
  const std::vector<std::uint8_t> mask(labels.size(), 1);
  return masked_soft_f1(probs, as_targets(labels), mask);
}

}  // namespace s2g::train
