#include "s2g/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace s2g::train {

namespace {

double choose2(double k) { return k * (k - 1.0) / 2.0; }

struct Contingency {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
  std::vector<std::size_t> rows, cols;
};

Contingency contingency(const Partition& a, const Partition& b) {
  if (a.ids.size() != b.ids.size()) {
    throw DimensionError("partitions over different element counts: " +
                         std::to_string(a.ids.size()) + " vs " + std::to_string(b.ids.size()));
  }
  Contingency c;
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    ++c.cells[{a.ids[i], b.ids[i]}];
    if (a.ids[i] >= c.rows.size()) c.rows.resize(a.ids[i] + 1, 0);
    if (b.ids[i] >= c.cols.size()) c.cols.resize(b.ids[i] + 1, 0);
    ++c.rows[a.ids[i]];
    ++c.cols[b.ids[i]];
  }
  return c;
}

}  // namespace

EdgeLabels predict_edges(const Tensor& logits) {
  if (logits.rank() != 2 || logits.extent(0) != logits.extent(1)) {
    throw DimensionError("predict_edges: expected n×n logits, got " + shape_str(logits.shape()));
  }
  const std::size_t n = logits.extent(0);
  auto z = logits.data();
  EdgeLabels out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      // sigmoid(s) > 0.5 exactly when s > 0.
      const double s = 0.5 * (z[i * n + j] + z[j * n + i]);
      if (s > 0.0) out.set(i, j, true);
    }
  return out;
}

std::pair<Partition, EdgeLabels> connected_components_to_cliques(const EdgeLabels& pred) {
  const std::size_t n = pred.n;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (pred(i, j) != pred(j, i)) throw std::invalid_argument("connected_components_to_cliques: asymmetric input");
      if (i < j && pred(i, j)) {
        const auto ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  std::vector<std::size_t> roots(n);
  for (std::size_t i = 0; i < n; ++i) roots[i] = find(i);
  Partition part = Partition::from_labels(roots);
  EdgeLabels closure(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (part.ids[i] == part.ids[j]) closure.set(i, j, true);
  return {std::move(part), std::move(closure)};
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

Confusion edge_confusion(const EdgeLabels& pred, const EdgeLabels& truth) {
  if (pred.n != truth.n) throw DimensionError("edge_confusion: size mismatch");
  Confusion c;
  for (std::size_t i = 0; i < pred.n; ++i)
    for (std::size_t j = i + 1; j < pred.n; ++j) {
      const bool p = pred(i, j), t = truth(i, j);
      if (p && t) ++c.tp;
      else if (p) ++c.fp;
      else if (t) ++c.fn;
      else ++c.tn;
    }
  return c;
}

Confusion binary_confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth) {
  if (pred.size() != truth.size()) throw DimensionError("binary_confusion: size mismatch");
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, t = truth[i] != 0;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

BinaryScores scores_from(const Confusion& c) {
  BinaryScores s;
  const double total = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
  s.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / total : 1.0;
  if (c.tp + c.fp + c.fn == 0) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  s.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  s.f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
  return s;
}

BinaryScores f1_precision_recall_accuracy(const EdgeLabels& pred, const EdgeLabels& truth) {
  return scores_from(edge_confusion(pred, truth));
}

double rand_index(const Partition& a, const Partition& b) {
  const auto c = contingency(a, b);
  const double n = static_cast<double>(a.ids.size());
  if (a.ids.size() < 2) return 1.0;
  double same_both = 0.0, same_a = 0.0, same_b = 0.0;
  for (const auto& [cell, count] : c.cells) same_both += choose2(static_cast<double>(count));
  for (auto r : c.rows) same_a += choose2(static_cast<double>(r));
  for (auto k : c.cols) same_b += choose2(static_cast<double>(k));
  const double pairs = choose2(n);
  // agreements = pairs together in both + pairs apart in both
  const double apart_both = pairs - same_a - same_b + same_both;
  return (same_both + apart_both) / pairs;
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  const auto c = contingency(a, b);
  const double n = static_cast<double>(a.ids.size());
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [cell, count] : c.cells) index += choose2(static_cast<double>(count));
  for (auto r : c.rows) sum_a += choose2(static_cast<double>(r));
  for (auto k : c.cols) sum_b += choose2(static_cast<double>(k));
  const double pairs = choose2(n);
  const double expected = pairs > 0 ? sum_a * sum_b / pairs : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return rand_index(a, b) == 1.0 ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc_roc: size mismatch");
  std::size_t pos = 0;
  for (auto l : labels) pos += l ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("auc_roc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based, tie-averaged) ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

}  // namespace s2g::train
