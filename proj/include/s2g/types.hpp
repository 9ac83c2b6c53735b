#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "s2g/tensor.hpp"

namespace s2g {

/// One input set: n elements with `dim` real features each, row-major.
struct PointSet {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> coords;

  double operator()(std::size_t i, std::size_t c) const { return coords[i * dim + c]; }
  std::span<const double> row(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  Tensor to_tensor() const { return Tensor({n, dim}, coords); }
};

/// Symmetric 0/1 adjacency over n elements with a zero diagonal.
struct EdgeLabels {
  std::size_t n = 0;
  std::vector<std::uint8_t> adj;  // n*n, row-major

  EdgeLabels() = default;
  explicit EdgeLabels(std::size_t size) : n(size), adj(size * size, 0) {}

  bool operator()(std::size_t i, std::size_t j) const { return adj[i * n + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) {
    adj[i * n + j] = v;
    adj[j * n + i] = v;
  }
  std::size_t edge_count() const;
  bool operator==(const EdgeLabels&) const = default;
};

using Triplet = std::array<std::size_t, 3>;

/// Sparse set of candidate 3-edges, sorted (i<j<l) and unique, with hull membership labels.
struct TripletCandidates {
  std::vector<Triplet> triples;
  std::vector<std::uint8_t> labels;
};

/// Cluster id per element; ids are contiguous from 0 in order of first appearance.
struct Partition {
  std::vector<std::size_t> ids;
  std::size_t clusters = 0;

  /// Relabels arbitrary ids to canonical first-appearance order.
  static Partition from_labels(const std::vector<std::size_t>& labels);
  bool operator==(const Partition&) const = default;
};

}  // namespace s2g
