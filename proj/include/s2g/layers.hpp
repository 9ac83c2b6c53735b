#pragma once

// Permutation-equivariant building blocks: DeepSets set-to-set layers,
// attention pooling, the k=2 and k=3 broadcasting lifts, and the edge-wise
// MLP applied independently to every k-edge feature vector.

#include <array>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "s2g/tensor.hpp"
#include "s2g/types.hpp"

namespace s2g::nn {

using Rng = std::mt19937_64;

enum class Pooling { mean, sum, attention };
enum class Activation { relu, none };

/// Bijection on {0..n-1}. Acting on a set moves element i to position map[i].
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> mapping);
  static Permutation identity(std::size_t n);
  static Permutation random(std::size_t n, Rng& rng);
  static Permutation swap(std::size_t n, std::size_t a, std::size_t b);

  std::size_t size() const { return map_.size(); }
  std::size_t operator()(std::size_t i) const { return map_[i]; }
  Permutation inverse() const;
  /// (this ∘ other)(i) = this(other(i)).
  Permutation compose(const Permutation& other) const;

  /// out[σ(i), :] = x[i, :] for an n×d tensor.
  Tensor apply_rows(const Tensor& x) const;
  /// out[σ(i), σ(j), ...] = x[i, j, ...] for an n×n×... tensor.
  Tensor apply_pairs(const Tensor& x) const;
  PointSet apply(const PointSet& p) const;
  Triplet apply(const Triplet& t) const;

 private:
  std::vector<std::size_t> map_;
};

/// Draws uniform values in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng);

struct Linear {
  Tensor weight;  // d_in × d_out
  Tensor bias;    // d_out

  static Linear init(std::size_t d_in, std::size_t d_out, Rng& rng);
  std::size_t d_in() const { return weight.extent(0); }
  std::size_t d_out() const { return weight.extent(1); }
  Tensor forward(const Tensor& x) const { return add_bias(matmul(x, weight), bias); }
  void collect(std::vector<Tensor>& out) const;
};

/// softmax(tanh(x·f1)·(x·f2)ᵀ / sqrt(d_small))·x
struct AttentionPool {
  Tensor f1;  // d × d_small
  Tensor f2;  // d × d_small
  std::size_t d_small = 1;

  static std::size_t small_width(std::size_t d) { return d / 10 > 0 ? d / 10 : 1; }
  static AttentionPool init(std::size_t d, Rng& rng);
  void collect(std::vector<Tensor>& out) const;
};

Tensor attention_pool(const Tensor& x, const AttentionPool& p);

/// y = act(x·W1 + pool(x)·W2 + bias)
struct DeepSetsLayer {
  Tensor w1;
  Tensor w2;
  Tensor bias;
  Pooling pooling = Pooling::mean;
  Activation activation = Activation::relu;
  std::optional<AttentionPool> attention;  // present iff pooling == attention

  static DeepSetsLayer init(std::size_t d_in, std::size_t d_out, Pooling pooling,
                            Activation activation, Rng& rng);
  std::size_t d_in() const { return w1.extent(0); }
  std::size_t d_out() const { return w1.extent(1); }
  void collect(std::vector<Tensor>& out) const;
};

Tensor deepsets_forward(const Tensor& x, const DeepSetsLayer& layer);

/// Stack of Linear layers with ReLU between them and no activation after the last.
struct Mlp {
  std::vector<Linear> layers;

  static Mlp init(std::size_t d_in, std::span<const std::size_t> widths, Rng& rng);
  std::size_t d_in() const { return layers.front().d_in(); }
  std::size_t d_out() const { return layers.back().d_out(); }
  void collect(std::vector<Tensor>& out) const;
};

/// Applies the MLP to every feature vector along the last axis independently.
/// Any leading shape is preserved; the last extent becomes mlp.d_out().
Tensor edge_mlp_forward(const Tensor& features, const Mlp& mlp);

/// B[i,j,:] = [x_i, x_j] for all ordered pairs, diagonal included. n×n×2d.
Tensor broadcast_k2_concat(const Tensor& x);

/// Five equivariant lifts per input channel, laid out as [x_i | x_j | Σx | δ_ij x_i | δ_ij Σx].
/// n×n×5d.
Tensor broadcast_k2_full(const Tensor& x);

/// Column-major view of the per-candidate 3×d blocks: rows[r] is m×d and holds
/// row r of every block, i.e. x[t[r]] for each triplet t.
struct TripletBlocks {
  std::vector<Triplet> triplets;
  std::array<Tensor, 3> rows;
  bool empty() const { return triplets.empty(); }
};

TripletBlocks broadcast_k3_sparse(const Tensor& x, std::span<const Triplet> triplets);

/// Triplet scorer: each block is treated as a 3-element set, passed through a
/// DeepSets stack, max-pooled over its 3 rows, then through an MLP to one logit.
struct TripletHead {
  std::vector<DeepSetsLayer> inner;  // mean or sum pooling
  Mlp mlp;                           // d_out == 1

  static TripletHead init(std::size_t d1, std::span<const std::size_t> inner_widths,
                          std::span<const std::size_t> mlp_widths, Rng& rng);
  void collect(std::vector<Tensor>& out) const;
};

/// One logit per candidate, shape [m]. Invariant to the order of rows within a block.
Tensor symmetric_triplet_head(const TripletBlocks& blocks, const TripletHead& head);

std::size_t parameter_count(std::span<const Tensor> params);

}  // namespace s2g::nn
