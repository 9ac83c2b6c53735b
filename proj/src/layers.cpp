#include "s2g/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace s2g::nn {

// ---- Permutation ------------------------------------------------------------------

Permutation::Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
  std::vector<bool> seen(map_.size(), false);
  for (auto v : map_) {
    if (v >= map_.size() || seen[v]) throw std::invalid_argument("permutation is not a bijection");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

Permutation Permutation::random(std::size_t n, Rng& rng) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  std::shuffle(m.begin(), m.end(), rng);
  return Permutation(std::move(m));
}

Permutation Permutation::swap(std::size_t n, std::size_t a, std::size_t b) {
  auto p = identity(n);
  std::swap(p.map_[a], p.map_[b]);
  return p;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) throw DimensionError("compose: permutation sizes differ");
  std::vector<std::size_t> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = map_[other.map_[i]];
  return Permutation(std::move(m));
}

Tensor Permutation::apply_rows(const Tensor& x) const {
  if (x.extent(0) != size()) throw DimensionError("apply_rows: " + shape_str(x.shape()));
  const std::size_t inner = x.size() / size();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < size(); ++i)
    std::copy_n(x.data().begin() + i * inner, inner, out.begin() + map_[i] * inner);
  return Tensor(x.shape(), std::move(out));
}

Tensor Permutation::apply_pairs(const Tensor& x) const {
  if (x.rank() < 2 || x.extent(0) != size() || x.extent(1) != size()) {
    throw DimensionError("apply_pairs: " + shape_str(x.shape()));
  }
  const std::size_t n = size();
  const std::size_t inner = x.size() / (n * n);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      std::copy_n(x.data().begin() + (i * n + j) * inner, inner,
                  out.begin() + (map_[i] * n + map_[j]) * inner);
  return Tensor(x.shape(), std::move(out));
}

PointSet Permutation::apply(const PointSet& p) const {
  if (p.n != size()) throw DimensionError("permutation size does not match point set");
  PointSet out{p.n, p.dim, std::vector<double>(p.coords.size())};
  for (std::size_t i = 0; i < p.n; ++i)
    std::copy_n(p.coords.begin() + i * p.dim, p.dim, out.coords.begin() + map_[i] * p.dim);
  return out;
}

Triplet Permutation::apply(const Triplet& t) const { return {map_[t[0]], map_[t[1]], map_[t[2]]}; }

// ---- parameters -------------------------------------------------------------------

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(numel(shape));
  for (auto& v : data) v = dist(rng);
  return Tensor(std::move(shape), std::move(data), true);
}

std::size_t parameter_count(std::span<const Tensor> params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

Linear Linear::init(std::size_t d_in, std::size_t d_out, Rng& rng) {
  Linear l;
  l.weight = init_uniform({d_in, d_out}, d_in, rng);
  l.bias = init_uniform({d_out}, d_in, rng);
  return l;
}

void Linear::collect(std::vector<Tensor>& out) const {
  out.push_back(weight);
  out.push_back(bias);
}

AttentionPool AttentionPool::init(std::size_t d, Rng& rng) {
  AttentionPool p;
  p.d_small = small_width(d);
  p.f1 = init_uniform({d, p.d_small}, d, rng);
  p.f2 = init_uniform({d, p.d_small}, d, rng);
  return p;
}

void AttentionPool::collect(std::vector<Tensor>& out) const {
  out.push_back(f1);
  out.push_back(f2);
}

DeepSetsLayer DeepSetsLayer::init(std::size_t d_in, std::size_t d_out, Pooling pooling,
                                  Activation activation, Rng& rng) {
  DeepSetsLayer l;
  l.w1 = init_uniform({d_in, d_out}, d_in, rng);
  l.w2 = init_uniform({d_in, d_out}, d_in, rng);
  l.bias = init_uniform({d_out}, d_in, rng);
  l.pooling = pooling;
  l.activation = activation;
  if (pooling == Pooling::attention) l.attention = AttentionPool::init(d_in, rng);
  return l;
}

void DeepSetsLayer::collect(std::vector<Tensor>& out) const {
  out.push_back(w1);
  out.push_back(w2);
  out.push_back(bias);
  if (attention) attention->collect(out);
}

Mlp Mlp::init(std::size_t d_in, std::span<const std::size_t> widths, Rng& rng) {
  if (widths.empty()) throw std::invalid_argument("Mlp needs at least one layer");
  Mlp m;
  std::size_t prev = d_in;
  for (auto w : widths) {
    m.layers.push_back(Linear::init(prev, w, rng));
    prev = w;
  }
  return m;
}

void Mlp::collect(std::vector<Tensor>& out) const {
  for (const auto& l : layers) l.collect(out);
}

// ---- forward passes ---------------------------------------------------------------

Tensor attention_pool(const Tensor& x, const AttentionPool& p) {
  if (x.rank() != 2 || x.extent(1) != p.f1.extent(0)) {
    throw DimensionError("attention_pool: input " + shape_str(x.shape()) + " vs f1 " +
                         shape_str(p.f1.shape()));
  }
  Tensor q = tanh(matmul(x, p.f1));
  Tensor k = matmul(x, p.f2);
  Tensor scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(p.d_small)));
  return matmul(softmax_rows(scores), x);
}

Tensor deepsets_forward(const Tensor& x, const DeepSetsLayer& layer) {
  if (x.rank() != 2) throw DimensionError("deepsets_forward: expected n×d, got " + shape_str(x.shape()));
  if (x.extent(1) != layer.d_in()) {
    throw DimensionError("deepsets_forward: input width " + std::to_string(x.extent(1)) +
                         " vs layer " + std::to_string(layer.d_in()));
  }
  const std::size_t n = x.extent(0);
  Tensor context;
  switch (layer.pooling) {
    case Pooling::mean:
    case Pooling::sum: {
      // pooled·W2 is identical for every row, so it is computed once and replicated.
      Tensor pooled = reduce(layer.pooling == Pooling::mean ? Reduce::mean : Reduce::sum, x, 0);
      context = repeat_rows(matmul(reshape(pooled, {1, x.extent(1)}), layer.w2), n);
      break;
    }
    case Pooling::attention:
      if (!layer.attention) throw std::invalid_argument("attention pooling without parameters");
      context = matmul(attention_pool(x, *layer.attention), layer.w2);
      break;
  }
  Tensor y = add_bias(add(matmul(x, layer.w1), context), layer.bias);
  return layer.activation == Activation::relu ? relu(y) : y;
}

Tensor edge_mlp_forward(const Tensor& features, const Mlp& mlp) {
  const std::size_t width = features.shape().back();
  if (width != mlp.d_in()) {
    throw DimensionError("edge_mlp_forward: feature width " + std::to_string(width) +
                         " vs mlp input " + std::to_string(mlp.d_in()));
  }
  Shape out_shape = features.shape();
  out_shape.back() = mlp.d_out();
  Tensor h = features.rank() == 2 ? features : reshape(features, {features.size() / width, width});
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    h = mlp.layers[i].forward(h);
    if (i + 1 < mlp.layers.size()) h = relu(h);
  }
  return features.rank() == 2 ? h : reshape(h, out_shape);
}

Tensor broadcast_k2_concat(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("broadcast_k2_concat: expected n×d");
  const std::size_t n = x.extent(0), d = x.extent(1), w = 2 * d;
  std::vector<double> out(n * n * w);
  auto xs = x.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double* dst = out.data() + (i * n + j) * w;
      std::copy_n(xs.begin() + i * d, d, dst);
      std::copy_n(xs.begin() + j * d, d, dst + d);
    }
  Tensor cx = x;
  return make_result({n, n, w}, std::move(out), {x}, [cx, n, d, w](std::span<const double> g) mutable {
    if (!cx.requires_grad()) return;
    auto dx = cx.grad_mut();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double* gp = g.data() + (i * n + j) * w;
        for (std::size_t c = 0; c < d; ++c) {
          dx[i * d + c] += gp[c];
          dx[j * d + c] += gp[d + c];
        }
      }
  });
}

Tensor broadcast_k2_full(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("broadcast_k2_full: expected n×d");
  const std::size_t n = x.extent(0), d = x.extent(1), w = 5 * d;
  auto xs = x.data();
  std::vector<double> total(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) total[c] += xs[i * d + c];

  std::vector<double> out(n * n * w, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double* dst = out.data() + (i * n + j) * w;
      for (std::size_t c = 0; c < d; ++c) {
        dst[c] = xs[i * d + c];
        dst[d + c] = xs[j * d + c];
        dst[2 * d + c] = total[c];
        if (i == j) {
          dst[3 * d + c] = xs[i * d + c];
          dst[4 * d + c] = total[c];
        }
      }
    }
  Tensor cx = x;
  return make_result({n, n, w}, std::move(out), {x}, [cx, n, d, w](std::span<const double> g) mutable {
    if (!cx.requires_grad()) return;
    auto dx = cx.grad_mut();
    // Channels 3 and 5 depend on every element through the sum.
    std::vector<double> dtotal(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double* gp = g.data() + (i * n + j) * w;
        for (std::size_t c = 0; c < d; ++c) {
          dx[i * d + c] += gp[c];
          dx[j * d + c] += gp[d + c];
          dtotal[c] += gp[2 * d + c];
          if (i == j) {
            dx[i * d + c] += gp[3 * d + c];
            dtotal[c] += gp[4 * d + c];
          }
        }
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) dx[i * d + c] += dtotal[c];
  });
}

TripletBlocks broadcast_k3_sparse(const Tensor& x, std::span<const Triplet> triplets) {
  if (x.rank() != 2) throw DimensionError("broadcast_k3_sparse: expected n×d");
  const std::size_t n = x.extent(0);
  TripletBlocks blocks;
  blocks.triplets.assign(triplets.begin(), triplets.end());
  if (triplets.empty()) return blocks;
  std::array<std::vector<std::size_t>, 3> idx;
  for (const auto& t : triplets) {
    if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2]) {
      throw std::invalid_argument("broadcast_k3_sparse: repeated index in triplet (" +
                                  std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
                                  std::to_string(t[2]) + ")");
    }
    for (std::size_t r = 0; r < 3; ++r) {
      if (t[r] >= n) throw DimensionError("broadcast_k3_sparse: triplet index out of range");
      idx[r].push_back(t[r]);
    }
  }
  for (std::size_t r = 0; r < 3; ++r) blocks.rows[r] = gather_rows(x, idx[r]);
  return blocks;
}

TripletHead TripletHead::init(std::size_t d1, std::span<const std::size_t> inner_widths,
                              std::span<const std::size_t> mlp_widths, Rng& rng) {
  if (inner_widths.empty()) throw std::invalid_argument("triplet head needs an inner DeepSets layer");
  if (mlp_widths.empty() || mlp_widths.back() != 1) {
    throw std::invalid_argument("triplet head MLP must end in a single logit");
  }
  TripletHead h;
  std::size_t prev = d1;
  for (std::size_t i = 0; i < inner_widths.size(); ++i) {
    const bool last = i + 1 == inner_widths.size();
    h.inner.push_back(DeepSetsLayer::init(prev, inner_widths[i], Pooling::mean,
                                          last ? Activation::none : Activation::relu, rng));
    prev = inner_widths[i];
  }
  h.mlp = Mlp::init(prev, mlp_widths, rng);
  return h;
}

void TripletHead::collect(std::vector<Tensor>& out) const {
  for (const auto& l : inner) l.collect(out);
  mlp.collect(out);
}

Tensor symmetric_triplet_head(const TripletBlocks& blocks, const TripletHead& head) {
  if (blocks.empty()) throw std::invalid_argument("symmetric_triplet_head: no candidates");
  const std::size_t m = blocks.triplets.size();
  std::array<Tensor, 3> rows = blocks.rows;
  for (const auto& layer : head.inner) {
    if (layer.pooling == Pooling::attention) {
      throw std::invalid_argument("triplet head layers use mean or sum pooling");
    }
    if (rows[0].extent(1) != layer.d_in()) throw DimensionError("triplet head: width mismatch");
    // All m 3-element sets are processed together: row r of every block sits in rows[r].
    Tensor pooled = add(add(rows[0], rows[1]), rows[2]);
    if (layer.pooling == Pooling::mean) pooled = scale(pooled, 1.0 / 3.0);
    Tensor context = matmul(pooled, layer.w2);
    for (auto& r : rows) {
      Tensor y = add_bias(add(matmul(r, layer.w1), context), layer.bias);
      r = layer.activation == Activation::relu ? relu(y) : y;
    }
  }
  Tensor pooled = reduce(Reduce::max, stack(rows), 0);
  return reshape(edge_mlp_forward(pooled, head.mlp), {m});
}

}  // namespace s2g::nn
