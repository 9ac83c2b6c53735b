#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "s2g/layers.hpp"
#include "s2g/types.hpp"

namespace s2g::nn {

enum class Variant { s2g, s2g_plus, s2g_k3, siam, mlp_baseline };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
std::string to_string(Pooling p);
Pooling pooling_from_string(const std::string& s);

/// Widths follow the "[w1, w2, ...]" convention: one entry per layer output.
struct ModelConfig {
  Variant variant = Variant::s2g;
  std::size_t d_in = 2;
  std::vector<std::size_t> phi_widths{64, 64, 64};  // hidden widths of φ; a last layer maps to d1
  std::size_t d1 = 16;
  std::vector<std::size_t> psi_widths{64, 1};  // edge / triplet MLP, ends in 1
  Pooling pooling = Pooling::attention;
  std::vector<std::size_t> triplet_widths{32, 32};  // inner DeepSets of the k=3 head
  std::size_t knn_k = 10;
  std::size_t max_n = 20;  // mlp_baseline only
  std::uint64_t seed = 0;

  void validate() const;
  bool is_k3() const { return variant == Variant::s2g_k3; }
};

/// Default hidden widths of φ. SIAM's per-element MLP is widened so its total
/// parameter count lands within 10% of the DeepSets-based S2G at d_in=2.
std::vector<std::size_t> default_phi_widths(Variant v);

/// F^k(X): n×n edge logits (k=2) or one logit per candidate (k=3).
struct ModelOutput {
  Tensor edge_logits;             // n×n
  std::vector<Triplet> triplets;  // k=3, aligned with triplet_logits
  Tensor triplet_logits;          // [m]; undefined when there are no candidates
};

class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  /// Every trainable tensor in declaration order. Handles alias the model's storage.
  const std::vector<Tensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  /// Dispatches on the variant; k=3 models require `candidates`.
  ModelOutput forward(const PointSet& x, std::span<const Triplet> candidates = {}) const;

  /// Copies parameter values (not handles) from `values`, declaration order.
  void load_parameters(const std::vector<std::vector<double>>& values);
  std::vector<std::vector<double>> snapshot() const;

  const std::vector<DeepSetsLayer>& phi_sets() const { return phi_sets_; }
  const Mlp& phi_mlp() const { return phi_mlp_; }
  const Mlp& psi() const { return psi_; }
  const TripletHead& head() const { return head_; }

 private:
  ModelConfig config_;
  std::vector<DeepSetsLayer> phi_sets_;  // s2g, s2g_plus, s2g_k3
  Mlp phi_mlp_;                          // siam (per element), mlp_baseline (flattened)
  Mlp psi_;
  TripletHead head_;
  std::vector<Tensor> params_;
};

ModelOutput s2g_forward(const PointSet& x, const Model& model);
ModelOutput s2g_k3_forward(const PointSet& x, std::span<const Triplet> candidates,
                           const Model& model);
ModelOutput siam_forward(const PointSet& x, const Model& model);
ModelOutput mlp_baseline_forward(const PointSet& x, const Model& model);

/// Binary checkpoint: magic, format version, JSON header (config), then every
/// parameter tensor as a length-prefixed run of little-endian 64-bit reals.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace s2g::nn
