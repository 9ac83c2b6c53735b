#include "s2g/models.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace s2g::nn {

namespace {

constexpr char kMagic[8] = {'S', '2', 'G', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

void require_set(const PointSet& x, const ModelConfig& cfg) {
  if (x.n < 2) throw EmptySetError("degenerate set: need at least 2 elements, got " + std::to_string(x.n));
  if (x.dim != cfg.d_in) {
    throw DimensionError("input dimension " + std::to_string(x.dim) + " vs model d_in " +
                         std::to_string(cfg.d_in));
  }
}

Tensor run_phi_sets(const Tensor& x, const std::vector<DeepSetsLayer>& layers) {
  Tensor h = x;
  for (const auto& l : layers) h = deepsets_forward(h, l);
  return h;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

void write_u64(std::ostream& os, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t read_uint(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) {
    const int c = is.get();
    if (c == EOF) throw ValidationError("checkpoint: unexpected end of file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return v;
}

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"variant", to_string(c.variant)},   {"d_in", c.d_in},
          {"phi_widths", c.phi_widths},        {"d1", c.d1},
          {"psi_widths", c.psi_widths},        {"pooling", to_string(c.pooling)},
          {"triplet_widths", c.triplet_widths}, {"knn_k", c.knn_k},
          {"max_n", c.max_n},                  {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.d_in = j.at("d_in").get<std::size_t>();
  c.phi_widths = j.at("phi_widths").get<std::vector<std::size_t>>();
  c.d1 = j.at("d1").get<std::size_t>();
  c.psi_widths = j.at("psi_widths").get<std::vector<std::size_t>>();
  c.pooling = pooling_from_string(j.at("pooling").get<std::string>());
  c.triplet_widths = j.at("triplet_widths").get<std::vector<std::size_t>>();
  c.knn_k = j.at("knn_k").get<std::size_t>();
  c.max_n = j.at("max_n").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::s2g: return "s2g";
    case Variant::s2g_plus: return "s2g_plus";
    case Variant::s2g_k3: return "s2g_k3";
    case Variant::siam: return "siam";
    case Variant::mlp_baseline: return "mlp_baseline";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "s2g") return Variant::s2g;
  if (s == "s2g_plus") return Variant::s2g_plus;
  if (s == "s2g_k3") return Variant::s2g_k3;
  if (s == "siam") return Variant::siam;
  if (s == "mlp_baseline") return Variant::mlp_baseline;
  throw ValidationError("unknown model variant '" + s + "'");
}

std::string to_string(Pooling p) {
  switch (p) {
    case Pooling::mean: return "mean";
    case Pooling::sum: return "sum";
    case Pooling::attention: return "attention";
  }
  return "?";
}

Pooling pooling_from_string(const std::string& s) {
  if (s == "mean") return Pooling::mean;
  if (s == "sum") return Pooling::sum;
  if (s == "attention") return Pooling::attention;
  throw ValidationError("unknown pooling '" + s + "'");
}

void ModelConfig::validate() const {
  auto positive = [](const std::vector<std::size_t>& w, const char* name) {
    for (auto v : w)
      if (v == 0) throw ValidationError(std::string(name) + ": widths must be positive");
  };
  positive(phi_widths, "phi_widths");
  positive(psi_widths, "psi_widths");
  positive(triplet_widths, "triplet_widths");
  if (d_in == 0 || d1 == 0) throw ValidationError("d_in and d1 must be positive");
  if (psi_widths.empty() || psi_widths.back() != 1) {
    throw ValidationError("psi_widths must end in a single output logit");
  }
  if (variant == Variant::s2g_k3 && triplet_widths.empty()) {
    throw ValidationError("triplet_widths must be non-empty for s2g_k3");
  }
  if (variant == Variant::mlp_baseline && max_n < 2) throw ValidationError("max_n must be >= 2");
}

std::vector<std::size_t> default_phi_widths(Variant v) {
  if (v == Variant::siam) return {96, 96, 96};
  return {64, 64, 64};
}

// ---- Model ---------------------------------------------------------------------------

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.seed);
  const auto& c = config_;
  switch (c.variant) {
    case Variant::s2g:
    case Variant::s2g_plus:
    case Variant::s2g_k3: {
      std::size_t prev = c.d_in;
      for (auto w : c.phi_widths) {
        phi_sets_.push_back(DeepSetsLayer::init(prev, w, c.pooling, Activation::relu, rng));
        prev = w;
      }
      phi_sets_.push_back(DeepSetsLayer::init(prev, c.d1, c.pooling, Activation::none, rng));
      if (c.variant == Variant::s2g_k3) {
        head_ = TripletHead::init(c.d1, c.triplet_widths, c.psi_widths, rng);
      } else {
        const std::size_t width = c.variant == Variant::s2g ? 2 * c.d1 : 5 * c.d1;
        psi_ = Mlp::init(width, c.psi_widths, rng);
      }
      break;
    }
    case Variant::siam: {
      std::vector<std::size_t> widths = c.phi_widths;
      widths.push_back(c.d1);
      phi_mlp_ = Mlp::init(c.d_in, widths, rng);
      psi_ = Mlp::init(2 * c.d1, c.psi_widths, rng);
      break;
    }
    case Variant::mlp_baseline: {
      std::vector<std::size_t> widths = c.phi_widths;
      widths.push_back(c.max_n * c.max_n);
      phi_mlp_ = Mlp::init(c.max_n * c.d_in, widths, rng);
      break;
    }
  }
  for (const auto& l : phi_sets_) l.collect(params_);
  if (!phi_mlp_.layers.empty()) phi_mlp_.collect(params_);
  if (!psi_.layers.empty()) psi_.collect(params_);
  if (!head_.inner.empty()) head_.collect(params_);
}

std::size_t Model::parameter_count() const { return nn::parameter_count(params_); }

ModelOutput Model::forward(const PointSet& x, std::span<const Triplet> candidates) const {
  switch (config_.variant) {
    case Variant::s2g:
    case Variant::s2g_plus: return s2g_forward(x, *this);
    case Variant::s2g_k3: return s2g_k3_forward(x, candidates, *this);
    case Variant::siam: return siam_forward(x, *this);
    case Variant::mlp_baseline: return mlp_baseline_forward(x, *this);
  }
  throw std::logic_error("unreachable");
}

void Model::load_parameters(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) {
    throw DimensionError("parameter tensor count " + std::to_string(values.size()) + " vs model " +
                         std::to_string(params_.size()));
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto dst = params_[k].data_mut();
    if (values[k].size() != dst.size()) {
      throw DimensionError("parameter " + std::to_string(k) + " has " +
                           std::to_string(values[k].size()) + " values, expected " +
                           std::to_string(dst.size()));
    }
    std::copy(values[k].begin(), values[k].end(), dst.begin());
  }
}

std::vector<std::vector<double>> Model::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.data().begin(), p.data().end());
  return out;
}

// ---- forwards ------------------------------------------------------------------------

ModelOutput s2g_forward(const PointSet& x, const Model& model) {
  const auto& cfg = model.config();
  if (cfg.variant != Variant::s2g && cfg.variant != Variant::s2g_plus) {
    throw std::invalid_argument("s2g_forward on a " + to_string(cfg.variant) + " model");
  }
  require_set(x, cfg);
  Tensor h = run_phi_sets(x.to_tensor(), model.phi_sets());
  Tensor lifted = cfg.variant == Variant::s2g ? broadcast_k2_concat(h) : broadcast_k2_full(h);
  ModelOutput out;
  out.edge_logits = reshape(edge_mlp_forward(lifted, model.psi()), {x.n, x.n});
  return out;
}

ModelOutput s2g_k3_forward(const PointSet& x, std::span<const Triplet> candidates,
                           const Model& model) {
  const auto& cfg = model.config();
  if (cfg.variant != Variant::s2g_k3) {
    throw std::invalid_argument("s2g_k3_forward on a " + to_string(cfg.variant) + " model");
  }
  require_set(x, cfg);
  for (const auto& t : candidates)
    for (auto i : t)
      if (i >= x.n) {
        throw DimensionError("candidate index " + std::to_string(i) + " >= n=" + std::to_string(x.n));
      }
  ModelOutput out;
  out.triplets.assign(candidates.begin(), candidates.end());
  if (candidates.empty()) return out;
  Tensor h = run_phi_sets(x.to_tensor(), model.phi_sets());
  out.triplet_logits = symmetric_triplet_head(broadcast_k3_sparse(h, candidates), model.head());
  return out;
}

ModelOutput siam_forward(const PointSet& x, const Model& model) {
  const auto& cfg = model.config();
  if (cfg.variant != Variant::siam) {
    throw std::invalid_argument("siam_forward on a " + to_string(cfg.variant) + " model");
  }
  require_set(x, cfg);
  Tensor h = edge_mlp_forward(x.to_tensor(), model.phi_mlp());
  ModelOutput out;
  out.edge_logits = reshape(edge_mlp_forward(broadcast_k2_concat(h), model.psi()), {x.n, x.n});
  return out;
}

ModelOutput mlp_baseline_forward(const PointSet& x, const Model& model) {
  const auto& cfg = model.config();
  if (cfg.variant != Variant::mlp_baseline) {
    throw std::invalid_argument("mlp_baseline_forward on a " + to_string(cfg.variant) + " model");
  }
  require_set(x, cfg);
  if (x.n > cfg.max_n) {
    throw DimensionError("set size " + std::to_string(x.n) + " exceeds max_n=" +
                         std::to_string(cfg.max_n));
  }
  std::vector<double> padded(cfg.max_n * cfg.d_in, 0.0);
  std::copy(x.coords.begin(), x.coords.end(), padded.begin());
  Tensor flat({1, cfg.max_n * cfg.d_in}, std::move(padded));
  Tensor full = edge_mlp_forward(flat, model.phi_mlp());  // 1 × max_n²
  Tensor grid = reshape(full, {cfg.max_n, cfg.max_n});
  ModelOutput out;
  if (x.n == cfg.max_n) {
    out.edge_logits = grid;
    return out;
  }
  // Crop: rows 0..n-1, then columns 0..n-1 via a transpose round trip.
  std::vector<std::size_t> keep(x.n);
  for (std::size_t i = 0; i < x.n; ++i) keep[i] = i;
  Tensor rows = gather_rows(grid, keep);
  out.edge_logits = transpose(gather_rows(transpose(rows), keep));
  return out;
}

// ---- checkpoints ---------------------------------------------------------------------

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kFormatVersion);
  const std::string header = config_to_json(model.config()).dump();
  write_u32(os, static_cast<std::uint32_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto& params = model.parameters();
  write_u64(os, params.size());
  for (const auto& p : params) {
    write_u64(os, p.size());
    for (double v : p.data()) write_u64(os, std::bit_cast<std::uint64_t>(v));
  }
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("checkpoint: bad magic in " + path.string());
  }
  const auto version = read_uint(is, 4);
  if (version != kFormatVersion) {
    throw ValidationError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const auto header_len = read_uint(is, 4);
  std::string header(header_len, '\0');
  is.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!is) throw ValidationError("checkpoint: truncated header");
  Model model(config_from_json(nlohmann::json::parse(header)));
  const auto count = read_uint(is, 8);
  std::vector<std::vector<double>> values(count);
  for (auto& v : values) {
    const auto len = read_uint(is, 8);
    v.resize(len);
    for (auto& x : v) x = std::bit_cast<double>(read_uint(is, 8));
  }
  model.load_parameters(values);
  return model;
}

}  // namespace s2g::nn
