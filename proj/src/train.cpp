#include "s2g/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "s2g/losses.hpp"

namespace s2g::train {

namespace {

bool is_k3(const data::Sample& s) { return data::is_hull_task(s.task); }

/// Collects predictions over a split and reduces them into one MetricsRecord.
class MetricAccumulator {
 public:
  void add(const data::Sample& s, const nn::ModelOutput& out, double loss) {
    loss_sum_ += loss;
    ++sets_;
    if (is_k3(s)) {
      if (!out.triplet_logits.defined()) return;
      auto z = out.triplet_logits.data();
      std::vector<std::uint8_t> pred(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) pred[i] = z[i] > 0.0;
      confusion_ += binary_confusion(pred, s.candidates.labels);
      scores_.insert(scores_.end(), z.begin(), z.end());
      labels_.insert(labels_.end(), s.candidates.labels.begin(), s.candidates.labels.end());
      return;
    }
    EdgeLabels pred = predict_edges(out.edge_logits);
    if (s.task == data::Task::partition) {
      auto [part, closure] = connected_components_to_cliques(pred);
      ri_sum_ += rand_index(part, s.partition);
      ari_sum_ += adjusted_rand_index(part, s.partition);
      pred = std::move(closure);
      has_partition_ = true;
    }
    confusion_ += edge_confusion(pred, s.edges);
    const std::size_t n = s.points.n;
    auto z = out.edge_logits.data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        scores_.push_back(0.5 * (z[i * n + j] + z[j * n + i]));
        labels_.push_back(s.edges(i, j));
      }
  }

  MetricsRecord finish(std::size_t epoch, const std::string& split) const {
    MetricsRecord r;
    r.epoch = epoch;
    r.split = split;
    r.loss = sets_ ? loss_sum_ / static_cast<double>(sets_) : 0.0;
    const auto s = scores_from(confusion_);
    r.f1 = s.f1;
    r.precision = s.precision;
    r.recall = s.recall;
    r.accuracy = s.accuracy;
    if (has_partition_) {
      r.rand_index = ri_sum_ / static_cast<double>(sets_);
      r.adjusted_rand_index = ari_sum_ / static_cast<double>(sets_);
    }
    const auto pos = std::count(labels_.begin(), labels_.end(), 1);
    if (pos > 0 && static_cast<std::size_t>(pos) < labels_.size()) r.auc_roc = auc_roc(scores_, labels_);
    return r;
  }

 private:
  double loss_sum_ = 0.0;
  std::size_t sets_ = 0;
  Confusion confusion_;
  double ri_sum_ = 0.0, ari_sum_ = 0.0;
  bool has_partition_ = false;
  std::vector<double> scores_;
  std::vector<std::uint8_t> labels_;
};

nn::ModelOutput run(const nn::Model& model, const data::Sample& s) {
  return model.forward(s.points, s.candidates.triples);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("train.learning_rate must be non-negative");
  }
  if (batch_size == 0) throw ValidationError("train.batch_size must be positive");
  if (max_epochs == 0) throw ValidationError("train.max_epochs must be positive");
  if (patience == 0) throw ValidationError("train.patience must be >= 1");
  if (loss_weights.bce < 0 || loss_weights.f1 < 0) throw ValidationError("train.loss_weights must be non-negative");
}

AdamState AdamState::like(std::span<const Tensor> params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.size(), 0.0);
    s.v.emplace_back(p.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<Tensor> params, AdamState& state, double lr) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam_step: state holds " + std::to_string(state.m.size()) +
                         " moment arrays for " + std::to_string(params.size()) + " parameters");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k].data_mut();
    auto g = params[k].grad();
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != theta.size() || v.size() != theta.size()) {
      throw DimensionError("adam_step: moment shape mismatch for parameter " + std::to_string(k));
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      theta[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

bool early_stopping(std::span<const double> history, std::size_t patience) {
  if (history.empty()) throw std::invalid_argument("early_stopping: empty history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i)
    if (history[i] > history[best]) best = i;
  return history.size() - 1 - best >= patience;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& rows) {
  os << kMetricsCsvHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.split << ',' << fmt(r.loss) << ',' << fmt(r.f1) << ','
       << fmt(r.precision) << ',' << fmt(r.recall) << ',' << fmt(r.accuracy) << ','
       << opt(r.rand_index) << ',' << opt(r.adjusted_rand_index) << ',' << opt(r.auc_roc) << '\n';
  }
}

Tensor sample_loss(const nn::ModelOutput& out, const data::Sample& s, const LossWeights& w) {
  Tensor bce, f1;
  if (is_k3(s)) {
    if (!out.triplet_logits.defined()) return Tensor::scalar(0.0);
    bce = triplet_bce_loss(out.triplet_logits, s.candidates.labels);
    f1 = triplet_soft_f1_loss(sigmoid(out.triplet_logits), s.candidates.labels);
  } else {
    bce = bce_edge_loss(out.edge_logits, s.edges);
    f1 = soft_f1_loss(sigmoid(out.edge_logits), s.edges);
  }
  if (w.f1 == 0.0) return scale(bce, w.bce);
  if (w.bce == 0.0) return scale(f1, w.f1);
  return add(scale(bce, w.bce), scale(f1, w.f1));
}

MetricsRecord evaluate(const nn::Model& model, std::span<const data::Sample> samples,
                       const LossWeights& w, std::size_t epoch, const std::string& split) {
  MetricAccumulator acc;
  for (const auto& s : samples) {
    auto out = run(model, s);
    acc.add(s, out, sample_loss(out, s, w).item());
  }
  return acc.finish(epoch, split);
}

TrainResult train(nn::Model& model, std::span<const data::Sample> train_set,
                  std::span<const data::Sample> val_set, const TrainConfig& cfg,
                  const std::function<void(const MetricsRecord&)>& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training split");
  if (val_set.empty()) throw std::invalid_argument("train: empty validation split");

  std::vector<Tensor> params = model.parameters();
  AdamState adam = AdamState::like(params);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<double> val_f1;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    MetricAccumulator acc;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto& p : params) p.zero_grad();
      {
        Tape tape;
        Tensor total;
        for (std::size_t b = start; b < end; ++b) {
          const auto& s = train_set[order[b]];
          auto out = run(model, s);
          Tensor loss = sample_loss(out, s, cfg.loss_weights);
          acc.add(s, out, loss.item());
          if (!loss.requires_grad()) continue;
          total = total.defined() ? add(total, loss) : loss;
        }
        if (total.defined()) tape.backward(scale(total, 1.0 / static_cast<double>(end - start)));
      }
      adam_step(params, adam, cfg.learning_rate);
    }
    MetricsRecord train_row = acc.finish(epoch, "train");
    MetricsRecord val_row = evaluate(model, val_set, cfg.loss_weights, epoch, "val");
    result.history.push_back(train_row);
    result.history.push_back(val_row);
    if (on_epoch) {
      on_epoch(train_row);
      on_epoch(val_row);
    }
    val_f1.push_back(val_row.f1);
    if (result.best_parameters.empty() || val_row.f1 > result.best_val_f1) {
      result.best_val_f1 = val_row.f1;
      result.best_epoch = epoch;
      result.best_parameters = model.snapshot();
    }
    if (early_stopping(val_f1, cfg.patience)) break;
  }
  model.load_parameters(result.best_parameters);
  return result;
}

}  // namespace s2g::train
