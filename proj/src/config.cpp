#include "s2g/config.hpp"

#include <fstream>
#include <set>

namespace s2g::cli {

using nlohmann::json;

namespace {

// Walks one JSON object; every key read is marked so leftovers can be rejected.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(where() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <class T>
  void read(const std::string& key, T& dst) {
    if (!has(key)) return;
    try {
      dst = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(key_path(key) + ": wrong type");
    }
  }

  void read_count(const std::string& key, std::size_t& dst, std::size_t min = 1) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min)) {
      throw ValidationError(key_path(key) + ": expected an integer >= " + std::to_string(min));
    }
    dst = v.get<std::size_t>();
  }

  void read_widths(const std::string& key, std::vector<std::size_t>& dst) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_array() || v.empty()) throw ValidationError(key_path(key) + ": expected a non-empty array");
    std::vector<std::size_t> out;
    for (const auto& w : v) {
      if (!w.is_number_integer() || w.get<std::int64_t>() <= 0) {
        throw ValidationError(key_path(key) + ": widths must be positive integers");
      }
      out.push_back(w.get<std::size_t>());
    }
    dst = std::move(out);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(obj_.at(key), key_path(key));
  }

  void reject_unknown() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) throw ValidationError(key_path(item.key()) + ": unknown key");
    }
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto wrap_enum(const std::string& path, F f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.model.seed = data::sample_seed(seed, 0x6d6f64656cULL);
  cfg.train.seed = data::sample_seed(seed, 0x747261696eULL);
}

ExperimentConfig default_config(data::Task task, std::uint64_t seed) {
  ExperimentConfig c;
  c.task = task;
  switch (task) {
    case data::Task::delaunay:
      c.data.n_min = c.data.n_max = 20;
      c.sizes = {5000, 500, 500};
      c.model.variant = nn::Variant::s2g;
      c.model.d_in = 2;
      break;
    case data::Task::hull_spherical:
    case data::Task::hull_gaussian:
      c.data.n_min = c.data.n_max = 30;
      c.data.knn_k = 10;
      c.sizes = {2000, 200, 200};
      c.model.variant = nn::Variant::s2g_k3;
      c.model.d_in = 3;
      break;
    case data::Task::partition:
      c.data.n_min = 2;
      c.data.n_max = 14;
      c.sizes = {3000, 1000, 1000};
      c.model.variant = nn::Variant::s2g;
      c.model.d_in = c.data.d_in;
      break;
  }
  c.out = std::filesystem::path("runs") / data::to_string(task);
  apply_seed(c, seed);
  return c;
}

ExperimentConfig parse_config(const json& doc) {
  Section root(doc, "");
  if (!root.has("task")) throw ValidationError("task: missing required key");
  if (!root.has("seed")) throw ValidationError("seed: missing required key");
  std::string task_name;
  root.read("task", task_name);
  const auto task = wrap_enum("task", [&] { return data::task_from_string(task_name); });
  const auto& seed_value = doc.at("seed");
  const bool seed_ok = seed_value.is_number_unsigned() ||
                       (seed_value.is_number_integer() && seed_value.get<std::int64_t>() >= 0);
  if (!seed_ok) throw ValidationError("seed: expected a non-negative integer");
  ExperimentConfig c = default_config(task, seed_value.get<std::uint64_t>());

  if (root.has("out")) {
    std::string out;
    root.read("out", out);
    if (out.empty()) throw ValidationError("out: must not be empty");
    c.out = out;
  }

  if (root.has("data")) {
    Section d = root.child("data");
    d.read_count("train", c.sizes.train);
    d.read_count("val", c.sizes.val);
    d.read_count("test", c.sizes.test);
    d.read_count("n_min", c.data.n_min, 2);
    d.read_count("n_max", c.data.n_max, 2);
    d.read_count("knn_k", c.data.knn_k);
    d.read_count("clusters_min", c.data.clusters_min);
    d.read_count("clusters_max", c.data.clusters_max);
    d.read_count("d_in", c.data.d_in);
    d.read("spread", c.data.spread);
    d.reject_unknown();
    if (c.data.n_min > c.data.n_max) throw ValidationError("data.n_min: exceeds data.n_max");
    if (c.data.clusters_min > c.data.clusters_max) {
      throw ValidationError("data.clusters_min: exceeds data.clusters_max");
    }
    if (!(c.data.spread > 0.0)) throw ValidationError("data.spread: must be positive");
  }
  if (task == data::Task::delaunay && c.data.n_min < 3) throw ValidationError("data.n_min: delaunay needs n >= 3");
  if (data::is_hull_task(task)) {
    if (c.data.n_min < 4) throw ValidationError("data.n_min: hull tasks need n >= 4");
    if (c.data.knn_k >= c.data.n_min) throw ValidationError("data.knn_k: must be < data.n_min");
  }

  if (root.has("model")) {
    Section m = root.child("model");
    if (m.has("variant")) {
      std::string v;
      m.read("variant", v);
      c.model.variant = wrap_enum("model.variant", [&] { return nn::variant_from_string(v); });
      c.model.phi_widths = nn::default_phi_widths(c.model.variant);
    }
    if (m.has("pooling")) {
      std::string p;
      m.read("pooling", p);
      c.model.pooling = wrap_enum("model.pooling", [&] { return nn::pooling_from_string(p); });
    }
    m.read_widths("phi_widths", c.model.phi_widths);
    m.read_count("d1", c.model.d1);
    m.read_widths("psi_widths", c.model.psi_widths);
    m.read_widths("triplet_widths", c.model.triplet_widths);
    m.reject_unknown();
  }
  c.model.d_in = task == data::Task::partition ? c.data.d_in : (task == data::Task::delaunay ? 2 : 3);
  c.model.knn_k = c.data.knn_k;
  c.model.max_n = c.data.n_max;
  if (data::is_hull_task(task) != c.model.is_k3()) {
    throw ValidationError("model.variant: " + nn::to_string(c.model.variant) + " is not compatible with task " +
                          data::to_string(task));
  }
  try {
    c.model.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }

  if (root.has("train")) {
    Section t = root.child("train");
    if (t.has("learning_rate")) {
      const auto& v = doc.at("train").at("learning_rate");
      if (!v.is_number() || v.get<double>() < 0.0) {
        throw ValidationError("train.learning_rate: must be a non-negative number");
      }
      c.train.learning_rate = v.get<double>();
    }
    t.read_count("batch_size", c.train.batch_size);
    t.read_count("max_epochs", c.train.max_epochs);
    t.read_count("patience", c.train.patience);
    if (t.has("loss_weights")) {
      Section w = t.child("loss_weights");
      w.read("bce", c.train.loss_weights.bce);
      w.read("f1", c.train.loss_weights.f1);
      w.reject_unknown();
      if (c.train.loss_weights.bce < 0 || c.train.loss_weights.f1 < 0) {
        throw ValidationError("train.loss_weights: weights must be non-negative");
      }
    }
    t.reject_unknown();
  }
  root.reject_unknown();
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": not a JSON document: " + e.what());
  }
  return parse_config(doc);
}

json ExperimentConfig::to_json() const {
  return {{"task", data::to_string(task)},
          {"seed", seed},
          {"out", out.string()},
          {"data",
           {{"train", sizes.train},
            {"val", sizes.val},
            {"test", sizes.test},
            {"n_min", data.n_min},
            {"n_max", data.n_max},
            {"knn_k", data.knn_k},
            {"clusters_min", data.clusters_min},
            {"clusters_max", data.clusters_max},
            {"d_in", data.d_in},
            {"spread", data.spread}}},
          {"model",
           {{"variant", nn::to_string(model.variant)},
            {"pooling", nn::to_string(model.pooling)},
            {"phi_widths", model.phi_widths},
            {"d1", model.d1},
            {"psi_widths", model.psi_widths},
            {"triplet_widths", model.triplet_widths}}},
          {"train",
           {{"learning_rate", train.learning_rate},
            {"batch_size", train.batch_size},
            {"max_epochs", train.max_epochs},
            {"patience", train.patience},
            {"loss_weights", {{"bce", train.loss_weights.bce}, {"f1", train.loss_weights.f1}}}}}};
}

}  // namespace s2g::cli
