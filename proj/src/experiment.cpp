#include "s2g/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "s2g/svg.hpp"

namespace s2g::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json generation_params(const ExperimentConfig& cfg) {
  json j = {{"task", data::to_string(cfg.task)},
            {"seed", cfg.seed},
            {"train", cfg.sizes.train},
            {"val", cfg.sizes.val},
            {"test", cfg.sizes.test},
            {"n_min", cfg.data.n_min},
            {"n_max", cfg.data.n_max},
            {"generator_version", kGeneratorVersion}};
  if (data::is_hull_task(cfg.task)) j["knn_k"] = cfg.data.knn_k;
  if (cfg.task == data::Task::partition) {
    j["clusters_min"] = cfg.data.clusters_min;
    j["clusters_max"] = cfg.data.clusters_max;
    j["d_in"] = cfg.data.d_in;
    j["spread"] = cfg.data.spread;
  }
  return j;
}

std::uint64_t split_base(std::uint64_t seed, std::uint64_t split) {
  return data::sample_seed(seed, 0x73706c6974ULL + split);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

json metrics_json(const train::MetricsRecord& r) {
  json j = {{"loss", r.loss}, {"f1", r.f1}, {"precision", r.precision}, {"recall", r.recall},
            {"accuracy", r.accuracy}};
  if (r.rand_index) j["ri"] = *r.rand_index;
  if (r.adjusted_rand_index) j["ari"] = *r.adjusted_rand_index;
  if (r.auc_roc) j["auc"] = *r.auc_roc;
  return j;
}

}  // namespace

std::string cache_key(const ExperimentConfig& cfg) {
  const std::string canonical = generation_params(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Paths artifact_paths(const ExperimentConfig& cfg) {
  return {cfg.out / "model.ckpt", cfg.out / "metrics.csv", cfg.out / "summary.json",
          cfg.out / "evaluation.json", cfg.out / "renders"};
}

Datasets load_or_generate(const ExperimentConfig& cfg) {
  Datasets d;
  d.cache_key = cache_key(cfg);
  const fs::path dir = cfg.out / "data" / d.cache_key;
  const json expected = generation_params(cfg);
  if (fs::exists(dir / "meta.json")) {
    std::ifstream is(dir / "meta.json");
    json meta;
    try {
      meta = json::parse(is);
    } catch (const json::exception&) {
      throw std::runtime_error("cache hash mismatch: unreadable " + (dir / "meta.json").string());
    }
    if (meta != expected) throw std::runtime_error("cache hash mismatch in " + dir.string());
    d.train = data::read_jsonl(dir / "train.jsonl");
    d.val = data::read_jsonl(dir / "val.jsonl");
    d.test = data::read_jsonl(dir / "test.jsonl");
    if (d.train.size() != cfg.sizes.train || d.val.size() != cfg.sizes.val || d.test.size() != cfg.sizes.test) {
      throw std::runtime_error("cache hash mismatch: split sizes differ in " + dir.string());
    }
    d.from_cache = true;
    return d;
  }
  d.train = data::generate_split(cfg.task, cfg.data, cfg.sizes.train, split_base(cfg.seed, 0));
  d.val = data::generate_split(cfg.task, cfg.data, cfg.sizes.val, split_base(cfg.seed, 1));
  d.test = data::generate_split(cfg.task, cfg.data, cfg.sizes.test, split_base(cfg.seed, 2));
  ensure_dir(dir);
  data::write_jsonl(d.train, dir / "train.jsonl");
  data::write_jsonl(d.val, dir / "val.jsonl");
  data::write_jsonl(d.test, dir / "test.jsonl");
  // meta.json last: its presence marks a complete cache entry.
  write_text(dir / "meta.json", expected.dump(2) + "\n");
  return d;
}

void print_plan(const ExperimentConfig& cfg, const std::string& subcommand, std::ostream& os) {
  os << "subcommand: " << subcommand << "\n"
     << "config: " << cfg.to_json().dump() << "\n"
     << "dataset cache: " << (cfg.out / "data" / cache_key(cfg)).string() << "\n";
  const auto p = artifact_paths(cfg);
  if (subcommand == "train" || subcommand == "all") {
    os << "would write: " << p.checkpoint.string() << ", " << p.metrics.string() << ", "
       << p.summary.string() << "\n";
  }
  if (subcommand == "evaluate" || subcommand == "all") os << "would write: " << p.evaluation.string() << "\n";
  if ((subcommand == "render" || subcommand == "all") && cfg.task == data::Task::delaunay) {
    os << "would write: up to 8 SVG pairs under " << p.renders.string() << "\n";
  }
}

void run_generate(const ExperimentConfig& cfg, std::ostream& log) {
  auto d = load_or_generate(cfg);
  log << (d.from_cache ? "reused" : "generated") << " dataset " << d.cache_key << ": " << d.train.size()
      << "/" << d.val.size() << "/" << d.test.size() << " sets\n";
}

void run_train(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  ensure_dir(cfg.out);
  auto d = load_or_generate(cfg);
  nn::Model model(cfg.model);
  log << "training " << nn::to_string(cfg.model.variant) << " (" << model.parameter_count()
      << " parameters) on " << d.train.size() << " sets\n";
  auto result = train::train(model, d.train, d.val, cfg.train, [&](const train::MetricsRecord& r) {
    if (r.split == "val") log << "epoch " << r.epoch << " val f1=" << r.f1 << " loss=" << r.loss << "\n";
  });
  auto test = train::evaluate(model, d.test, cfg.train.loss_weights, result.best_epoch, "test");
  const auto p = artifact_paths(cfg);
  nn::save_checkpoint(model, p.checkpoint);

  auto rows = result.history;
  rows.push_back(test);
  std::ostringstream csv;
  train::write_metrics_csv(csv, rows);
  write_text(p.metrics, csv.str());

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json summary = {{"task", data::to_string(cfg.task)},
                  {"variant", nn::to_string(cfg.model.variant)},
                  {"seed", cfg.seed},
                  {"parameter_count", model.parameter_count()},
                  {"best_epoch", result.best_epoch},
                  {"epochs_run", result.history.size() / 2},
                  {"dataset", d.cache_key},
                  {"test", metrics_json(test)},
                  {"wall_time_seconds", wall}};
  write_text(p.summary, summary.dump(2) + "\n");
  log << "test f1=" << test.f1 << (test.auc_roc ? " auc=" + std::to_string(*test.auc_roc) : "") << "\n";
}

void run_evaluate(const ExperimentConfig& cfg, std::ostream& log) {
  const auto p = artifact_paths(cfg);
  if (!fs::exists(p.checkpoint)) throw std::runtime_error("no checkpoint at " + p.checkpoint.string());
  auto model = nn::load_checkpoint(p.checkpoint);
  auto d = load_or_generate(cfg);
  auto test = train::evaluate(model, d.test, cfg.train.loss_weights, 0, "test");
  json j = {{"task", data::to_string(cfg.task)},
            {"variant", nn::to_string(model.config().variant)},
            {"dataset", d.cache_key},
            {"test", metrics_json(test)}};
  write_text(p.evaluation, j.dump(2) + "\n");
  log << "test f1=" << test.f1 << "\n";
}

void run_render(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.task != data::Task::delaunay) {
    log << "render: only planar Delaunay sets are rendered; nothing to do for " << data::to_string(cfg.task)
        << "\n";
    return;
  }
  const auto p = artifact_paths(cfg);
  if (!fs::exists(p.checkpoint)) throw std::runtime_error("no checkpoint at " + p.checkpoint.string());
  auto model = nn::load_checkpoint(p.checkpoint);
  auto d = load_or_generate(cfg);
  ensure_dir(p.renders);
  const std::size_t count = std::min<std::size_t>(8, d.test.size());
  for (std::size_t i = 0; i < count; ++i) {
    const auto& s = d.test[i];
    const auto pred = train::predict_edges(model.forward(s.points).edge_logits);
    char name[32];
    std::snprintf(name, sizeof(name), "set_%02zu", i);
    write_text(p.renders / (std::string(name) + "_truth.svg"), viz::render_triangulation_svg(s.points, s.edges, s.edges));
    write_text(p.renders / (std::string(name) + "_pred.svg"), viz::render_triangulation_svg(s.points, s.edges, pred));
  }
  log << "rendered " << count << " SVG pairs to " << p.renders.string() << "\n";
}

void run_all(const ExperimentConfig& cfg, std::ostream& log) {
  run_generate(cfg, log);
  run_train(cfg, log);
  run_evaluate(cfg, log);
  run_render(cfg, log);
}

}  // namespace s2g::cli
