#include "s2g/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace s2g::data {

using nlohmann::json;

std::string to_string(Task t) {
  switch (t) {
    case Task::delaunay: return "delaunay";
    case Task::hull_spherical: return "hull_spherical";
    case Task::hull_gaussian: return "hull_gaussian";
    case Task::partition: return "partition";
  }
  return "?";
}

Task task_from_string(const std::string& s) {
  if (s == "delaunay") return Task::delaunay;
  if (s == "hull_spherical") return Task::hull_spherical;
  if (s == "hull_gaussian") return Task::hull_gaussian;
  if (s == "partition") return Task::partition;
  throw ValidationError("unknown task '" + s + "'");
}

bool is_hull_task(Task t) { return t == Task::hull_spherical || t == Task::hull_gaussian; }

std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(base_seed) ^ index);
}

Sample generate_sample(Task task, const DataSpec& spec, std::uint64_t seed) {
  geometry::Rng rng(seed);
  Sample s;
  s.task = task;
  s.seed = seed;
  if (task == Task::partition) {
    geometry::PartitionSpec ps{spec.n_min, spec.n_max, spec.clusters_min, spec.clusters_max,
                               spec.d_in, spec.spread};
    auto drawn = geometry::sample_partition_set(ps, rng);
    s.points = std::move(drawn.points);
    s.partition = std::move(drawn.partition);
    s.edges = geometry::partition_to_adjacency(s.partition);
    return s;
  }
  if (spec.n_min > spec.n_max) throw std::invalid_argument("n_min > n_max");
  const std::size_t n = std::uniform_int_distribution<std::size_t>(spec.n_min, spec.n_max)(rng);
  if (task == Task::delaunay) {
    s.points = geometry::sample_uniform_square(n, rng);
    s.edges = geometry::delaunay_edges(s.points);
    return s;
  }
  for (;;) {
    s.points = task == Task::hull_spherical ? geometry::sample_sphere(n, rng)
                                            : geometry::sample_gaussian3(n, rng);
    try {
      s.hull = geometry::convex_hull_triangles(s.points);
      break;
    } catch (const DegeneracyError&) {
    }
  }
  s.candidates = geometry::knn_triplet_candidates(s.points, spec.knn_k, s.hull);
  return s;
}

std::vector<Sample> generate_split(Task task, const DataSpec& spec, std::size_t count,
                                   std::uint64_t base_seed) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_sample(task, spec, sample_seed(base_seed, i)));
  return out;
}

void validate_sample(const Sample& s) {
  const auto fail = [&](const std::string& what) {
    throw ValidationError("sample seed " + std::to_string(s.seed) + ": " + what);
  };
  const auto& p = s.points;
  if (p.n == 0 || p.coords.size() != p.n * p.dim) fail("points do not match n");
  for (double v : p.coords)
    if (!std::isfinite(v)) fail("non-finite coordinate");

  if (s.task == Task::delaunay || s.task == Task::partition) {
    if (s.edges.n != p.n) fail("edge labels do not match n");
    for (std::size_t i = 0; i < p.n; ++i) {
      if (s.edges(i, i)) fail("non-zero diagonal");
      for (std::size_t j = 0; j < p.n; ++j)
        if (s.edges(i, j) != s.edges(j, i)) fail("asymmetric edge labels");
    }
  }
  if (s.task == Task::delaunay) {
    if (p.dim != 2) fail("delaunay points must be 2-D");
    const std::size_t h = geometry::hull_vertex_count_2d(p);
    if (s.edges.edge_count() != 3 * p.n - 3 - h) fail("edge count violates 3n-3-h");
  }
  if (s.task == Task::partition) {
    if (s.partition.ids.size() != p.n) fail("partition size does not match n");
    if (!(Partition::from_labels(s.partition.ids) == s.partition)) fail("cluster ids not canonical");
    if (!(geometry::partition_to_adjacency(s.partition) == s.edges)) fail("edges disagree with partition");
  }
  if (is_hull_task(s.task)) {
    if (p.dim != 3) fail("hull points must be 3-D");
    if (s.task == Task::hull_spherical) {
      for (std::size_t i = 0; i < p.n; ++i) {
        double norm = 0.0;
        for (std::size_t c = 0; c < 3; ++c) norm += p(i, c) * p(i, c);
        if (std::abs(std::sqrt(norm) - 1.0) > 1e-12) fail("spherical point off the unit sphere");
      }
    }
    if (!geometry::is_closed_manifold(s.hull)) fail("hull is not a closed 2-manifold");
    const auto& c = s.candidates;
    if (c.labels.size() != c.triples.size()) fail("candidate labels misaligned");
    for (std::size_t k = 0; k < c.triples.size(); ++k) {
      const auto& t = c.triples[k];
      if (!(t[0] < t[1] && t[1] < t[2]) || t[2] >= p.n) fail("candidate triple not sorted or out of range");
      if (k > 0 && !(c.triples[k - 1] < t)) fail("candidates not unique and sorted");
      const bool in_hull = std::find(s.hull.begin(), s.hull.end(), t) != s.hull.end();
      if (in_hull != (c.labels[k] != 0)) fail("candidate label disagrees with hull");
    }
  }
}

std::string to_json_line(const Sample& s) {
  json points = json::array();
  for (std::size_t i = 0; i < s.points.n; ++i) {
    auto r = s.points.row(i);
    points.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json labels;
  switch (s.task) {
    case Task::delaunay: {
      labels = json::array();
      for (std::size_t i = 0; i < s.edges.n; ++i)
        for (std::size_t j = i + 1; j < s.edges.n; ++j)
          if (s.edges(i, j)) labels.push_back({i, j});
      break;
    }
    case Task::partition: labels = s.partition.ids; break;
    case Task::hull_spherical:
    case Task::hull_gaussian:
      labels = {{"hull", s.hull}, {"candidates", s.candidates.triples},
                {"targets", s.candidates.labels}};
      break;
  }
  json j = {{"n", s.points.n}, {"points", points}, {"labels", labels},
            {"task", to_string(s.task)}, {"seed", s.seed}};
  return j.dump();
}

Sample from_json_line(const std::string& line) {
  Sample s;
  try {
    const json j = json::parse(line);
    s.task = task_from_string(j.at("task").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto n = j.at("n").get<std::size_t>();
    const auto& pts = j.at("points");
    if (pts.size() != n || n == 0) throw ValidationError("points length does not match n");
    s.points.n = n;
    s.points.dim = pts.at(0).size();
    for (const auto& r : pts) {
      if (r.size() != s.points.dim) throw ValidationError("ragged points");
      for (const auto& v : r) s.points.coords.push_back(v.get<double>());
    }
    const auto& labels = j.at("labels");
    switch (s.task) {
      case Task::delaunay:
        s.edges = EdgeLabels(n);
        for (const auto& e : labels) {
          const auto a = e.at(0).get<std::size_t>(), b = e.at(1).get<std::size_t>();
          if (a >= n || b >= n || a == b) throw ValidationError("edge index out of range");
          s.edges.set(a, b, true);
        }
        break;
      case Task::partition:
        s.partition.ids = labels.get<std::vector<std::size_t>>();
        s.partition.clusters = Partition::from_labels(s.partition.ids).clusters;
        s.edges = geometry::partition_to_adjacency(s.partition);
        break;
      case Task::hull_spherical:
      case Task::hull_gaussian:
        s.hull = labels.at("hull").get<std::vector<Triplet>>();
        s.candidates.triples = labels.at("candidates").get<std::vector<Triplet>>();
        s.candidates.labels = labels.at("targets").get<std::vector<std::uint8_t>>();
        break;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed dataset record: ") + e.what());
  }
  validate_sample(s);
  return s;
}

void write_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write dataset file " + path.string());
  for (const auto& s : samples) os << to_json_line(s) << '\n';
  if (!os) throw std::runtime_error("failed writing dataset file " + path.string());
}

std::vector<Sample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read dataset file " + path.string());
  std::vector<Sample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace s2g::data
