#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "s2g/geometry.hpp"
#include "s2g/types.hpp"

namespace s2g::data {

enum class Task { delaunay, hull_spherical, hull_gaussian, partition };

std::string to_string(Task t);
Task task_from_string(const std::string& s);
bool is_hull_task(Task t);

struct DataSpec {
  std::size_t n_min = 20, n_max = 20;
  std::size_t knn_k = 10;                        // hull tasks
  std::size_t clusters_min = 1, clusters_max = 5;  // partition task
  std::size_t d_in = 2;                          // partition task
  double spread = 0.15;                          // partition task
};

/// One labelled set. Which label fields are populated depends on the task.
struct Sample {
  Task task = Task::delaunay;
  std::uint64_t seed = 0;
  PointSet points;
  EdgeLabels edges;              // delaunay, partition
  Partition partition;           // partition
  std::vector<Triplet> hull;     // hull tasks: every supporting triangle
  TripletCandidates candidates;  // hull tasks: K-NN candidates with labels
};

/// Stream seed for sample `index` of a split; a splitmix64 hash of both inputs.
std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t index);

/// Deterministic in (task, spec, seed). Degenerate draws are discarded and redrawn.
Sample generate_sample(Task task, const DataSpec& spec, std::uint64_t seed);

std::vector<Sample> generate_split(Task task, const DataSpec& spec, std::size_t count,
                                   std::uint64_t base_seed);

/// Throws ValidationError when a sample violates its task's invariants.
void validate_sample(const Sample& s);

std::string to_json_line(const Sample& s);
Sample from_json_line(const std::string& line);

void write_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& path);
/// Every record is validated on read.
std::vector<Sample> read_jsonl(const std::filesystem::path& path);

}  // namespace s2g::data
