#include "s2g/types.hpp"

#include <unordered_map>

namespace s2g {

std::size_t EdgeLabels::edge_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) count += adj[i * n + j] ? 1 : 0;
  return count;
}

Partition Partition::from_labels(const std::vector<std::size_t>& labels) {
  Partition p;
  std::unordered_map<std::size_t, std::size_t> remap;
  p.ids.reserve(labels.size());
  for (auto l : labels) {
    auto [it, inserted] = remap.emplace(l, remap.size());
    p.ids.push_back(it->second);
  }
  p.clusters = remap.size();
  return p;
}

}  // namespace s2g
