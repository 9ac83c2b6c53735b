#pragma once

// Exact-by-resampling ground truth for the geometric tasks. Every predicate
// whose magnitude falls below kDegenerateTol is treated as degenerate; the
// generators draw a fresh set instead of resolving ties.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "s2g/types.hpp"

namespace s2g::geometry {

using Rng = std::mt19937_64;

inline constexpr double kDegenerateTol = 1e-12;

struct Point2 {
  double x, y;
};

/// Twice the signed area of (a, b, c); positive when counterclockwise.
double orient2d(Point2 a, Point2 b, Point2 c);

/// +1 if d is strictly inside the circumcircle of (a, b, c), -1 if strictly
/// outside, 0 if cocircular within tolerance or (a, b, c) is degenerate.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

/// Signed volume (times 6) of the tetrahedron (a, b, c, d).
double orient3d(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                std::span<const double> d);

/// Brute-force empty-circumcircle oracle. Throws DegeneracyError on collinear
/// triples or cocircular quadruples.
EdgeLabels delaunay_edges(const PointSet& p);

/// Number of strict convex-hull vertices of a planar set (monotone chain).
std::size_t hull_vertex_count_2d(const PointSet& p);

/// Supporting triangles of a 3-D set, each sorted i<j<l, lexicographic order.
/// Throws DegeneracyError when any quadruple is coplanar within tolerance.
std::vector<Triplet> convex_hull_triangles(const PointSet& p);

/// True when every undirected edge of the triangles is shared by exactly two of them.
bool is_closed_manifold(const std::vector<Triplet>& triangles);

/// Union over points q of {q, a, b} for a, b among q's K nearest neighbours
/// (Euclidean, ties by index), sorted and deduplicated, labelled against `hull`.
TripletCandidates knn_triplet_candidates(const PointSet& p, std::size_t k,
                                         const std::vector<Triplet>& hull);

bool is_general_position_2d(const PointSet& p);

PointSet sample_uniform_square(std::size_t n, Rng& rng);
PointSet sample_gaussian3(std::size_t n, Rng& rng);
PointSet sample_sphere(std::size_t n, Rng& rng);

struct PartitionSpec {
  std::size_t n_min = 2, n_max = 14;
  std::size_t clusters_min = 1, clusters_max = 5;
  std::size_t d_in = 2;
  double spread = 0.15;
};

struct PartitionSample {
  PointSet points;
  Partition partition;
};

/// Gaussian blobs: cluster count and n drawn uniformly from their ranges,
/// centers ~ N(0, I), members ~ center + spread·N(0, I).
PartitionSample sample_partition_set(const PartitionSpec& spec, Rng& rng);

/// Y[i,j] = 1 iff i != j and both share a cluster.
EdgeLabels partition_to_adjacency(const Partition& part);

}  // namespace s2g::geometry
