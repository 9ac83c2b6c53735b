#include "s2g/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

namespace s2g::geometry {

namespace {

Point2 pt(const PointSet& p, std::size_t i) { return {p(i, 0), p(i, 1)}; }

void require_dim(const PointSet& p, std::size_t dim, const char* op) {
  if (p.dim != dim) {
    throw DimensionError(std::string(op) + ": expected " + std::to_string(dim) + "-D points, got " +
                         std::to_string(p.dim));
  }
}

double incircle_det(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace

double orient2d(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double o = orient2d(a, b, c);
  if (std::abs(o) < kDegenerateTol) return 0;
  const double det = incircle_det(a, b, c, d);
  if (std::abs(det) < kDegenerateTol) return 0;
  return (det > 0) == (o > 0) ? 1 : -1;
}

double orient3d(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                std::span<const double> d) {
  const double bx = b[0] - a[0], by = b[1] - a[1], bz = b[2] - a[2];
  const double cx = c[0] - a[0], cy = c[1] - a[1], cz = c[2] - a[2];
  const double dx = d[0] - a[0], dy = d[1] - a[1], dz = d[2] - a[2];
  return bx * (cy * dz - cz * dy) - by * (cx * dz - cz * dx) + bz * (cx * dy - cy * dx);
}

EdgeLabels delaunay_edges(const PointSet& p) {
  require_dim(p, 2, "delaunay_edges");
  const std::size_t n = p.n;
  EdgeLabels out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t l = j + 1; l < n; ++l) {
        const Point2 a = pt(p, i), b = pt(p, j), c = pt(p, l);
        if (std::abs(orient2d(a, b, c)) < kDegenerateTol) {
          throw DegeneracyError("collinear triple in delaunay_edges");
        }
        bool empty = true;
        for (std::size_t m = 0; m < n && empty; ++m) {
          if (m == i || m == j || m == l) continue;
          const int s = incircle(a, b, c, pt(p, m));
          if (s == 0) throw DegeneracyError("cocircular quadruple in delaunay_edges");
          if (s > 0) empty = false;
        }
        if (empty) {
          out.set(i, j, true);
          out.set(j, l, true);
          out.set(i, l, true);
        }
      }
  return out;
}

std::size_t hull_vertex_count_2d(const PointSet& p) {
  require_dim(p, 2, "hull_vertex_count_2d");
  if (p.n < 3) return p.n;
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < p.n; ++i) pts.push_back(pt(p, i));
  std::sort(pts.begin(), pts.end(),
            [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && orient2d(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient2d(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  return k - 1;
}

std::vector<Triplet> convex_hull_triangles(const PointSet& p) {
  require_dim(p, 3, "convex_hull_triangles");
  const std::size_t n = p.n;
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t l = j + 1; l < n; ++l) {
        int side = 0;
        bool supporting = true;
        for (std::size_t m = 0; m < n; ++m) {
          if (m == i || m == j || m == l) continue;
          const double v = orient3d(p.row(i), p.row(j), p.row(l), p.row(m));
          if (std::abs(v) < kDegenerateTol) throw DegeneracyError("coplanar quadruple in convex_hull_triangles");
          const int s = v > 0 ? 1 : -1;
          if (side == 0) {
            side = s;
          } else if (s != side) {
            supporting = false;
            break;
          }
        }
        if (supporting) out.push_back({i, j, l});
      }
  return out;
}

bool is_closed_manifold(const std::vector<Triplet>& triangles) {
  if (triangles.empty()) return false;
  std::map<std::pair<std::size_t, std::size_t>, int> uses;
  for (const auto& t : triangles) {
    for (int e = 0; e < 3; ++e) {
      auto a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  }
  return std::all_of(uses.begin(), uses.end(), [](const auto& kv) { return kv.second == 2; });
}

TripletCandidates knn_triplet_candidates(const PointSet& p, std::size_t k,
                                         const std::vector<Triplet>& hull) {
  if (k >= p.n) {
    throw std::invalid_argument("knn_triplet_candidates: K=" + std::to_string(k) +
                                " must be < n=" + std::to_string(p.n));
  }
  std::vector<Triplet> triples;
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t q = 0; q < p.n; ++q) {
    dist.clear();
    for (std::size_t o = 0; o < p.n; ++o) {
      if (o == q) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < p.dim; ++c) {
        const double diff = p(q, c) - p(o, c);
        d2 += diff * diff;
      }
      dist.emplace_back(d2, o);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) {
        Triplet t{q, dist[a].second, dist[b].second};
        std::sort(t.begin(), t.end());
        triples.push_back(t);
      }
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  std::vector<Triplet> sorted_hull = hull;
  for (auto& t : sorted_hull) std::sort(t.begin(), t.end());
  std::sort(sorted_hull.begin(), sorted_hull.end());

  TripletCandidates out;
  out.triples = std::move(triples);
  out.labels.reserve(out.triples.size());
  for (const auto& t : out.triples)
    out.labels.push_back(std::binary_search(sorted_hull.begin(), sorted_hull.end(), t) ? 1 : 0);
  return out;
}

bool is_general_position_2d(const PointSet& p) {
  try {
    (void)delaunay_edges(p);
  } catch (const DegeneracyError&) {
    return false;
  }
  return true;
}

PointSet sample_uniform_square(std::size_t n, Rng& rng) {
  if (n < 3) throw std::invalid_argument("sample_uniform_square: n must be >= 3");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointSet p{n, 2, std::vector<double>(2 * n)};
  do {
    for (auto& v : p.coords) v = u(rng);
  } while (!is_general_position_2d(p));
  return p;
}

PointSet sample_gaussian3(std::size_t n, Rng& rng) {
  if (n < 4) throw std::invalid_argument("sample_gaussian3: n must be >= 4");
  std::normal_distribution<double> g(0.0, 1.0);
  PointSet p{n, 3, std::vector<double>(3 * n)};
  for (auto& v : p.coords) v = g(rng);
  return p;
}

PointSet sample_sphere(std::size_t n, Rng& rng) {
  PointSet p = sample_gaussian3(n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t c = 0; c < 3; ++c) norm += p(i, c) * p(i, c);
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < 3; ++c) p.coords[i * 3 + c] /= norm;
  }
  return p;
}

PartitionSample sample_partition_set(const PartitionSpec& spec, Rng& rng) {
  if (spec.n_min < 1 || spec.n_min > spec.n_max || spec.clusters_min < 1 ||
      spec.clusters_min > spec.clusters_max || spec.d_in == 0) {
    throw std::invalid_argument("sample_partition_set: empty range");
  }
  std::uniform_int_distribution<std::size_t> n_dist(spec.n_min, spec.n_max);
  std::uniform_int_distribution<std::size_t> k_dist(spec.clusters_min, spec.clusters_max);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = n_dist(rng);
  const std::size_t k = std::min(k_dist(rng), n);

  std::vector<double> centers(k * spec.d_in);
  for (auto& c : centers) c = g(rng);

  // The first k elements seed one cluster each so every cluster is non-empty.
  std::vector<std::size_t> labels(n);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i < k ? i : pick(rng);
  std::shuffle(labels.begin(), labels.end(), rng);

  PartitionSample out;
  out.points = PointSet{n, spec.d_in, std::vector<double>(n * spec.d_in)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < spec.d_in; ++c)
      out.points.coords[i * spec.d_in + c] = centers[labels[i] * spec.d_in + c] + spec.spread * g(rng);
  out.partition = Partition::from_labels(labels);
  return out;
}

EdgeLabels partition_to_adjacency(const Partition& part) {
  const std::size_t n = part.ids.size();
  EdgeLabels out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (part.ids[i] == part.ids[j]) out.set(i, j, true);
  return out;
}

}  // namespace s2g::geometry
