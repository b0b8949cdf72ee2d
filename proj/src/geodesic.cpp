#include "topoae/evaluation/geodesic.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

#include "topoae/errors.hpp"

namespace topoae::evaluation {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  std::vector<std::size_t> rank;
  explicit DisjointSets(std::size_t n) : parent(n), rank(n, 0) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  }
};

}  // namespace

nlohmann::json GeodesicResult::to_json() const {
  return {{"epsilon_star", epsilon_star}, {"indices", path}, {"length", path_length}};
}

GeodesicResult vr_geodesic(const Eigen::MatrixXd& points, std::size_t a, std::size_t b) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (n < 2) throw ArgumentError("vr_geodesic: need at least two points");
  if (a >= n || b >= n) throw ArgumentError("vr_geodesic: endpoint out of range");
  if (a == b) throw ArgumentError("vr_geodesic: endpoints must differ");

  Eigen::MatrixXd dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (points.col(i) - points.col(j)).norm();
    }
  }

  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(dist(i, j), i, j);
  }
  std::sort(edges.begin(), edges.end());

  GeodesicResult out;
  DisjointSets sets(n);
  for (const auto& [d, i, j] : edges) {
    sets.unite(i, j);
    if (sets.find(a) == sets.find(b)) {
      out.epsilon_star = d;
      break;
    }
  }

  // Dense Dijkstra on the epsilon* graph.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(n, inf);
  std::vector<std::size_t> prev(n, n);
  std::vector<bool> done(n, false);
  best[a] = 0.0;
  for (std::size_t iter = 0; iter < n; ++iter) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!done[v] && best[v] < inf && (u == n || best[v] < best[u])) u = v;
    }
    if (u == n || u == b) break;
    done[u] = true;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || v == u || dist(u, v) > out.epsilon_star) continue;
      const double cand = best[u] + dist(u, v);
      if (cand < best[v]) {
        best[v] = cand;
        prev[v] = u;
      }
    }
  }
  for (std::size_t v = b; v != n; v = prev[v]) out.path.push_back(v);
  std::reverse(out.path.begin(), out.path.end());
  out.path_length = best[b];
  return out;
}

}  // namespace topoae::evaluation
