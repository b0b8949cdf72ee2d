#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// Mean SSIM written out with scalar loops over every 7x7 window.
inline double ssim(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const int w = 7;
  const double c1 = 0.0001;
  const double c2 = 0.0009;
  const int n = static_cast<int>(x.rows());
  double acc = 0.0;
  int windows = 0;
  for (int top = 0; top + w <= n; ++top) {
    for (int left = 0; left + w <= n; ++left) {
      double sx = 0, sy = 0;
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
          sx += x(top + i, left + j);
          sy += y(top + i, left + j);
        }
      }
      const double mx = sx / (w * w);
      const double my = sy / (w * w);
      double vx = 0, vy = 0, cov = 0;
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
          const double dx = x(top + i, left + j) - mx;
          const double dy = y(top + i, left + j) - my;
          vx += dx * dx;
          vy += dy * dy;
          cov += dx * dy;
        }
      }
      vx /= w * w;
      vy /= w * w;
      cov /= w * w;
      const double lum = (2 * mx * my + c1) / (mx * mx + my * my + c1);
      const double cs = (2 * cov + c2) / (vx + vy + c2);
      acc += lum * cs;
      ++windows;
    }
  }
  return acc / windows;
}

// Crossing segment pairs of a closed polygon in general position, found by
// solving p + s r = q + t u for every pair of segments that share no vertex.
inline std::size_t polygon_crossings(const Eigen::MatrixXd& pts) {
  const auto n = static_cast<std::size_t>(pts.cols());
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j <= i) continue;
      const std::size_t i2 = (i + 1) % n;
      const std::size_t j2 = (j + 1) % n;
      if (i == j2 || i2 == j) continue;
      const Eigen::Vector2d p = pts.col(static_cast<Eigen::Index>(i));
      const Eigen::Vector2d r = pts.col(static_cast<Eigen::Index>(i2)) - p;
      const Eigen::Vector2d q = pts.col(static_cast<Eigen::Index>(j));
      const Eigen::Vector2d u = pts.col(static_cast<Eigen::Index>(j2)) - q;
      const double den = r.x() * u.y() - r.y() * u.x();
      if (den == 0.0) continue;
      const Eigen::Vector2d qp = q - p;
      const double s = (qp.x() * u.y() - qp.y() * u.x()) / den;
      const double t = (qp.x() * r.y() - qp.y() * r.x()) / den;
      if (s >= 0 && s <= 1 && t >= 0 && t <= 1) ++count;
    }
  }
  return count;
}

inline Eigen::MatrixXd distances(const Eigen::MatrixXd& pts) {
  const auto n = pts.cols();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (pts.col(i) - pts.col(j)).norm();
  }
  return d;
}

// Largest edge on the path between a and b in a minimum spanning tree (Prim).
inline double mst_bottleneck(const Eigen::MatrixXd& pts, std::size_t a, std::size_t b) {
  const Eigen::MatrixXd d = distances(pts);
  const auto n = static_cast<std::size_t>(pts.cols());
  std::vector<bool> in(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, n);
  best[0] = 0.0;
  std::vector<std::vector<std::pair<std::size_t, double>>> tree(n);
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v] && (u == n || best[v] < best[u])) u = v;
    }
    in[u] = true;
    if (parent[u] != n) {
      tree[u].push_back({parent[u], best[u]});
      tree[parent[u]].push_back({u, best[u]});
    }
    for (std::size_t v = 0; v < n; ++v) {
      const double w = d(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      if (!in[v] && w < best[v]) {
        best[v] = w;
        parent[v] = u;
      }
    }
  }
  double found = -1.0;
  std::function<bool(std::size_t, std::size_t, double)> walk = [&](std::size_t u, std::size_t from, double mx) {
    if (u == b) {
      found = mx;
      return true;
    }
    for (const auto& [v, w] : tree[u]) {
      if (v != from && walk(v, u, std::max(mx, w))) return true;
    }
    return false;
  };
  walk(a, n, 0.0);
  return found;
}

// Shortest a-b path length over all simple paths using edges of length <= eps.
inline double brute_force_path(const Eigen::MatrixXd& pts, std::size_t a, std::size_t b, double eps) {
  const Eigen::MatrixXd d = distances(pts);
  const auto n = static_cast<std::size_t>(pts.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> used(n, false);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double len) {
    if (u == b) {
      best = std::min(best, len);
      return;
    }
    used[u] = true;
    for (std::size_t v = 0; v < n; ++v) {
      const double w = d(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      if (!used[v] && v != u && w <= eps) dfs(v, len + w);
    }
    used[u] = false;
  };
  dfs(a, 0.0);
  return best;
}

}  // namespace oracle
