#include "topoae/evaluation/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "topoae/diffnet/mlp.hpp"
#include "topoae/errors.hpp"

namespace topoae::evaluation {

namespace {

using Point = Eigen::Vector2d;

int orient(const Point& a, const Point& b, const Point& c) {
  const double v = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  return (v > 0) - (v < 0);
}

// c collinear with a-b: does it lie within the bounding box of the segment?
bool on_segment(const Point& a, const Point& b, const Point& c) {
  return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

// Segments a->b and b->c share b; they overlap when c folds back along a-b.
bool folds_back(const Point& a, const Point& b, const Point& c) {
  if (orient(a, b, c) != 0) return false;
  return (a - b).dot(c - b) > 0;
}

}  // namespace

nlohmann::json CurveCheck::to_json() const {
  nlohmann::json j;
  j["simple"] = simple;
  j["distinct_points"] = distinct_points;
  j["crossing_pairs"] = crossing_pairs;
  j["overlaps"] = overlaps;
  return j;
}

CurveCheck simple_closed_curve_check(const Matrix& loop) {
  if (loop.rows() != 2) throw ArgumentError("simple_closed_curve_check: points must be 2-D");
  std::vector<Point> pts;
  for (Eigen::Index c = 0; c < loop.cols(); ++c) {
    const Point p = loop.col(c);
    if (!pts.empty() && pts.back() == p) continue;
    pts.push_back(p);
  }
  while (pts.size() > 1 && pts.back() == pts.front()) pts.pop_back();
  if (pts.size() < 3) throw ArgumentError("simple_closed_curve_check: fewer than 3 distinct points");

  CurveCheck out;
  const std::size_t n = pts.size();
  out.distinct_points = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (folds_back(pts[i], pts[(i + 1) % n], pts[(i + 2) % n])) out.overlaps.emplace_back(i, (i + 1) % n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p1 = pts[i];
    const Point& p2 = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing vertex
      if (segments_intersect(p1, p2, pts[j], pts[(j + 1) % n])) out.crossing_pairs.emplace_back(i, j);
    }
  }
  out.simple = out.crossing_pairs.empty() && out.overlaps.empty();
  return out;
}

double toroidal_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = std::fmod(std::abs(a(i) - b(i)), two_pi);
    d = std::min(d, two_pi - d);
    ss += d * d;
  }
  return std::sqrt(ss);
}

std::vector<IndexPair> injectivity_proxy(const Matrix& latent, const Matrix& intrinsic, double delta,
                                         double big_delta) {
  if (latent.cols() != intrinsic.cols()) throw ArgumentError("injectivity_proxy: lists not aligned");
  std::vector<IndexPair> out;
  const auto n = static_cast<std::size_t>(latent.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if ((latent.col(ii) - latent.col(jj)).norm() >= delta) continue;
      if (toroidal_distance(intrinsic.col(ii), intrinsic.col(jj)) > big_delta) out.emplace_back(i, j);
    }
  }
  return out;
}

double pairwise_distance_quantile(const Matrix& points, double q) {
  if (points.cols() < 2) throw ArgumentError("pairwise_distance_quantile: need two points");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("pairwise_distance_quantile: q outside [0,1]");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(points.cols() * (points.cols() - 1) / 2));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < points.cols(); ++j) d.push_back((points.col(i) - points.col(j)).norm());
  }
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(d.size())));
  const std::size_t k = rank == 0 ? 0 : rank - 1;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  return d[k];
}

std::vector<double> jacobian_identity_residuals(const training::Autoencoder& ae, const Matrix& points) {
  const int m1 = ae.latent_dim();
  if (points.rows() != m1 || points.cols() == 0) {
    throw ArgumentError("jacobian_identity_residual: points must be m1 x k with k >= 1");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points.cols()));
  const Matrix eye = Matrix::Identity(m1, m1);
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const Eigen::VectorXd p = points.col(c);
    const Matrix j_nu = diffnet::jacobian(ae.decoder_spec, ae.decoder, p);
    const Eigen::VectorXd x = diffnet::forward(ae.decoder_spec, ae.decoder, p).output;
    const Matrix j_phi = diffnet::jacobian(ae.encoder_spec, ae.encoder, x);
    out.push_back((eye - j_phi * j_nu).norm());
  }
  return out;
}

ResidualStats jacobian_identity_residual(const training::Autoencoder& ae, const Matrix& points) {
  ResidualStats s;
  const auto r = jacobian_identity_residuals(ae, points);
  for (double v : r) {
    s.mean += v;
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(r.size());
  return s;
}

}  // namespace topoae::evaluation
