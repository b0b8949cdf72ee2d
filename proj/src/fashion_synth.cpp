#include <algorithm>
#include <cmath>
#include <random>

#include "topoae/errors.hpp"
#include "topoae/manifolds.hpp"

namespace topoae::manifolds {

namespace {

constexpr int kContent = 28;
constexpr int kSide = 32;
constexpr int kSuper = 3;  // supersampling per pixel axis

struct Box {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct Ellipse {
  double cx, cy, rx, ry;
  bool contains(double x, double y) const {
    const double u = (x - cx) / rx;
    const double v = (y - cy) / ry;
    return u * u + v * v <= 1.0;
  }
};

// Coordinates are in content units [0, 28), y pointing down.
struct Shape {
  std::vector<Box> boxes;
  std::vector<Ellipse> ellipses;
  std::vector<Box> holes;
  bool contains(double x, double y) const {
    for (const auto& h : holes) {
      if (h.contains(x, y)) return false;
    }
    for (const auto& b : boxes) {
      if (b.contains(x, y)) return true;
    }
    for (const auto& e : ellipses) {
      if (e.contains(x, y)) return true;
    }
    return false;
  }
};

Shape garment(int label, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> j(-1.0, 1.0);
  const double w = 1.0 + 0.08 * j(rng);  // width scale
  const double h = 1.0 + 0.08 * j(rng);  // height scale
  const double cx = 14.0 + 0.8 * j(rng);
  const double top = 3.0 + 0.8 * j(rng);
  Shape s;
  auto box = [&](double x0, double y0, double x1, double y1) {
    s.boxes.push_back({cx + x0 * w, top + y0 * h, cx + x1 * w, top + y1 * h});
  };
  switch (label) {
    case 0:  // t-shirt
      box(-6, 2, 6, 21);
      box(-10, 2, 10, 8);
      s.holes.push_back({cx - 2 * w, top - 1, cx + 2 * w, top + 3 * h});
      break;
    case 1:  // trouser
      box(-5, 0, 5, 4);
      box(-5, 0, -0.8, 22);
      box(0.8, 0, 5, 22);
      break;
    case 2:  // pullover
      box(-6, 1, 6, 21);
      box(-10, 2, -6, 20);
      box(6, 2, 10, 20);
      break;
    case 3:  // dress
      for (int k = 0; k < 11; ++k) {
        const double half = 3.0 + 0.55 * k;
        box(-half, 2.0 * k, half, 2.0 * k + 2.0);
      }
      break;
    case 4:  // coat
      box(-7, 0, 7, 22);
      box(-11, 1, -7, 21);
      box(7, 1, 11, 21);
      s.holes.push_back({cx - 0.4, top + 3 * h, cx + 0.4, top + 22 * h});
      break;
    case 5:  // sandal
      box(-11, 15, 11, 17);
      box(-9, 11, -7, 15);
      box(-3, 11, -1, 15);
      box(3, 11, 5, 15);
      box(-9, 11, 5, 12);
      break;
    case 6:  // shirt
      box(-6, 1, 6, 21);
      box(-9, 2, -6, 18);
      box(6, 2, 9, 18);
      s.holes.push_back({cx - 1.2, top - 1, cx + 1.2, top + 6 * h});
      break;
    case 7:  // sneaker
      box(-11, 14, 11, 18);
      s.ellipses.push_back({cx - 3 * w, top + 14 * h, 8 * w, 5 * h});
      break;
    case 8:  // bag
      box(-9, 7, 9, 21);
      s.ellipses.push_back({cx, top + 7 * h, 5 * w, 5 * h});
      s.holes.push_back({cx - 3 * w, top + 3.5 * h, cx + 3 * w, top + 6.5 * h});
      break;
    case 9:  // ankle boot
      box(-3, 2, 5, 18);
      box(-10, 12, 5, 18);
      box(-11, 17, 6, 20);
      break;
    default:
      throw ArgumentError("synthetic_fashion: label out of range");
  }
  return s;
}

}  // namespace

Dataset synthetic_fashion(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_label(0, 9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> grain(0.0, 1.0);

  const int pad = (kSide - kContent) / 2;
  Dataset d;
  d.image_side = kSide;
  d.points = Matrix::Zero(kSide * kSide, static_cast<Eigen::Index>(count));
  d.labels.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    const int label = pick_label(rng);
    const Shape shape = garment(label, rng);
    const double base = 0.45 + 0.5 * unit(rng);
    const double shade = 0.25 * (unit(rng) - 0.5);  // vertical intensity gradient
    const double stripes = unit(rng) < 0.3 ? 0.15 : 0.0;
    const double freq = 0.6 + 0.6 * unit(rng);
    for (int i = 0; i < kContent; ++i) {
      for (int jx = 0; jx < kContent; ++jx) {
        int hits = 0;
        for (int a = 0; a < kSuper; ++a) {
          for (int b = 0; b < kSuper; ++b) {
            if (shape.contains(jx + (b + 0.5) / kSuper, i + (a + 0.5) / kSuper)) ++hits;
          }
        }
        if (hits == 0) continue;
        double v = base + shade * (i - 14.0) / 14.0 + stripes * std::sin(freq * i) + 0.03 * grain(rng);
        v = std::clamp(v, 0.0, 1.0) * hits / (kSuper * kSuper);
        d.points((i + pad) * kSide + jx + pad, static_cast<Eigen::Index>(c)) = v;
      }
    }
    d.labels.push_back(label);
  }
  d.provenance = {{"source", "synthetic_fashion"}, {"seed", seed}, {"count", count}};
  return d;
}

}  // namespace topoae::manifolds
