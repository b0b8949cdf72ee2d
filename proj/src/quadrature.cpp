#include "topoae/quadrature.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <unordered_set>

#include "topoae/errors.hpp"

namespace topoae::quadrature {

std::pair<double, double> legendre_eval(int k, double x) {
  if (k < 0) throw ArgumentError("legendre_eval: negative degree");
  if (k == 0) return {1.0, 0.0};
  double p_prev = 1.0;
  double p = x;
  for (int j = 1; j < k; ++j) {
    const double p_next = ((2.0 * j + 1.0) * x * p - j * p_prev) / (j + 1.0);
    p_prev = p;
    p = p_next;
  }
  double dp;
  if (std::abs(x) == 1.0) {
    // P_k'(+-1) = (+-1)^{k-1} k(k+1)/2
    const double sign = (x < 0.0 && (k % 2 == 0)) ? -1.0 : 1.0;
    dp = sign * 0.5 * k * (k + 1.0);
  } else {
    dp = k * (x * p - p_prev) / (x * x - 1.0);
  }
  return {p, dp};
}

LegendreGrid1D legendre_nodes(int n) {
  if (n < 0) throw ArgumentError("legendre_nodes: degree must be >= 0");
  const int count = n + 1;
  LegendreGrid1D g;
  g.degree = n;
  g.nodes.assign(count, 0.0);
  g.weights.assign(count, 0.0);

  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (4.0 * i + 3.0) / (4.0 * n + 6.0));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_eval(count, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("legendre_nodes: Newton did not converge for n=" +
                             std::to_string(n) + ", root " + std::to_string(i));
    }
    // Odd rules have an exact zero in the middle.
    if (count % 2 == 1 && i == half - 1) x = 0.0;
    const double dp = legendre_eval(count, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Guesses descend from +1, so root i lands at the top end.
    g.nodes[count - 1 - i] = x;
    g.nodes[i] = -x;
    g.weights[count - 1 - i] = w;
    g.weights[i] = w;
  }
  return g;
}

TensorLegendreGrid::TensorLegendreGrid(int dim, int degree, std::size_t cap) : dim_(dim) {
  if (dim < 1) throw ArgumentError("tensor_grid: dim must be >= 1");
  if (degree < 0) throw ArgumentError("tensor_grid: degree must be >= 0");
  const std::size_t per_axis = static_cast<std::size_t>(degree) + 1;
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) {
    if (total > cap / per_axis) {
      throw SizeError("tensor_grid: (n+1)^m exceeds the grid cap of " + std::to_string(cap) +
                      " points; sub-sample coordinatewise instead");
    }
    total *= per_axis;
  }
  size_ = total;
  grid1d_ = legendre_nodes(degree);
}

std::vector<int> TensorLegendreGrid::multi_index(std::size_t flat) const {
  if (flat >= size_) throw ArgumentError("multi_index: flat index out of range");
  const std::size_t base = grid1d_.num_nodes();
  std::vector<int> alpha(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    alpha[i] = static_cast<int>(flat % base);
    flat /= base;
  }
  return alpha;
}

std::size_t TensorLegendreGrid::flat_index(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != dim_) throw ArgumentError("flat_index: wrong length");
  const std::size_t base = grid1d_.num_nodes();
  std::size_t flat = 0;
  for (int a : alpha) {
    if (a < 0 || static_cast<std::size_t>(a) >= base) {
      throw ArgumentError("flat_index: component out of range");
    }
    flat = flat * base + static_cast<std::size_t>(a);
  }
  return flat;
}

Eigen::VectorXd TensorLegendreGrid::point(std::size_t flat) const {
  const auto alpha = multi_index(flat);
  Eigen::VectorXd p(dim_);
  for (int i = 0; i < dim_; ++i) p[i] = grid1d_.nodes[alpha[i]];
  return p;
}

double TensorLegendreGrid::weight(std::size_t flat) const {
  const auto alpha = multi_index(flat);
  double w = 1.0;
  for (int a : alpha) w *= grid1d_.weights[a];
  return w;
}

Eigen::MatrixXd TensorLegendreGrid::points() const {
  Eigen::MatrixXd out(dim_, static_cast<Eigen::Index>(size_));
  for (std::size_t k = 0; k < size_; ++k) out.col(static_cast<Eigen::Index>(k)) = point(k);
  return out;
}

TensorLegendreGrid tensor_grid(int m, int n, std::size_t cap) {
  return TensorLegendreGrid(m, n, cap);
}

double cubature_integrate(const std::function<double(const Eigen::VectorXd&)>& f,
                          const TensorLegendreGrid& grid) {
  double sum = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) sum += grid.weight(k) * f(grid.point(k));
  return sum;
}

std::vector<GridSample> sample_grid_batch(const TensorLegendreGrid& grid, std::size_t k,
                                          std::uint64_t seed) {
  const std::size_t total = grid.size();
  if (k < 1 || k > total) {
    throw ArgumentError("sample_grid_batch: batch size must be in [1, " +
                        std::to_string(total) + "]");
  }
  std::mt19937_64 rng(seed);
  std::unordered_set<std::size_t> taken;
  taken.reserve(k * 2);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  for (std::size_t j = total - k; j < total; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const std::size_t idx = taken.contains(t) ? j : t;
    taken.insert(idx);
    chosen.push_back(idx);
  }
  std::vector<GridSample> out;
  out.reserve(k);
  for (std::size_t idx : chosen) out.push_back({idx, grid.point(idx), grid.weight(idx)});
  return out;
}

double lagrange_1d(const LegendreGrid1D& grid, std::size_t j, double x) {
  const std::size_t count = grid.num_nodes();
  if (j >= count) throw ArgumentError("lagrange_1d: index out of range");
  for (std::size_t i = 0; i < count; ++i) {
    if (x == grid.nodes[i]) return i == j ? 1.0 : 0.0;
  }
  // Barycentric weights lambda_i = 1 / prod_{k != i}(x_i - x_k).
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    double lambda = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
      if (k != i) lambda /= grid.nodes[i] - grid.nodes[k];
    }
    const double term = lambda / (x - grid.nodes[i]);
    den += term;
    if (i == j) num = term;
  }
  return num / den;
}

double lagrange(const TensorLegendreGrid& grid, std::span<const int> alpha,
                const Eigen::VectorXd& x) {
  if (static_cast<int>(alpha.size()) != grid.dim() || x.size() != grid.dim()) {
    throw ArgumentError("lagrange: dimension mismatch");
  }
  double v = 1.0;
  for (int i = 0; i < grid.dim(); ++i) {
    v *= lagrange_1d(grid.grid1d(), static_cast<std::size_t>(alpha[i]), x[i]);
  }
  return v;
}

void write_grid_csv(const TensorLegendreGrid& grid, std::ostream& os) {
  const int m = grid.dim();
  for (int i = 0; i < m; ++i) os << "alpha" << i + 1 << ',';
  for (int i = 0; i < m; ++i) os << 'x' << i + 1 << ',';
  os << "weight\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto alpha = grid.multi_index(k);
    for (int a : alpha) os << a << ',';
    for (int a : alpha) os << grid.grid1d().nodes[a] << ',';
    os << grid.weight(k) << '\n';
  }
}

}  // namespace topoae::quadrature
