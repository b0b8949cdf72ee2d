#include "topoae/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "topoae/errors.hpp"

namespace topoae::evaluation {

double psnr(const Matrix& reference, const Matrix& candidate) {
  if (reference.rows() != candidate.rows() || reference.cols() != candidate.cols()) {
    throw ArgumentError("psnr: shape mismatch");
  }
  if (reference.size() == 0) throw ArgumentError("psnr: empty image");
  const double mse = (reference - candidate).squaredNorm() / static_cast<double>(reference.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double ssim(const Matrix& reference, const Matrix& candidate) {
  if (reference.rows() != candidate.rows() || reference.cols() != candidate.cols()) {
    throw ArgumentError("ssim: shape mismatch");
  }
  if (reference.rows() != reference.cols()) throw ArgumentError("ssim: images must be square");
  if (reference.rows() < kSsimWindow) throw ArgumentError("ssim: image smaller than the 7x7 window");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  constexpr double area = kSsimWindow * kSsimWindow;
  const Eigen::Index last = reference.rows() - kSsimWindow;
  double total = 0.0;
  for (Eigen::Index i = 0; i <= last; ++i) {
    for (Eigen::Index j = 0; j <= last; ++j) {
      const auto x = reference.block(i, j, kSsimWindow, kSsimWindow).array();
      const auto y = candidate.block(i, j, kSsimWindow, kSsimWindow).array();
      const double mx = x.sum() / area;
      const double my = y.sum() / area;
      const double vx = (x - mx).square().sum() / area;
      const double vy = (y - my).square().sum() / area;
      const double cxy = ((x - mx) * (y - my)).sum() / area;
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return total / static_cast<double>((last + 1) * (last + 1));
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("mean_std: no values");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

MetricsRecord score_images(const std::string& variant, double noise_pct, const Matrix& reference,
                           const Matrix& candidate, int side) {
  if (reference.rows() != candidate.rows() || reference.cols() != candidate.cols()) {
    throw ArgumentError("score_images: shape mismatch");
  }
  if (reference.cols() == 0) throw ArgumentError("score_images: no images");
  if (static_cast<Eigen::Index>(side) * side != reference.rows()) {
    throw ArgumentError("score_images: side does not match image size");
  }
  std::vector<double> p;
  std::vector<double> s;
  for (Eigen::Index c = 0; c < reference.cols(); ++c) {
    const Matrix ref = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        reference.col(c).data(), side, side);
    const Eigen::VectorXd clamped = candidate.col(c).cwiseMax(0.0).cwiseMin(1.0);
    const Matrix cand = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        clamped.data(), side, side);
    p.push_back(psnr(ref, cand));
    s.push_back(ssim(ref, cand));
  }
  const MeanStd ps = mean_std(p);
  const MeanStd ss = mean_std(s);
  return {variant, noise_pct, ps.mean, ps.std, ss.mean, ss.std, p.size()};
}

std::vector<MetricRow> rows_of(const MetricsRecord& rec) {
  return {{rec.variant, rec.noise_pct, "psnr", rec.psnr_mean, rec.psnr_std, rec.count},
          {rec.variant, rec.noise_pct, "ssim", rec.ssim_mean, rec.ssim_std, rec.count}};
}

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& os) {
  os << "variant,noise_pct,metric,mean,std,n\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    os << r.variant << ',' << r.noise_pct << ',' << r.metric << ',' << r.mean << ',' << r.std << ','
       << r.n << '\n';
  }
}

std::vector<MetricRow> read_metrics_csv(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line) || line != "variant,noise_pct,metric,mean,std,n") {
    throw FormatError(source + ": unexpected metrics header");
  }
  std::vector<MetricRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw FormatError(source + ":" + std::to_string(lineno) + ": expected 6 fields");
    try {
      std::size_t used = 0;
      MetricRow r;
      r.variant = f[0];
      r.noise_pct = std::stod(f[1]);
      r.metric = f[2];
      r.mean = std::stod(f[3]);
      r.std = std::stod(f[4]);
      r.n = std::stoul(f[5], &used);
      if (used != f[5].size()) throw std::invalid_argument("n");
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

}  // namespace topoae::evaluation
