#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace topoae::evaluation {

using Matrix = Eigen::MatrixXd;

constexpr double kPsnrCap = 99.0;

// 10 log10(1 / MSE) for intensities in [0, 1]; capped at kPsnrCap.
double psnr(const Matrix& reference, const Matrix& candidate);

// Mean SSIM over all valid 7x7 uniform windows (population moments), with
// C1 = 0.01^2 and C2 = 0.03^2 for dynamic range 1.
constexpr int kSsimWindow = 7;
double ssim(const Matrix& reference, const Matrix& candidate);

struct MetricsRecord {
  std::string variant;
  double noise_pct = 0.0;
  double psnr_mean = 0.0;
  double psnr_std = 0.0;
  double ssim_mean = 0.0;
  double ssim_std = 0.0;
  std::size_t count = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};
MeanStd mean_std(const std::vector<double>& values);

// Compares columns of flattened side x side images. Candidates are clamped
// to [0, 1] before scoring.
MetricsRecord score_images(const std::string& variant, double noise_pct, const Matrix& reference,
                           const Matrix& candidate, int side);

// Generic metric row: variant,noise_pct,metric,mean,std,n
struct MetricRow {
  std::string variant;
  double noise_pct = 0.0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

std::vector<MetricRow> rows_of(const MetricsRecord& rec);
void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& os);
// Throws FormatError when the header or a row does not match the schema.
std::vector<MetricRow> read_metrics_csv(std::istream& is, const std::string& source = "metrics.csv");

}  // namespace topoae::evaluation
