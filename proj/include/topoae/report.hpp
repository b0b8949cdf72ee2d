#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace topoae::report {

struct ReportRow {
  std::string variant;
  double noise_pct = 0.0;
  std::string metric;
  double mean = 0.0;  // mean over runs of the per-run means
  double std = 0.0;   // spread of the per-run means
  std::size_t n = 0;  // total samples
  std::size_t runs = 0;
  bool best = false;  // best variant for this (noise_pct, metric)
};

// Higher is better for +1, lower for -1, 0 when no ranking applies.
int metric_direction(const std::string& metric);

// Collects every metrics.csv below the given directories (sorted by path)
// and joins them by (variant, noise_pct, metric). Throws ArgumentError for an
// empty list and FormatError when no metrics are found or a file is malformed.
std::vector<ReportRow> compare_report(const std::vector<std::filesystem::path>& run_dirs);

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& os);
void write_report_markdown(const std::vector<ReportRow>& rows, std::ostream& os);

}  // namespace topoae::report
