#include "topoae/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "topoae/errors.hpp"
#include "topoae/evaluation/metrics.hpp"

namespace topoae::report {

int metric_direction(const std::string& metric) {
  static const std::set<std::string> higher{"psnr", "ssim", "simple"};
  static const std::set<std::string> lower{"test_mse", "jac_residual", "crossings", "injectivity_violations"};
  if (higher.contains(metric)) return 1;
  if (lower.contains(metric)) return -1;
  return 0;
}

std::vector<ReportRow> compare_report(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) throw ArgumentError("report: no run directories given");
  std::vector<std::filesystem::path> files;
  for (const auto& dir : run_dirs) {
    if (!std::filesystem::exists(dir)) throw FormatError("report: " + dir.string() + " does not exist");
    if (std::filesystem::is_regular_file(dir)) {
      files.push_back(dir);
      continue;
    }
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().filename() == "metrics.csv") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  if (files.empty()) throw FormatError("report: no metrics.csv found");

  using Key = std::tuple<std::string, double, std::string>;
  std::map<Key, std::vector<double>> means;
  std::map<Key, std::size_t> counts;
  std::vector<Key> order;
  for (const auto& f : files) {
    std::ifstream is(f);
    for (const auto& r : evaluation::read_metrics_csv(is, f.string())) {
      const Key key{r.variant, r.noise_pct, r.metric};
      if (!means.contains(key)) order.push_back(key);
      means[key].push_back(r.mean);
      counts[key] += r.n;
    }
  }

  std::vector<ReportRow> rows;
  for (const auto& key : order) {
    const auto& [variant, noise, metric] = key;
    const auto ms = evaluation::mean_std(means[key]);
    rows.push_back({variant, noise, metric, ms.mean, ms.std, counts[key], means[key].size(), false});
  }
  std::map<std::pair<double, std::string>, std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int dir = metric_direction(rows[i].metric);
    if (dir == 0) continue;
    const auto slot = std::make_pair(rows[i].noise_pct, rows[i].metric);
    auto it = best.find(slot);
    if (it == best.end() || dir * (rows[i].mean - rows[it->second].mean) > 0) best[slot] = i;
  }
  for (const auto& [slot, i] : best) {
    (void)slot;
    rows[i].best = true;
  }
  return rows;
}

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& os) {
  os << "variant,noise_pct,metric,mean,std,n,runs,best\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    os << r.variant << ',' << r.noise_pct << ',' << r.metric << ',' << r.mean << ',' << r.std << ',' << r.n
       << ',' << r.runs << ',' << (r.best ? 1 : 0) << '\n';
  }
}

void write_report_markdown(const std::vector<ReportRow>& rows, std::ostream& os) {
  std::vector<std::string> metrics;
  for (const auto& r : rows) {
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
  }
  os << std::fixed;
  for (const auto& m : metrics) {
    os << "## " << m << "\n\n| variant | noise % | mean | std | runs | best |\n|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      if (r.metric != m) continue;
      os << "| " << r.variant << " | " << std::setprecision(0) << r.noise_pct << " | " << std::setprecision(4)
         << r.mean << " | " << r.std << " | " << r.runs << " | " << (r.best ? "**best**" : "") << " |\n";
    }
    os << '\n';
  }
}

}  // namespace topoae::report
