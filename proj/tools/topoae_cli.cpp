#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "topoae/chebyshev.hpp"
#include "topoae/errors.hpp"
#include "topoae/evaluation/geodesic.hpp"
#include "topoae/experiment.hpp"
#include "topoae/io.hpp"
#include "topoae/manifolds.hpp"
#include "topoae/quadrature.hpp"
#include "topoae/report.hpp"

namespace fs = std::filesystem;
using namespace topoae;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
};

int cmd_run(const std::string& config_path, const Common& common) {
  auto cfg = experiment::ExperimentConfig::load(config_path);
  if (common.seed) cfg.seeds = {*common.seed};
  if (!common.out.empty()) cfg.output_dir = common.out;
  experiment::RunOptions opts;
  opts.threads = common.threads;
  opts.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
  std::cerr << "running " << experiment::to_string(cfg.experiment) << " (config " << cfg.hash() << ")\n";
  const auto summary = experiment::run_experiment(cfg, opts);
  for (const auto& job : summary.jobs) {
    std::cout << training::to_string(job.variant) << " seed " << job.seed << ": " << (job.ok ? "ok" : "aborted")
              << "  " << job.dir.string() << '\n';
  }
  return summary.ok() ? kOk : kRuntime;
}

int cmd_report(const std::vector<std::string>& dirs, const Common& common) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const auto rows = report::compare_report(paths);
  std::ostringstream csv;
  std::ostringstream md;
  report::write_report_csv(rows, csv);
  report::write_report_markdown(rows, md);
  if (!common.out.empty()) {
    io::write_text(fs::path(common.out) / "report.csv", csv.str());
    io::write_text(fs::path(common.out) / "report.md", md.str());
  }
  std::cout << md.str();
  return kOk;
}

int cmd_grid_dump(int dim, int degree, const Common& common) {
  const auto grid = quadrature::tensor_grid(dim, degree);
  if (common.out.empty()) {
    quadrature::write_grid_csv(grid, std::cout);
  } else {
    std::ostringstream os;
    quadrature::write_grid_csv(grid, os);
    io::write_text(common.out, os.str());
  }
  return kOk;
}

manifolds::Dataset read_images(const std::string& path, std::size_t limit, std::uint64_t seed) {
  if (fs::path(path).extension() == ".csv") {
    manifolds::Dataset d;
    d.points = manifolds::read_points_csv(path);
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d.points.rows()))));
    if (side * side != d.points.rows()) throw FormatError(path + ": rows are not square images");
    d.image_side = side;
    return d;
  }
  return manifolds::load_idx_images(path, limit, seed);
}

int cmd_fit_image(const std::string& path, int degree, std::size_t index, const Common& common) {
  const auto images = read_images(path, std::numeric_limits<std::size_t>::max(), common.seed.value_or(0));
  if (index >= static_cast<std::size_t>(images.size())) throw ArgumentError("fit-image: index out of range");
  const auto op = chebyshev::build_regression(images.image_side, degree);
  const Eigen::VectorXd img = images.points.col(static_cast<Eigen::Index>(index));
  const auto surrogate = chebyshev::fit(op, {img.data(), static_cast<std::size_t>(img.size())});
  const Eigen::VectorXd recon = op.matrix() * surrogate.coeffs;
  std::cout << "degree " << degree << "  residual " << surrogate.residual << "  rmse "
            << std::sqrt((recon - img).squaredNorm() / static_cast<double>(img.size())) << '\n';
  if (!common.out.empty()) {
    const fs::path dir = common.out;
    io::write_text(dir / "surrogate.json", surrogate.to_json().dump(1) + "\n");
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (int i = 0; i < images.image_side; ++i) {
      for (int j = 0; j < images.image_side; ++j) os << (j ? "," : "") << recon(i * images.image_side + j);
      os << '\n';
    }
    io::write_text(dir / "reconstruction.csv", os.str());
  }
  return kOk;
}

int cmd_geodesic(const std::string& ckpt_path, const std::string& data_dir, std::size_t i, std::size_t j,
                 const Common& common) {
  const auto ckpt = io::load_checkpoint(ckpt_path);
  const auto data = manifolds::load_dataset(data_dir);
  Eigen::MatrixXd inputs = data.points;
  if (ckpt.scaler) {
    if (!data.is_image()) throw InputError("geodesic: hybrid checkpoint needs an image dataset");
    const auto op = chebyshev::build_regression(data.image_side, ckpt.cheb_degree);
    inputs = ckpt.scaler->apply(op.solve(data.points));
  }
  if (inputs.rows() != ckpt.model.ambient_dim()) throw InputError("geodesic: dataset does not match the model input");
  const auto codes = ckpt.model.encode(inputs);
  const auto g = evaluation::vr_geodesic(codes, i, j);
  nlohmann::json out = g.to_json();
  if (!data.labels.empty()) {
    std::vector<int> labels;
    for (auto p : g.path) labels.push_back(data.labels[p]);
    out["labels"] = labels;
  }
  if (!common.out.empty()) io::write_text(fs::path(common.out) / "geodesic.json", out.dump(1) + "\n");
  std::cout << out.dump(1) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-regularised autoencoders: experiments and diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Override the run seed(s) with a single seed");
  app.add_option("--out", common.out, "Output directory (or file for grid-dump)");
  app.add_option("--threads", common.threads, "Parallel training jobs")->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path)->required()->check(CLI::ExistingFile);

  std::vector<std::string> report_dirs;
  auto* rep = app.add_subcommand("report", "Join metrics of finished runs");
  rep->add_option("dirs", report_dirs)->required();

  int dim = 2;
  int degree = 21;
  auto* grid = app.add_subcommand("grid-dump", "Write a tensor Legendre grid as CSV");
  grid->add_option("--dim", dim)->check(CLI::PositiveNumber);
  grid->add_option("--degree", degree)->check(CLI::NonNegativeNumber);

  std::string image_path;
  std::size_t image_index = 0;
  int fit_degree = 21;
  auto* fit = app.add_subcommand("fit-image", "Fit one image with a tensor Chebyshev surrogate");
  fit->add_option("images", image_path, "IDX file or CSV with one flattened image per row")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--index", image_index);
  fit->add_option("--degree", fit_degree)->check(CLI::NonNegativeNumber);

  std::string ckpt_path;
  std::string data_dir;
  std::size_t gi = 0;
  std::size_t gj = 0;
  auto* geo = app.add_subcommand("geodesic", "Latent Vietoris-Rips geodesic between two dataset points");
  geo->add_option("checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  geo->add_option("dataset", data_dir)->required()->check(CLI::ExistingDirectory);
  geo->add_option("i", gi)->required();
  geo->add_option("j", gj)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (app.count("--seed") > 0) common.seed = seed;

  try {
    if (*run) return cmd_run(config_path, common);
    if (*rep) return cmd_report(report_dirs, common);
    if (*grid) return cmd_grid_dump(dim, degree, common);
    if (*fit) return cmd_fit_image(image_path, fit_degree, image_index, common);
    if (*geo) return cmd_geodesic(ckpt_path, data_dir, gi, gj, common);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
