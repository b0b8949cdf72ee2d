#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "topoae/evaluation/metrics.hpp"
#include "topoae/manifolds.hpp"
#include "topoae/training/train.hpp"

namespace topoae::experiment {

enum class Kind { kCircle15, kTorus15, kTorus1024, kImages };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& name);

struct ModelConfig {
  std::vector<int> hidden;
  int latent_dim = 2;
  diffnet::Activation activation = diffnet::Activation::kSin;
};

struct DataConfig {
  int ambient_dim = 15;
  double matrix_range = 2.0;
  std::size_t train_count = 3;
  std::size_t test_count = 2000;
  double minor_radius = 0.7;
  double major_radius = 2.0;
  Eigen::Vector3d axis_scale = Eigen::Vector3d::Ones();
  // Training data perturbation when train.noise_free is false.
  double train_noise_pct = 0.0;
  // Images only.
  std::vector<double> noise_levels;
  std::string idx_images;  // empty: synthetic garments
  std::string idx_labels;
  int cheb_degree = 21;
};

struct EvalConfig {
  int residual_points = 256;
  int geodesic_pairs = 3;
  std::size_t geodesic_points = 500;   // test codes entering the geodesic graph
  double injectivity_quantile = 0.01;  // delta = this quantile of latent distances
  double intrinsic_tolerance = 1.0;    // Delta, radians
};

struct ExperimentConfig {
  Kind experiment = Kind::kCircle15;
  std::vector<training::Variant> variants;
  std::vector<std::uint64_t> seeds;
  training::TrainConfig train;
  // Per-variant replacements of "train" fields.
  std::map<training::Variant, nlohmann::json> overrides;
  ModelConfig model;
  DataConfig data;
  EvalConfig eval;
  std::filesystem::path output_dir = "runs";

  // Defaults of each experiment before user fields are applied.
  static ExperimentConfig defaults(Kind kind);
  // Throws ConfigError naming the offending field (and its line when
  // `source_text` is given).
  static ExperimentConfig from_json(const nlohmann::json& j, const std::string& source_text = "");
  static ExperimentConfig load(const std::filesystem::path& path);

  training::TrainConfig train_for(training::Variant v, std::uint64_t seed) const;
  nlohmann::json to_json() const;
  // FNV-1a 64 of the canonical JSON dump.
  std::string hash() const;
};

// Stream-independent seeds derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

struct ExperimentData {
  manifolds::Dataset train;
  manifolds::Dataset test;  // circle: ordered dense sweep
  std::optional<manifolds::EmbeddingSpec> embedding;
};

ExperimentData make_data(const ExperimentConfig& cfg, std::uint64_t seed);

struct JobResult {
  training::Variant variant = training::Variant::kMlpAe;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string message;
  std::filesystem::path dir;
  std::vector<evaluation::MetricRow> metrics;
  nlohmann::json topo;

  // Mean of the first row with this metric name (and noise level).
  std::optional<double> metric(const std::string& name, double noise_pct = 0.0) const;
};

// Trains and evaluates one (variant, seed); writes the job directory when
// `write` is set. Never throws for training aborts (ok = false instead).
JobResult run_job(const ExperimentConfig& cfg, const ExperimentData& data, training::Variant v,
                  std::uint64_t seed, bool write = true);

struct RunOptions {
  int threads = 1;
  std::function<void(const std::string&)> log;
};

struct RunSummary {
  std::vector<JobResult> jobs;
  bool ok() const;
};

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

extern const char* const kCodeVersion;

}  // namespace topoae::experiment
