#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "topoae/chebyshev.hpp"
#include "topoae/diffnet/adam.hpp"
#include "topoae/errors.hpp"
#include "topoae/quadrature.hpp"
#include "topoae/training/autoencoder.hpp"

namespace topoae::training {

enum class Variant { kMlpAe, kAeReg, kContraAe, kHybridAeReg };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct TrainConfig {
  Variant variant = Variant::kMlpAe;
  double lambda = 0.1;
  int grid_degree = 21;
  int grid_batch = 64;
  int batch_size = 32;
  // ContraAE: samples per iteration entering the ambient Jacobian term
  // (0 = whole data batch).
  int contractive_batch = 0;
  int epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  // Informational; the experiment runner perturbs training data when false.
  bool noise_free = true;

  void validate(const Autoencoder& ae) const;
};

// Latent regularisation points. Enumerated tensor grids are sub-sampled
// without replacement; when (n+1)^{m1} exceeds the cap every coordinate is
// drawn i.i.d. from the 1-D Legendre nodes instead.
class LatentGridSampler {
 public:
  LatentGridSampler(int latent_dim, int degree, std::size_t cap = quadrature::kDefaultGridCap);

  bool enumerated() const { return grid_.has_value(); }
  const quadrature::LegendreGrid1D& grid1d() const { return nodes_; }

  // m1 x k matrix of latent points.
  Matrix sample(std::size_t k, std::mt19937_64& rng) const;

 private:
  int dim_;
  quadrature::LegendreGrid1D nodes_;
  std::optional<quadrature::TensorLegendreGrid> grid_;
};

struct EpochRecord {
  int epoch = 0;
  double l0 = 0.0;     // mean reconstruction term per iteration
  double l1 = 0.0;     // mean regularisation term (latent or contractive)
  double total = 0.0;  // mean of l0 + lambda * l1
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::string checkpoint;  // set by callers that persist the final model

  // epoch,l0,l1,total -- deterministic for a fixed seed.
  void write_csv(std::ostream& os) const;
  // {"seconds": [...]} per epoch; kept out of CSV so CSVs stay reproducible.
  nlohmann::json timing_json() const;
};

// Inputs and targets for the hybrid variant.
struct HybridData {
  const chebyshev::RegressionOperator* regression = nullptr;
  chebyshev::CoeffScaler scaler;
  Matrix images;  // raw pixels (r^2 x N), columns aligned with the encoder inputs
};

struct TrainResult {
  Autoencoder model;
  TrainReport report;
  diffnet::AdamState optimizer;
};

// Thrown when a loss or gradient turns non-finite; carries the last finite
// model and the records written so far.
struct TrainingAborted : NumericalError {
  TrainingAborted(const std::string& what, Autoencoder last_good, TrainReport partial)
      : NumericalError(what), model(std::move(last_good)), report(std::move(partial)) {}
  Autoencoder model;
  TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord&, const Autoencoder&)>;

// Mini-batch Adam on L0 + lambda * L1. `data` columns are encoder inputs
// (scaled Chebyshev coefficients for the hybrid variant, which also needs
// `hybrid`). Deterministic for a fixed cfg.seed.
TrainResult train(const Autoencoder& initial, const Matrix& data, const TrainConfig& cfg,
                  const HybridData* hybrid = nullptr, const EpochCallback& on_epoch = {});

}  // namespace topoae::training
