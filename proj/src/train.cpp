#include "topoae/training/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>

#include "topoae/training/losses.hpp"

namespace topoae::training {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kMlpAe: return "MLP-AE";
    case Variant::kAeReg: return "AE-REG";
    case Variant::kContraAe: return "ContraAE";
    case Variant::kHybridAeReg: return "Hybrid-AE-REG";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  if (name == "MLP-AE") return Variant::kMlpAe;
  if (name == "AE-REG") return Variant::kAeReg;
  if (name == "ContraAE") return Variant::kContraAe;
  if (name == "Hybrid-AE-REG" || name == "Hybrid AE-REG") return Variant::kHybridAeReg;
  throw ArgumentError("unknown variant '" + name + "'");
}

namespace {

bool uses_latent_grid(Variant v) { return v == Variant::kAeReg || v == Variant::kHybridAeReg; }

}  // namespace

void TrainConfig::validate(const Autoencoder& ae) const {
  ae.validate();
  if (!(lambda >= 0.0)) throw ConfigError("train: lambda must be >= 0");
  if (grid_degree < 0) throw ConfigError("train: grid degree must be >= 0");
  if (grid_batch < 1) throw ConfigError("train: grid batch must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (contractive_batch < 0) throw ConfigError("train: contractive batch must be >= 0");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
}

LatentGridSampler::LatentGridSampler(int latent_dim, int degree, std::size_t cap)
    : dim_(latent_dim), nodes_(quadrature::legendre_nodes(degree)) {
  try {
    grid_.emplace(latent_dim, degree, cap);
  } catch (const SizeError&) {
    grid_.reset();
  }
}

Matrix LatentGridSampler::sample(std::size_t k, std::mt19937_64& rng) const {
  Matrix pts(dim_, static_cast<Eigen::Index>(k));
  if (grid_) {
    const auto batch = quadrature::sample_grid_batch(*grid_, k, rng());
    for (std::size_t c = 0; c < k; ++c) pts.col(static_cast<Eigen::Index>(c)) = batch[c].point;
    return pts;
  }
  std::uniform_int_distribution<std::size_t> pick(0, nodes_.num_nodes() - 1);
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    for (int i = 0; i < dim_; ++i) pts(i, c) = nodes_.nodes[pick(rng)];
  }
  return pts;
}

void TrainReport::write_csv(std::ostream& os) const {
  os << "epoch,l0,l1,total\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : epochs) os << e.epoch << ',' << e.l0 << ',' << e.l1 << ',' << e.total << '\n';
}

nlohmann::json TrainReport::timing_json() const {
  nlohmann::json seconds = nlohmann::json::array();
  for (const auto& e : epochs) seconds.push_back(e.seconds);
  return {{"seconds", seconds}};
}

namespace {

Matrix gather(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = m.col(static_cast<Eigen::Index>(idx[c]));
  }
  return out;
}

}  // namespace

TrainResult train(const Autoencoder& initial, const Matrix& data, const TrainConfig& cfg,
                  const HybridData* hybrid, const EpochCallback& on_epoch) {
  cfg.validate(initial);
  if (data.cols() == 0) throw ArgumentError("train: empty dataset");
  if (data.rows() != initial.ambient_dim()) {
    throw ConfigError("train: data dimension does not match the encoder input");
  }
  const bool is_hybrid = cfg.variant == Variant::kHybridAeReg;
  if (is_hybrid && (hybrid == nullptr || hybrid->regression == nullptr)) {
    throw ConfigError("train: Hybrid-AE-REG needs a regression operator and scaler");
  }
  if (is_hybrid && hybrid->images.cols() != data.cols()) {
    throw ConfigError("train: hybrid images and coefficients are not aligned");
  }

  std::optional<LatentGridSampler> sampler;
  if (uses_latent_grid(cfg.variant)) {
    sampler.emplace(initial.latent_dim(), cfg.grid_degree);
    if (sampler->enumerated()) {
      const auto total = static_cast<std::size_t>(
          std::pow(static_cast<double>(cfg.grid_degree + 1), initial.latent_dim()));
      if (static_cast<std::size_t>(cfg.grid_batch) > total) {
        throw ConfigError("train: grid batch exceeds the number of Legendre grid points");
      }
    }
  }

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0x7EA1u};
  std::vector<std::uint64_t> seeds(2);
  seq.generate(seeds.begin(), seeds.end());
  std::mt19937_64 shuffle_rng(seeds[0]);
  std::mt19937_64 grid_rng(seeds[1]);

  TrainResult result{initial, {}, diffnet::AdamState(static_cast<Eigen::Index>(initial.num_params()),
                                                      {cfg.learning_rate, 0.9, 0.999, 1e-8})};
  Vector params = initial.flatten();
  std::vector<std::size_t> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sum_l0 = 0.0;
    double sum_l1 = 0.0;
    double sum_total = 0.0;
    int iterations = 0;
    for (std::size_t at = 0; at < order.size(); at += batch) {
      const std::span<const std::size_t> idx(order.data() + at, std::min(batch, order.size() - at));
      const Matrix x = gather(data, idx);

      diffnet::Tape tape;
      const AutoencoderVars vars = bind(tape, result.model);
      diffnet::Var l0 = is_hybrid
                            ? hybrid_reconstruction_term(result.model, vars, gather(hybrid->images, idx),
                                                         x, *hybrid->regression, hybrid->scaler)
                            : reconstruction_term(result.model, vars, x);
      diffnet::Var reg;
      if (sampler) {
        reg = latent_reg_term(result.model, vars,
                              sampler->sample(static_cast<std::size_t>(cfg.grid_batch), grid_rng));
      } else if (cfg.variant == Variant::kContraAe) {
        const Eigen::Index k = cfg.contractive_batch > 0
                                   ? std::min<Eigen::Index>(cfg.contractive_batch, x.cols())
                                   : x.cols();
        reg = contractive_term(result.model, vars, x.leftCols(k));
      }
      diffnet::Var total = reg.valid() ? diffnet::add(l0, diffnet::scale(reg, cfg.lambda)) : l0;

      const double l0v = l0.value()(0, 0);
      const double l1v = reg.valid() ? reg.value()(0, 0) : 0.0;
      const double tv = total.value()(0, 0);
      if (!std::isfinite(tv)) {
        throw TrainingAborted("train: non-finite loss at epoch " + std::to_string(epoch) +
                                  ", iteration " + std::to_string(iterations),
                              result.model, result.report);
      }
      tape.backward(total);
      const Vector grad = gradient_of(tape, vars);
      try {
        result.optimizer.update(params, grad);
      } catch (const NumericalError& e) {
        throw TrainingAborted(e.what(), result.model, result.report);
      }
      result.model.assign(params);
      sum_l0 += l0v;
      sum_l1 += l1v;
      sum_total += tv;
      ++iterations;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.l0 = sum_l0 / iterations;
    rec.l1 = sum_l1 / iterations;
    rec.total = sum_total / iterations;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, result.model);
  }
  return result;
}

}  // namespace topoae::training
