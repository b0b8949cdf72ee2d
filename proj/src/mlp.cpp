#include "topoae/diffnet/mlp.hpp"

#include <cmath>
#include <random>

#include "topoae/errors.hpp"

namespace topoae::diffnet {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kSin: return "sin";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
    case Activation::kSinUnit: return "sin_unit";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "sin") return Activation::kSin;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  if (name == "sin_unit") return Activation::kSinUnit;
  throw ArgumentError("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw ArgumentError("MlpSpec: need at least input and output sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw ArgumentError("MlpSpec: layer sizes must be >= 1");
  }
}

std::size_t MlpSpec::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += static_cast<std::size_t>(layer_sizes[l + 1]) * (layer_sizes[l] + 1);
  }
  return n;
}

std::size_t MlpWeights::num_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vector MlpWeights::flatten() const {
  Vector flat(static_cast<Eigen::Index>(num_params()));
  Eigen::Index at = 0;
  for (const auto& l : layers) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void MlpWeights::assign(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(num_params())) {
    throw ArgumentError("MlpWeights::assign: parameter count mismatch");
  }
  Eigen::Index at = 0;
  for (auto& l : layers) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

bool MlpWeights::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

void check_shapes(const MlpSpec& spec, const MlpWeights& weights) {
  spec.validate();
  if (weights.layers.size() != spec.num_layers()) {
    throw ArgumentError("MLP: weight layer count does not match spec");
  }
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto& layer = weights.layers[l];
    if (layer.weight.rows() != spec.layer_sizes[l + 1] ||
        layer.weight.cols() != spec.layer_sizes[l] || layer.bias.size() != spec.layer_sizes[l + 1]) {
      throw ArgumentError("MLP: layer " + std::to_string(l) + " shape does not match spec");
    }
  }
}

MlpWeights init_weights(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  MlpWeights w;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Layer layer;
    layer.weight.resize(fan_out, fan_in);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = dist(rng);
    }
    layer.bias = Vector::Zero(fan_out);
    w.layers.push_back(std::move(layer));
  }
  return w;
}

namespace {

template <typename Derived>
Matrix act_value(Activation a, const Eigen::MatrixBase<Derived>& z) {
  switch (a) {
    case Activation::kSin: return z.array().sin().matrix();
    case Activation::kTanh: return z.array().tanh().matrix();
    case Activation::kIdentity: return z;
    case Activation::kSinUnit: return (0.5 * z.array().sin() + 0.5).matrix();
  }
  return z;
}

template <typename Derived>
Matrix act_slope(Activation a, const Eigen::MatrixBase<Derived>& z) {
  switch (a) {
    case Activation::kSin: return z.array().cos().matrix();
    case Activation::kTanh: return (1.0 - z.array().tanh().square()).matrix();
    case Activation::kIdentity: return Matrix::Ones(z.rows(), z.cols());
    case Activation::kSinUnit: return (0.5 * z.array().cos()).matrix();
  }
  return Matrix::Ones(z.rows(), z.cols());
}

}  // namespace

ForwardResult forward(const MlpSpec& spec, const MlpWeights& weights, const Vector& x) {
  check_shapes(spec, weights);
  if (x.size() != spec.input_dim()) throw ArgumentError("forward: input length does not match spec");
  ForwardResult r;
  r.trace.activations.push_back(x);
  Vector a = x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto& layer = weights.layers[l];
    Vector z = layer.weight * a + layer.bias;
    a = act_value(spec.activation_of(l), z);
    r.trace.pre_activations.push_back(std::move(z));
    r.trace.activations.push_back(a);
  }
  r.output = std::move(a);
  return r;
}

Matrix forward_batch(const MlpSpec& spec, const MlpWeights& weights, const Matrix& x) {
  check_shapes(spec, weights);
  if (x.rows() != spec.input_dim()) throw ArgumentError("forward: input rows do not match spec");
  Matrix a = x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto& layer = weights.layers[l];
    Matrix z = layer.weight * a;
    z.colwise() += layer.bias;
    a = act_value(spec.activation_of(l), z);
  }
  return a;
}

Matrix jacobian(const MlpSpec& spec, const MlpWeights& weights, const Vector& x) {
  const auto fr = forward(spec, weights, x);
  Matrix t;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto& layer = weights.layers[l];
    Matrix zt = l == 0 ? layer.weight : Matrix(layer.weight * t);
    const Vector s = act_slope(spec.activation_of(l), fr.trace.pre_activations[l]);
    t = s.asDiagonal() * zt;
  }
  return t;
}

MlpVars bind(Tape& tape, const MlpWeights& weights, bool trainable) {
  MlpVars v;
  for (const auto& layer : weights.layers) {
    v.weight.push_back(tape.leaf(layer.weight, trainable));
    v.bias.push_back(tape.leaf(layer.bias, trainable));
  }
  return v;
}

MlpWeights gradient_of(const Tape& tape, const MlpVars& vars) {
  MlpWeights g;
  for (std::size_t l = 0; l < vars.weight.size(); ++l) {
    g.layers.push_back({tape.grad(vars.weight[l]), tape.grad(vars.bias[l]).col(0)});
  }
  return g;
}

namespace {

void check_vars(const MlpSpec& spec, const MlpVars& vars) {
  spec.validate();
  if (vars.weight.size() != spec.num_layers() || vars.bias.size() != spec.num_layers()) {
    throw ArgumentError("MLP: bound variables do not match spec");
  }
}

Var act_value(Activation a, Var z) {
  switch (a) {
    case Activation::kSin: return sin(z);
    case Activation::kTanh: return tanh(z);
    case Activation::kIdentity: return z;
    case Activation::kSinUnit: return shift(scale(sin(z), 0.5), 0.5);
  }
  return z;
}

// Per-sample diagonal of the activation derivative; an invalid Var means
// the derivative is identically one.
Var act_slope(Activation a, Var z, Var value) {
  switch (a) {
    case Activation::kSin: return cos(z);
    case Activation::kTanh: return shift(scale(hadamard(value, value), -1.0), 1.0);
    case Activation::kIdentity: return Var();
    case Activation::kSinUnit: return scale(cos(z), 0.5);
  }
  return Var();
}

Jet jet_layers(const MlpSpec& spec, const MlpVars& vars, Var x, Var first_tangent_pre,
               Eigen::Index k) {
  Var a = x;
  Var t;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    Var z = add_bias(matmul(vars.weight[l], a), vars.bias[l]);
    Var zt = l == 0 ? first_tangent_pre : matmul(vars.weight[l], t);
    const Activation act = spec.activation_of(l);
    Var next = act_value(act, z);
    Var slope = act_slope(act, z, next);
    t = slope.valid() ? hadamard(repeat_cols(slope, k), zt) : zt;
    a = next;
  }
  return {a, t};
}

}  // namespace

Var forward(const MlpSpec& spec, const MlpVars& vars, Var x) {
  check_vars(spec, vars);
  if (x.rows() != spec.input_dim()) throw ArgumentError("forward: input rows do not match spec");
  Var a = x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    a = act_value(spec.activation_of(l), add_bias(matmul(vars.weight[l], a), vars.bias[l]));
  }
  return a;
}

Jet forward_jet(const MlpSpec& spec, const MlpVars& vars, Var x, Var tangent) {
  check_vars(spec, vars);
  if (x.rows() != spec.input_dim() || tangent.rows() != spec.input_dim()) {
    throw ArgumentError("forward_jet: input rows do not match spec");
  }
  if (x.cols() == 0 || tangent.cols() % x.cols() != 0) {
    throw ArgumentError("forward_jet: tangent columns must be a multiple of the batch size");
  }
  const Eigen::Index k = tangent.cols() / x.cols();
  return jet_layers(spec, vars, x, matmul(vars.weight[0], tangent), k);
}

Jet forward_jet_identity(const MlpSpec& spec, const MlpVars& vars, Var x) {
  check_vars(spec, vars);
  if (x.rows() != spec.input_dim()) throw ArgumentError("forward_jet: input rows do not match spec");
  // W_1 * I = W_1 for every sample.
  Var first = x.cols() == 1 ? vars.weight[0] : tile_cols(vars.weight[0], x.cols());
  return jet_layers(spec, vars, x, first, spec.input_dim());
}

MlpWeights grad_scalar_loss(const ScalarLoss& loss, const MlpWeights& weights) {
  Tape tape;
  const MlpVars vars = bind(tape, weights);
  Var root = loss(tape, vars);
  tape.backward(root);
  return gradient_of(tape, vars);
}

nlohmann::json to_json(const MlpSpec& spec) {
  return {{"layer_sizes", spec.layer_sizes},
          {"activation", to_string(spec.activation)},
          {"output_activation", to_string(spec.output_activation)}};
}

MlpSpec spec_from_json(const nlohmann::json& j) {
  MlpSpec s;
  s.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
  s.output_activation = activation_from_string(j.at("output_activation").get<std::string>());
  s.validate();
  return s;
}

nlohmann::json to_json(const MlpWeights& weights) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : weights.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"weight", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return layers;
}

MlpWeights weights_from_json(const nlohmann::json& j) {
  MlpWeights out;
  for (const auto& lj : j) {
    const auto rows = lj.at("rows").get<Eigen::Index>();
    const auto cols = lj.at("cols").get<Eigen::Index>();
    const auto w = lj.at("weight").get<std::vector<double>>();
    const auto b = lj.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows) {
      throw FormatError("checkpoint: layer array sizes inconsistent with rows/cols");
    }
    Layer layer;
    layer.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      }
    }
    layer.bias = Eigen::Map<const Vector>(b.data(), rows);
    out.layers.push_back(std::move(layer));
  }
  return out;
}

}  // namespace topoae::diffnet
