#include "topoae/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "topoae/chebyshev.hpp"
#include "topoae/errors.hpp"
#include "topoae/evaluation/geodesic.hpp"
#include "topoae/evaluation/topology.hpp"
#include "topoae/io.hpp"

namespace topoae::experiment {

using nlohmann::json;
using training::Variant;
using Matrix = Eigen::MatrixXd;

const char* const kCodeVersion = "topoae 0.1.0";

std::string to_string(Kind k) {
  switch (k) {
    case Kind::kCircle15: return "circle15";
    case Kind::kTorus15: return "torus15";
    case Kind::kTorus1024: return "torus1024";
    case Kind::kImages: return "images";
  }
  return "?";
}

Kind kind_from_string(const std::string& name) {
  if (name == "circle15") return Kind::kCircle15;
  if (name == "torus15") return Kind::kTorus15;
  if (name == "torus1024") return Kind::kTorus1024;
  if (name == "images") return Kind::kImages;
  throw ConfigError("experiment: unknown experiment '" + name + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (std::uint64_t{out[0]} << 32) | out[1];
}

ExperimentConfig ExperimentConfig::defaults(Kind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.train.grid_degree = 21;
  switch (kind) {
    case Kind::kCircle15:
      c.model = {{6, 6}, 2, diffnet::Activation::kSin};
      c.data.ambient_dim = 15;
      c.data.matrix_range = 2.0;
      c.data.train_count = 3;
      c.data.test_count = 2000;
      c.train.batch_size = 3;
      c.train.epochs = 20000;
      c.train.lambda = 0.03;
      c.train.learning_rate = 3e-3;
      break;
    case Kind::kTorus15:
    case Kind::kTorus1024:
      c.model = {{32, 32}, 3, diffnet::Activation::kSin};
      c.data.ambient_dim = kind == Kind::kTorus15 ? 15 : 1024;
      c.data.matrix_range = 1.0;
      c.data.train_count = 50;
      c.data.test_count = 2000;
      c.train.batch_size = 50;
      c.train.epochs = 5000;
      if (kind == Kind::kTorus1024) c.train.grid_degree = 51;
      break;
    case Kind::kImages:
      c.model = {{100, 100, 100}, 10, diffnet::Activation::kSin};
      c.data.ambient_dim = 1024;
      c.data.train_count = 2000;
      c.data.test_count = 1000;
      c.data.noise_levels = {0, 10, 20, 50};
      c.train.batch_size = 32;
      c.train.epochs = 200;
      c.train.grid_batch = 8;
      c.train.contractive_batch = 4;
      c.eval.geodesic_points = 1000;
      c.data.cheb_degree = 13;
      break;
  }
  return c;
}

namespace {

int line_of(const std::string& text, const std::string& key) {
  if (text.empty() || key.empty()) return 0;
  const auto at = text.find('"' + key + '"');
  if (at == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
}

// Reads the fields of one JSON object, remembering which keys were used so
// leftovers can be reported.
class Fields {
 public:
  Fields(const json& obj, std::string path, const std::string& text)
      : obj_(obj), path_(std::move(path)), text_(text) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    const std::string key = field.substr(field.rfind('.') + 1);
    const int line = line_of(text_, key);
    throw ConfigError(field + (line > 0 ? " (line " + std::to_string(line) + ")" : "") + ": " + msg);
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return obj_.contains(key); }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out, bool required = false) {
    if (!obj_.contains(key)) {
      if (required) fail(name(key), "missing required field");
      return;
    }
    seen_.insert(key);
    const json& v = obj_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(name(key), "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(name(key), "expected a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(name(key), "expected a number");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!non_negative_integer(v)) fail(name(key), "expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(name(key), "expected an integer");
    } else {
      check_array<typename T::value_type>(key, v);
    }
    out = v.get<T>();
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      (void)value;
      if (!seen_.contains(key)) fail(name(key), "unknown field");
    }
  }

 private:
  static bool non_negative_integer(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  }

  template <typename E>
  void check_array(const std::string& key, const json& v) const {
    if (!v.is_array()) fail(name(key), "expected an array");
    for (const auto& e : v) {
      if constexpr (std::is_same_v<E, std::string>) {
        if (!e.is_string()) fail(name(key), "expected an array of strings");
      } else if constexpr (std::is_floating_point_v<E>) {
        if (!e.is_number()) fail(name(key), "expected an array of numbers");
      } else if constexpr (std::is_unsigned_v<E>) {
        if (!non_negative_integer(e)) fail(name(key), "expected an array of non-negative integers");
      } else {
        if (!e.is_number_integer()) fail(name(key), "expected an array of integers");
      }
    }
  }

  const json& obj_;
  std::string path_;
  const std::string& text_;
  std::set<std::string> seen_;
};

void read_train(Fields& f, training::TrainConfig& t) {
  f.get("lambda", t.lambda);
  f.get("grid_degree", t.grid_degree);
  f.get("grid_batch", t.grid_batch);
  f.get("batch_size", t.batch_size);
  f.get("contractive_batch", t.contractive_batch);
  f.get("epochs", t.epochs);
  f.get("learning_rate", t.learning_rate);
  f.get("noise_free", t.noise_free);
  f.finish();
}

json train_json(const training::TrainConfig& t) {
  return {{"lambda", t.lambda},          {"grid_degree", t.grid_degree},
          {"grid_batch", t.grid_batch},  {"batch_size", t.batch_size},
          {"contractive_batch", t.contractive_batch}, {"epochs", t.epochs},
          {"learning_rate", t.learning_rate}, {"noise_free", t.noise_free}};
}

void check_train(const Fields& f, const training::TrainConfig& t) {
  if (!(t.lambda >= 0.0)) f.fail(f.name("lambda"), "must be >= 0");
  if (t.grid_degree < 0) f.fail(f.name("grid_degree"), "must be >= 0");
  if (t.grid_batch < 1) f.fail(f.name("grid_batch"), "must be >= 1");
  if (t.batch_size < 1) f.fail(f.name("batch_size"), "must be >= 1");
  if (t.contractive_batch < 0) f.fail(f.name("contractive_batch"), "must be >= 0");
  if (t.epochs < 0) f.fail(f.name("epochs"), "must be >= 0");
  if (!(t.learning_rate > 0.0)) f.fail(f.name("learning_rate"), "must be > 0");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& text) {
  Fields top(j, "", text);
  std::string kind_name;
  top.get("experiment", kind_name, true);
  Kind kind;
  try {
    kind = kind_from_string(kind_name);
  } catch (const ConfigError&) {
    top.fail("experiment", "expected one of circle15, torus15, torus1024, images");
  }
  ExperimentConfig c = defaults(kind);

  std::vector<std::string> variant_names;
  top.get("variants", variant_names, true);
  if (variant_names.empty()) top.fail("variants", "at least one variant is required");
  for (const auto& v : variant_names) {
    Variant parsed;
    try {
      parsed = training::variant_from_string(v);
    } catch (const ArgumentError&) {
      top.fail("variants", "unknown variant '" + v + "'");
    }
    if (std::find(c.variants.begin(), c.variants.end(), parsed) != c.variants.end()) {
      top.fail("variants", "duplicate variant '" + v + "'");
    }
    if (parsed == Variant::kHybridAeReg && kind != Kind::kImages) {
      top.fail("variants", "Hybrid-AE-REG needs the images experiment");
    }
    c.variants.push_back(parsed);
  }
  top.get("seeds", c.seeds, true);
  if (c.seeds.empty()) top.fail("seeds", "at least one seed is required");
  std::string out = c.output_dir.string();
  top.get("output_dir", out);
  c.output_dir = out;

  if (top.has("train")) {
    Fields f(top.raw("train"), "train", text);
    read_train(f, c.train);
    check_train(f, c.train);
  }
  if (top.has("overrides")) {
    const json& o = top.raw("overrides");
    Fields f(o, "overrides", text);
    for (const auto& [name, body] : o.items()) {
      Variant v;
      try {
        v = training::variant_from_string(name);
      } catch (const ArgumentError&) {
        f.fail(f.name(name), "unknown variant");
      }
      training::TrainConfig probe = c.train;
      Fields g(f.raw(name), f.name(name), text);
      read_train(g, probe);
      check_train(g, probe);
      c.overrides[v] = body;
    }
    f.finish();
  }
  if (top.has("model")) {
    Fields f(top.raw("model"), "model", text);
    f.get("hidden", c.model.hidden);
    f.get("latent_dim", c.model.latent_dim);
    std::string act = diffnet::to_string(c.model.activation);
    f.get("activation", act);
    try {
      c.model.activation = diffnet::activation_from_string(act);
    } catch (const ArgumentError&) {
      f.fail("model.activation", "unknown activation '" + act + "'");
    }
    f.finish();
    if (c.model.hidden.empty()) f.fail("model.hidden", "at least one hidden layer is required");
    for (int h : c.model.hidden) {
      if (h < 1) f.fail("model.hidden", "widths must be >= 1");
    }
    if (c.model.latent_dim < 1) f.fail("model.latent_dim", "must be >= 1");
  }
  if (top.has("data")) {
    Fields f(top.raw("data"), "data", text);
    f.get("ambient_dim", c.data.ambient_dim);
    f.get("matrix_range", c.data.matrix_range);
    f.get("train_count", c.data.train_count);
    f.get("test_count", c.data.test_count);
    f.get("minor_radius", c.data.minor_radius);
    f.get("major_radius", c.data.major_radius);
    if (f.has("axis_scale")) {
      std::vector<double> s;
      f.get("axis_scale", s);
      if (s.size() != 3) f.fail("data.axis_scale", "expected three numbers");
      c.data.axis_scale = Eigen::Vector3d(s[0], s[1], s[2]);
    }
    f.get("train_noise_pct", c.data.train_noise_pct);
    f.get("noise_levels", c.data.noise_levels);
    f.get("idx_images", c.data.idx_images);
    f.get("idx_labels", c.data.idx_labels);
    f.get("cheb_degree", c.data.cheb_degree);
    f.finish();
    for (double p : c.data.noise_levels) {
      if (!(p >= 0.0 && p <= 100.0)) f.fail("data.noise_levels", "noise percents must lie in [0,100]");
    }
    if (!(c.data.train_noise_pct >= 0.0 && c.data.train_noise_pct <= 100.0)) {
      f.fail("data.train_noise_pct", "must lie in [0,100]");
    }
    if (c.data.train_count < 1) f.fail("data.train_count", "must be >= 1");
    if (c.data.test_count < 2) f.fail("data.test_count", "must be >= 2");
    if (!(c.data.matrix_range > 0.0)) f.fail("data.matrix_range", "must be > 0");
    if (!(c.data.minor_radius > 0.0 && c.data.major_radius > 0.0)) f.fail("data.minor_radius", "radii must be > 0");
    if (c.data.cheb_degree < 0 || (c.data.cheb_degree + 1) * (c.data.cheb_degree + 1) > 1024) {
      f.fail("data.cheb_degree", "must satisfy (n+1)^2 <= 1024");
    }
  }
  if (top.has("eval")) {
    Fields f(top.raw("eval"), "eval", text);
    f.get("residual_points", c.eval.residual_points);
    f.get("geodesic_pairs", c.eval.geodesic_pairs);
    f.get("geodesic_points", c.eval.geodesic_points);
    f.get("injectivity_quantile", c.eval.injectivity_quantile);
    f.get("intrinsic_tolerance", c.eval.intrinsic_tolerance);
    f.finish();
    if (c.eval.residual_points < 1) f.fail("eval.residual_points", "must be >= 1");
    if (c.eval.geodesic_pairs < 0) f.fail("eval.geodesic_pairs", "must be >= 0");
    if (!(c.eval.injectivity_quantile > 0.0 && c.eval.injectivity_quantile < 1.0)) {
      f.fail("eval.injectivity_quantile", "must lie in (0,1)");
    }
  }
  top.finish();

  if (kind == Kind::kImages) c.data.ambient_dim = 1024;
  if (c.model.latent_dim > c.data.ambient_dim) top.fail("model.latent_dim", "must not exceed the ambient dimension");
  if (kind == Kind::kCircle15 && c.model.latent_dim != 2) top.fail("model.latent_dim", "circle15 re-embeds into 2 dimensions");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto at = std::min<std::size_t>(e.byte, text.size());
    const auto upto = text.begin() + static_cast<std::ptrdiff_t>(at);
    const int line = 1 + static_cast<int>(std::count(text.begin(), upto, '\n'));
    const auto bol = text.rfind('\n', at == 0 ? 0 : at - 1);
    const std::size_t col = bol == std::string::npos ? at : at - bol - 1;
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON");
  }
  try {
    return from_json(j, text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

training::TrainConfig ExperimentConfig::train_for(Variant v, std::uint64_t seed) const {
  training::TrainConfig t = train;
  if (auto it = overrides.find(v); it != overrides.end()) {
    static const std::string empty;
    Fields f(it->second, "overrides", empty);
    read_train(f, t);
  }
  t.variant = v;
  t.seed = derive_seed(seed, 11);
  if (v == Variant::kMlpAe) t.lambda = 0.0;
  return t;
}

json ExperimentConfig::to_json() const {
  json variants = json::array();
  for (auto v : this->variants) variants.push_back(training::to_string(v));
  json ov = json::object();
  for (const auto& [v, body] : overrides) ov[training::to_string(v)] = body;
  return {
      {"experiment", to_string(experiment)},
      {"variants", variants},
      {"seeds", seeds},
      {"output_dir", output_dir.string()},
      {"train", train_json(train)},
      {"overrides", ov},
      {"model",
       {{"hidden", model.hidden},
        {"latent_dim", model.latent_dim},
        {"activation", diffnet::to_string(model.activation)}}},
      {"data",
       {{"ambient_dim", data.ambient_dim},
        {"matrix_range", data.matrix_range},
        {"train_count", data.train_count},
        {"test_count", data.test_count},
        {"minor_radius", data.minor_radius},
        {"major_radius", data.major_radius},
        {"axis_scale", {data.axis_scale(0), data.axis_scale(1), data.axis_scale(2)}},
        {"train_noise_pct", data.train_noise_pct},
        {"noise_levels", data.noise_levels},
        {"idx_images", data.idx_images},
        {"idx_labels", data.idx_labels},
        {"cheb_degree", data.cheb_degree}}},
      {"eval",
       {{"residual_points", eval.residual_points},
        {"geodesic_pairs", eval.geodesic_pairs},
        {"geodesic_points", eval.geodesic_points},
        {"injectivity_quantile", eval.injectivity_quantile},
        {"intrinsic_tolerance", eval.intrinsic_tolerance}}},
  };
}

std::string ExperimentConfig::hash() const {
  json canon = to_json();
  canon.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

ExperimentData make_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentData d;
  const auto& dc = cfg.data;
  switch (cfg.experiment) {
    case Kind::kCircle15: {
      d.embedding = manifolds::make_embedding(manifolds::Generator::kCircle, dc.ambient_dim, dc.matrix_range,
                                              derive_seed(seed, 1));
      d.train = manifolds::circle_dataset(*d.embedding, dc.train_count, derive_seed(seed, 2));
      d.test = manifolds::circle_sweep(*d.embedding, dc.test_count);
      break;
    }
    case Kind::kTorus15:
    case Kind::kTorus1024: {
      d.embedding = manifolds::make_embedding(manifolds::Generator::kTorus, dc.ambient_dim, dc.matrix_range,
                                              derive_seed(seed, 1));
      d.embedding->minor_radius = dc.minor_radius;
      d.embedding->major_radius = dc.major_radius;
      d.embedding->axis_scale = dc.axis_scale;
      d.train = manifolds::torus_dataset(*d.embedding, dc.train_count, derive_seed(seed, 2));
      d.test = manifolds::torus_dataset(*d.embedding, dc.test_count, derive_seed(seed, 3));
      break;
    }
    case Kind::kImages: {
      if (!dc.idx_images.empty()) {
        std::optional<std::filesystem::path> labels;
        if (!dc.idx_labels.empty()) labels = dc.idx_labels;
        const manifolds::Dataset all = manifolds::load_idx_images(
            dc.idx_images, dc.train_count + dc.test_count, derive_seed(seed, 2), labels);
        if (all.size() < static_cast<Eigen::Index>(dc.train_count + 1)) {
          throw InputError("images: IDX file holds too few images for the requested split");
        }
        std::vector<std::size_t> order(static_cast<std::size_t>(all.size()));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(seed, 3));
        std::shuffle(order.begin(), order.end(), rng);
        const auto cut = order.begin() + static_cast<std::ptrdiff_t>(dc.train_count);
        d.train = all.subset({order.begin(), cut});
        d.test = all.subset({cut, order.end()});
      } else {
        d.train = manifolds::synthetic_fashion(dc.train_count, derive_seed(seed, 2));
        d.test = manifolds::synthetic_fashion(dc.test_count, derive_seed(seed, 3));
      }
      break;
    }
  }
  return d;
}

std::optional<double> JobResult::metric(const std::string& name, double noise_pct) const {
  for (const auto& r : metrics) {
    if (r.metric == name && r.noise_pct == noise_pct) return r.mean;
  }
  return std::nullopt;
}

namespace {

using evaluation::MetricRow;

std::string csv_of(const training::TrainReport& report) {
  std::ostringstream os;
  report.write_csv(os);
  return os.str();
}

std::string csv_of(const std::vector<MetricRow>& rows) {
  std::ostringstream os;
  evaluation::write_metrics_csv(rows, os);
  return os.str();
}

double mean_sq_error(const Matrix& a, const Matrix& b) {
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

MetricRow row(const std::string& variant, const std::string& metric, double mean, double std = 0.0,
              std::size_t n = 1, double noise = 0.0) {
  return {variant, noise, metric, mean, std, n};
}

// Forward path through the trained model, pixels in and out for the hybrid variant.
struct Pipeline {
  const training::Autoencoder* model = nullptr;
  const chebyshev::RegressionOperator* regression = nullptr;
  const chebyshev::CoeffScaler* scaler = nullptr;

  Matrix inputs(const Matrix& x) const { return regression ? scaler->apply(regression->solve(x)) : x; }
  Matrix encode(const Matrix& x) const { return model->encode(inputs(x)); }
  Matrix decode(const Matrix& z) const {
    const Matrix y = model->decode(z);
    return regression ? Matrix(regression->matrix() * scaler->unapply(y)) : y;
  }
  Matrix reconstruct(const Matrix& x) const { return decode(encode(x)); }
};

std::vector<std::size_t> strided(std::size_t total, std::size_t want) {
  const std::size_t k = std::min(total, want);
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i * total / k;
  return idx;
}

json geodesics(const ExperimentConfig& cfg, const ExperimentData& data, const Pipeline& pipe,
               const Matrix& codes, std::uint64_t seed, const std::filesystem::path& dir, bool write) {
  json summary = json::array();
  const std::vector<std::size_t> pool = strided(static_cast<std::size_t>(codes.cols()), cfg.eval.geodesic_points);
  if (pool.size() < 2 || cfg.eval.geodesic_pairs == 0) return summary;
  Matrix sub(codes.rows(), static_cast<Eigen::Index>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = codes.col(static_cast<Eigen::Index>(pool[i]));

  std::mt19937_64 rng(derive_seed(seed, 30));
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int k = 0; k < cfg.eval.geodesic_pairs; ++k) {
    std::size_t a = 0;
    std::size_t b = 0;
    if (k == 0 && cfg.experiment == Kind::kCircle15) {
      b = pool.size() / 2;  // antipodal on the sweep
    } else {
      while (a == b) {
        a = pick(rng);
        b = pick(rng);
      }
    }
    const evaluation::GeodesicResult g = evaluation::vr_geodesic(sub, a, b);
    json j = g.to_json();
    std::vector<std::size_t> test_idx;
    for (auto p : g.path) test_idx.push_back(pool[p]);
    j["indices"] = test_idx;
    j["a"] = pool[a];
    j["b"] = pool[b];
    j["straight"] = (sub.col(static_cast<Eigen::Index>(a)) - sub.col(static_cast<Eigen::Index>(b))).norm();
    if (!data.test.labels.empty()) {
      std::vector<int> labels;
      for (auto t : test_idx) labels.push_back(data.test.labels[t]);
      j["labels"] = labels;
    }
    summary.push_back(j);
    if (!write) continue;
    const std::string stem = "pair_" + std::to_string(k);
    io::write_text(dir / "geodesics" / (stem + ".json"), j.dump(1) + "\n");
    Matrix path_codes(codes.rows(), static_cast<Eigen::Index>(g.path.size()));
    for (std::size_t i = 0; i < g.path.size(); ++i) path_codes.col(static_cast<Eigen::Index>(i)) = sub.col(static_cast<Eigen::Index>(g.path[i]));
    const Matrix decoded = pipe.decode(path_codes);
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index c = 0; c < decoded.cols(); ++c) {
      for (Eigen::Index r = 0; r < decoded.rows(); ++r) os << (r ? "," : "") << decoded(r, c);
      os << '\n';
    }
    io::write_text(dir / "geodesics" / (stem + "_decoded.csv"), os.str());
  }
  return summary;
}

}  // namespace

JobResult run_job(const ExperimentConfig& cfg, const ExperimentData& data, Variant v, std::uint64_t seed,
                  bool write) {
  JobResult res;
  res.variant = v;
  res.seed = seed;
  const std::string vname = training::to_string(v);
  res.dir = cfg.output_dir / to_string(cfg.experiment) / vname / ("seed_" + std::to_string(seed));
  const bool images = cfg.experiment == Kind::kImages;
  const bool hybrid = v == Variant::kHybridAeReg;
  const training::TrainConfig tc = cfg.train_for(v, seed);

  manifolds::Dataset train = data.train;
  if (!tc.noise_free && cfg.data.train_noise_pct > 0) {
    train = manifolds::add_gaussian_noise(train, cfg.data.train_noise_pct, derive_seed(seed, 20));
  }

  std::optional<chebyshev::RegressionOperator> regression;
  training::HybridData hybrid_data;
  Matrix train_in = train.points;
  if (hybrid) {
    regression.emplace(train.image_side, cfg.data.cheb_degree);
    const Matrix coeffs = regression->solve(train.points);
    hybrid_data.regression = &*regression;
    hybrid_data.scaler = chebyshev::coeff_scaler(coeffs);
    hybrid_data.images = train.points;
    train_in = hybrid_data.scaler.apply(coeffs);
  }

  training::AutoencoderShape shape;
  shape.ambient_dim = static_cast<int>(train_in.rows());
  shape.latent_dim = cfg.model.latent_dim;
  shape.hidden = cfg.model.hidden;
  shape.activation = cfg.model.activation;
  shape.decoder_output = images ? (hybrid ? diffnet::Activation::kSin : diffnet::Activation::kSinUnit)
                                : diffnet::Activation::kIdentity;
  const training::Autoencoder initial = training::make_autoencoder(shape, derive_seed(seed, 10));

  training::LatentGridSampler held_out(cfg.model.latent_dim, tc.grid_degree);
  std::mt19937_64 held_rng(derive_seed(seed, 12));
  std::size_t residual_k = static_cast<std::size_t>(cfg.eval.residual_points);
  if (held_out.enumerated()) {
    residual_k = std::min<std::size_t>(
        residual_k, static_cast<std::size_t>(std::pow(tc.grid_degree + 1.0, cfg.model.latent_dim)));
  }
  const Matrix residual_points = held_out.sample(residual_k, held_rng);

  Pipeline pipe{&initial, hybrid ? &*regression : nullptr, hybrid ? &hybrid_data.scaler : nullptr};
  const double mse_init = mean_sq_error(pipe.reconstruct(data.test.points), data.test.points);
  const auto res_init = evaluation::mean_std(evaluation::jacobian_identity_residuals(initial, residual_points));

  training::Autoencoder model = initial;
  training::TrainReport report;
  std::optional<diffnet::AdamState> optimizer;
  res.ok = true;
  try {
    training::TrainResult tr = training::train(initial, train_in, tc, hybrid ? &hybrid_data : nullptr);
    model = std::move(tr.model);
    report = std::move(tr.report);
    optimizer = std::move(tr.optimizer);
  } catch (const training::TrainingAborted& e) {
    res.ok = false;
    res.message = e.what();
    model = e.model;
    report = e.report;
  }
  pipe.model = &model;

  const Matrix test_codes = pipe.encode(data.test.points);
  const Matrix test_recon = pipe.decode(test_codes);
  const auto res_final = evaluation::mean_std(evaluation::jacobian_identity_residuals(model, residual_points));
  const std::size_t rk = residual_k;
  res.metrics.push_back(row(vname, "test_mse_init", mse_init, 0.0, static_cast<std::size_t>(data.test.size())));
  res.metrics.push_back(row(vname, "test_mse", mean_sq_error(test_recon, data.test.points), 0.0,
                            static_cast<std::size_t>(data.test.size())));
  res.metrics.push_back(row(vname, "jac_residual_init", res_init.mean, res_init.std, rk));
  res.metrics.push_back(row(vname, "jac_residual", res_final.mean, res_final.std, rk));

  json topo;
  topo["variant"] = vname;
  topo["seed"] = seed;
  topo["jacobian_residual"] = {{"init_mean", res_init.mean}, {"final_mean", res_final.mean}, {"points", rk}};

  switch (cfg.experiment) {
    case Kind::kCircle15: {
      const auto curve = evaluation::simple_closed_curve_check(test_codes);
      const auto curve_init = evaluation::simple_closed_curve_check(initial.encode(data.test.points));
      topo["curve"] = curve.to_json();
      topo["curve_init_simple"] = curve_init.simple;
      topo["sweep_points"] = data.test.size();
      res.metrics.push_back(row(vname, "simple", curve.simple ? 1.0 : 0.0));
      res.metrics.push_back(row(vname, "crossings", static_cast<double>(curve.crossing_pairs.size())));
      break;
    }
    case Kind::kTorus15:
    case Kind::kTorus1024: {
      const double q = cfg.eval.injectivity_quantile;
      const double tol = cfg.eval.intrinsic_tolerance;
      const double delta = evaluation::pairwise_distance_quantile(test_codes, q);
      const auto viol = evaluation::injectivity_proxy(test_codes, data.test.intrinsic, delta, tol);
      const Matrix init_codes = initial.encode(data.test.points);
      const double delta_init = evaluation::pairwise_distance_quantile(init_codes, q);
      const auto viol_init = evaluation::injectivity_proxy(init_codes, data.test.intrinsic, delta_init, tol);
      topo["injectivity"] = {{"delta", delta},
                             {"intrinsic_tolerance", tol},
                             {"quantile", q},
                             {"violations", viol.size()},
                             {"violations_init", viol_init.size()}};
      res.metrics.push_back(row(vname, "injectivity_violations", static_cast<double>(viol.size())));
      res.metrics.push_back(row(vname, "injectivity_violations_init", static_cast<double>(viol_init.size())));
      res.metrics.push_back(row(vname, "injectivity_delta", delta));
      break;
    }
    case Kind::kImages: {
      for (double p : cfg.data.noise_levels) {
        const auto tag = 100 + static_cast<std::uint64_t>(std::llround(p * 100.0));
        const manifolds::Dataset noisy = manifolds::add_gaussian_noise(data.test, p, derive_seed(seed, tag));
        const auto rec = evaluation::score_images(vname, p, data.test.points, pipe.reconstruct(noisy.points),
                                                  data.test.image_side);
        for (auto& r : evaluation::rows_of(rec)) res.metrics.push_back(r);
      }
      break;
    }
  }
  topo["geodesics"] = geodesics(cfg, data, pipe, test_codes, seed, res.dir, write);
  res.topo = topo;

  if (!write) return res;
  io::Checkpoint ckpt{model, std::nullopt, 0, optimizer,
                      {{"variant", vname}, {"seed", seed}, {"config_hash", cfg.hash()},
                       {"epochs_completed", report.epochs.size()}}};
  if (hybrid) {
    ckpt.scaler = hybrid_data.scaler;
    ckpt.cheb_degree = cfg.data.cheb_degree;
  }
  io::save_checkpoint(ckpt, res.dir / "checkpoint.json");
  io::write_text(res.dir / "train.csv", csv_of(report));
  io::write_text(res.dir / "timing.json", report.timing_json().dump() + "\n");
  io::write_text(res.dir / "metrics.csv", csv_of(res.metrics));
  io::write_text(res.dir / "topo.json", topo.dump(1) + "\n");
  json manifest = {{"config_hash", cfg.hash()},
                   {"code_version", kCodeVersion},
                   {"experiment", to_string(cfg.experiment)},
                   {"variant", vname},
                   {"seed", seed},
                   {"train_seed", tc.seed},
                   {"init_seed", derive_seed(seed, 10)},
                   {"train", train_json(tc)},
                   {"train_data", data.train.provenance},
                   {"test_data", data.test.provenance},
                   {"status", res.ok ? "ok" : "aborted"}};
  if (data.embedding) manifest["embedding"] = data.embedding->to_json();
  if (!res.ok) manifest["error"] = res.message;
  io::write_text(res.dir / "manifest.json", manifest.dump(1) + "\n");
  return res;
}

bool RunSummary::ok() const {
  return std::all_of(jobs.begin(), jobs.end(), [](const JobResult& j) { return j.ok; });
}

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto log = [&](const std::string& msg) {
    if (opts.log) opts.log(msg);
  };
  const std::filesystem::path root = cfg.output_dir / to_string(cfg.experiment);

  std::vector<ExperimentData> data;
  for (auto s : cfg.seeds) {
    data.push_back(make_data(cfg, s));
    manifolds::save_dataset(data.back().test, root / "data" / ("seed_" + std::to_string(s)));
  }

  struct Job {
    std::size_t seed_index;
    Variant variant;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    for (auto v : cfg.variants) jobs.push_back({s, v});
  }

  RunSummary summary;
  summary.jobs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      const std::uint64_t seed = cfg.seeds[job.seed_index];
      try {
        summary.jobs[i] = run_job(cfg, data[job.seed_index], job.variant, seed);
      } catch (...) {
        std::lock_guard lock(log_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
      std::lock_guard lock(log_mu);
      const auto& r = summary.jobs[i];
      log(training::to_string(job.variant) + " seed " + std::to_string(seed) + (r.ok ? " done" : " aborted: " + r.message));
    }
  };
  const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  json listing = json::array();
  for (const auto& r : summary.jobs) {
    listing.push_back({{"variant", training::to_string(r.variant)},
                       {"seed", r.seed},
                       {"ok", r.ok},
                       {"dir", std::filesystem::relative(r.dir, root).generic_string()}});
  }
  const json manifest = {{"config_hash", cfg.hash()},
                         {"code_version", kCodeVersion},
                         {"config", cfg.to_json()},
                         {"seeds", cfg.seeds},
                         {"jobs", listing}};
  io::write_text(root / "manifest.json", manifest.dump(1) + "\n");
  return summary;
}

}  // namespace topoae::experiment
