#include "topoae/io.hpp"

#include <fstream>
#include <sstream>

#include "topoae/errors.hpp"

namespace topoae::io {

nlohmann::json Checkpoint::to_json() const {
  nlohmann::json j;
  j["format"] = "topoae-checkpoint";
  j["version"] = 1;
  j["model"] = model.to_json();
  if (scaler) {
    j["scaler"] = scaler->to_json();
    j["cheb_degree"] = cheb_degree;
  }
  if (optimizer) j["optimizer"] = optimizer->to_json();
  j["meta"] = meta;
  return j;
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "topoae-checkpoint") throw FormatError("checkpoint: unknown format tag");
    Checkpoint c{training::Autoencoder::from_json(j.at("model")), std::nullopt, 0, std::nullopt,
                 j.value("meta", nlohmann::json::object())};
    if (j.contains("scaler")) {
      c.scaler = chebyshev::CoeffScaler::from_json(j.at("scaler"));
      c.cheb_degree = j.at("cheb_degree").get<int>();
    }
    if (j.contains("optimizer")) c.optimizer = diffnet::AdamState::from_json(j.at("optimizer"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_text(path, ckpt.to_json().dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return Checkpoint::from_json(read_json(path));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace topoae::io
