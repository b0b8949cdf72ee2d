#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "topoae/chebyshev.hpp"
#include "topoae/diffnet/adam.hpp"
#include "topoae/training/autoencoder.hpp"

namespace topoae::io {

struct Checkpoint {
  training::Autoencoder model;
  std::optional<chebyshev::CoeffScaler> scaler;  // hybrid runs
  int cheb_degree = 0;                          // hybrid runs
  std::optional<diffnet::AdamState> optimizer;
  nlohmann::json meta = nlohmann::json::object();

  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
// Throws FormatError on unreadable or malformed files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Writes via a temporary sibling and renames, so readers never see partial files.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace topoae::io
