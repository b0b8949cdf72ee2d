#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "topoae/errors.hpp"
#include "topoae/manifolds.hpp"

namespace topoae::manifolds {

namespace {

// gzread passes plain files through unchanged.
std::vector<unsigned char> read_maybe_gz(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> bytes;
  unsigned char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) bytes.insert(bytes.end(), buf, buf + n);
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw FormatError(path.string() + ": corrupt gzip stream");
  return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t at,
                        const std::filesystem::path& path) {
  if (at + 4 > b.size()) throw FormatError(path.string() + ": truncated IDX header");
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = read_maybe_gz(path);
  if (read_be32(bytes, 0, path) != 0x00000801u) throw FormatError(path.string() + ": bad IDX label magic");
  const std::uint32_t count = read_be32(bytes, 4, path);
  if (bytes.size() < 8 + static_cast<std::size_t>(count)) throw FormatError(path.string() + ": truncated labels");
  return std::vector<int>(bytes.begin() + 8, bytes.begin() + 8 + count);
}

}  // namespace

Dataset load_idx_images(const std::filesystem::path& path, std::size_t limit, std::uint64_t seed,
                        const std::optional<std::filesystem::path>& labels_path) {
  const auto bytes = read_maybe_gz(path);
  if (read_be32(bytes, 0, path) != 0x00000803u) throw FormatError(path.string() + ": bad IDX image magic");
  const std::size_t count = read_be32(bytes, 4, path);
  const std::size_t rows = read_be32(bytes, 8, path);
  const std::size_t cols = read_be32(bytes, 12, path);
  if (rows != cols || rows == 0) throw FormatError(path.string() + ": images must be square");
  const std::size_t pixels = rows * cols;
  if (bytes.size() < 16 + count * pixels) throw FormatError(path.string() + ": truncated image data");

  std::vector<int> labels;
  if (labels_path) {
    labels = read_idx_labels(*labels_path);
    if (labels.size() != count) throw FormatError("IDX labels and images differ in count");
  }

  std::vector<std::size_t> chosen(count);
  for (std::size_t i = 0; i < count; ++i) chosen[i] = i;
  if (limit < count) {
    std::vector<std::size_t> picked;
    std::mt19937_64 rng(seed);
    std::sample(chosen.begin(), chosen.end(), std::back_inserter(picked), limit, rng);
    chosen = std::move(picked);
  }

  const int pad = rows == 28 ? 2 : 0;
  const int side = static_cast<int>(rows) + 2 * pad;
  Dataset d;
  d.image_side = side;
  d.points = Matrix::Zero(static_cast<Eigen::Index>(side) * side, static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    const unsigned char* src = bytes.data() + 16 + chosen[c] * pixels;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const auto r = static_cast<Eigen::Index>((i + pad) * side + (j + pad));
        d.points(r, static_cast<Eigen::Index>(c)) = src[i * cols + j] / 255.0;
      }
    }
    if (!labels.empty()) d.labels.push_back(labels[chosen[c]]);
  }
  d.provenance = {{"source", path.string()}, {"sample_seed", seed}, {"limit", limit},
                  {"file_count", count}};
  return d;
}

}  // namespace topoae::manifolds
