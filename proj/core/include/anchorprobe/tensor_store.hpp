#pragma once

// Binary per-layer hidden-state store (".apt").
//
// Layout, all little-endian:
//   bytes 0..3    magic "APT1"
//   bytes 4..5    u16 format version (currently 1)
//   bytes 6..9    u32 layer count L
//   bytes 10..13  u32 sample count N
//   bytes 14..17  u32 dimension D
//   bytes 18..    L·N·D float32 values in (layer, sample, dim) order
//
// A JSON Lines sidecar (`<stem>.manifest.jsonl`) holds one SampleRecord per
// sample, index-aligned with the sample axis; each line also carries the
// producer's pooling tag.

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "anchorprobe/types.hpp"

namespace anchorprobe {

inline constexpr char kTensorMagic[4] = {'A', 'P', 'T', '1'};
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 18;

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TensorHeader {
  std::uint16_t version = kTensorVersion;
  std::uint32_t layers = 0;
  std::uint32_t samples = 0;
  std::uint32_t dim = 0;
};

/// L × N × D float32 activations.
class LayerTensorSet {
 public:
  LayerTensorSet() = default;
  LayerTensorSet(std::size_t layers, std::size_t samples, std::size_t dim,
                 Pooling pooling = Pooling::last_token);
  LayerTensorSet(std::size_t layers, std::size_t samples, std::size_t dim,
                 std::vector<float> values, Pooling pooling = Pooling::last_token);

  std::size_t layers() const noexcept { return layers_; }
  std::size_t samples() const noexcept { return samples_; }
  std::size_t dim() const noexcept { return dim_; }
  Pooling pooling() const noexcept { return pooling_; }
  void set_pooling(Pooling p) noexcept { pooling_ = p; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  float& at(std::size_t layer, std::size_t sample, std::size_t d) {
    return values_[(layer * samples_ + sample) * dim_ + d];
  }
  float at(std::size_t layer, std::size_t sample, std::size_t d) const {
    return values_[(layer * samples_ + sample) * dim_ + d];
  }

  /// Row-major N × D view of one layer.
  Eigen::Map<const RowMatrixF> layer(std::size_t layer) const;
  Eigen::Map<RowMatrixF> layer(std::size_t layer);

  /// Throws ValidationError on zero dimensions, size mismatch or NaN/Inf.
  void validate() const;

  bool operator==(const LayerTensorSet&) const = default;

 private:
  std::size_t layers_ = 0;
  std::size_t samples_ = 0;
  std::size_t dim_ = 0;
  Pooling pooling_ = Pooling::last_token;
  std::vector<float> values_;
};

struct TensorFile {
  LayerTensorSet tensors;
  std::vector<SampleRecord> manifest;
};

struct LayerBlock {
  RowMatrixF matrix;  ///< N × D
  std::vector<SampleRecord> manifest;
  Pooling pooling = Pooling::last_token;
};

/// `<dir>/<stem>.manifest.jsonl` for `<dir>/<stem>.apt`.
std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path);

/// Writes the .apt file and its sidecar. Throws ValidationError when the
/// manifest length differs from N or any value is non-finite.
void write_tensors(const LayerTensorSet& set, std::span<const SampleRecord> manifest,
                   const std::filesystem::path& path);

TensorHeader read_header(const std::filesystem::path& path);
TensorFile read_tensors(const std::filesystem::path& path);

/// Reads one layer by seeking past the others. Throws DomainError when
/// layer >= L.
LayerBlock read_layer(const std::filesystem::path& path, std::size_t layer);

std::vector<SampleRecord> read_manifest(const std::filesystem::path& tensor_path,
                                        Pooling* pooling = nullptr);

}  // namespace anchorprobe
