#pragma once

// Seeded synthetic fixtures: base images, hidden-state tensors with planted
// anchor and quality directions, and matching score tables.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anchorprobe/image.hpp"
#include "anchorprobe/score_table.hpp"
#include "anchorprobe/tensor_store.hpp"

namespace anchorprobe::synthetic {

/// Smooth gradient, a few flat shapes and fine texture; never constant.
RgbImage base_image(int width, int height, std::uint64_t seed, const std::string& image_id);

/// Writes `<city>_<nn>.png` files, `per_city` per city. Returns the paths.
std::vector<std::filesystem::path> write_base_images(const std::filesystem::path& dir,
                                                     const std::vector<std::string>& cities, int per_city,
                                                     int width, int height, std::uint64_t seed);

struct ProbeSpec {
  std::size_t cities = 10;
  std::size_t images_per_city = 20;
  std::size_t layers = 12;
  std::size_t dim = 64;
  std::size_t anchor_layer = 7;   ///< anchor class directions present from here on
  std::size_t quality_layer = 9;  ///< quality direction present from here on
  double anchor_margin = 6.0;     ///< class-mean offset along its own axis
  double quality_strength = 2.0;  ///< feature slope per quality point
  double image_scale = 1.0;       ///< SD of the per-image component shared by its stimuli
  double noise = 1.0;             ///< SD of per-row noise
  double anchor_pull = 0.5;       ///< anchored score = q + pull·(anchor - q) + jitter
  std::uint64_t seed = 42;
  std::string model_id = "synthetic-vlm";
};

struct ProbeData {
  LayerTensorSet anchored;  ///< images × six baseline anchors
  std::vector<SampleRecord> anchored_manifest;
  LayerTensorSet clean;     ///< one row per image
  std::vector<SampleRecord> clean_manifest;
  std::vector<double> quality;  ///< per image, in [1, 9]
  ScoreTable scores;            ///< clean + anchored rows (+ degraded rows when requested)
};

/// Dimensions 0..5 carry the anchor classes, dimension 6 the quality signal;
/// every row also carries its image's shared component and fresh noise.
/// With include_degraded, blur (2, 5, 10) and JPEG (30, 15, 5) score rows are
/// added with shifts that grow with degradation strength.
ProbeData make_probe_data(const ProbeSpec& spec, bool include_degraded = true);

std::vector<std::string> city_names(std::size_t count);

}  // namespace anchorprobe::synthetic
