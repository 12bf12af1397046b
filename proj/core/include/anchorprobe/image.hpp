#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace anchorprobe {

/// 8-bit interleaved RGB raster, row-major, no padding.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  bool operator==(const RgbImage&) const = default;
};

/// SHA-256 over "RGB8 <w> <h>\n" followed by the raw pixel bytes. Independent
/// of the container encoder, so stable across libpng/zlib versions.
std::string raster_digest(const RgbImage& image);

/// Decodes JPEG or PNG (sniffed from the leading bytes). Grey and alpha
/// inputs are converted to RGB. Throws FormatError on undecodable data.
RgbImage read_image(const std::filesystem::path& path);
RgbImage decode_image(std::span<const std::uint8_t> bytes);

void write_png(const RgbImage& image, const std::filesystem::path& path);

/// Baseline JPEG via libjpeg with IJG quality scaling, 4:2:0 chroma subsampling.
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality);
RgbImage decode_jpeg(std::span<const std::uint8_t> bytes);

/// Normalised 1-D Gaussian kernel of radius ceil(3·sigma); {1} for sigma = 0.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur per channel, clamp-to-edge, rounded to nearest.
/// sigma = 0 returns the input unchanged; negative sigma throws DomainError.
RgbImage apply_gaussian_blur(const RgbImage& image, double sigma);

/// JPEG encode at `quality` (1..100) and decode back. Throws DomainError
/// outside that range.
RgbImage apply_jpeg_quality(const RgbImage& image, int quality);

}  // namespace anchorprobe
