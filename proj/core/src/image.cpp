#include "anchorprobe/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "anchorprobe/digest.hpp"
#include "anchorprobe/error.hpp"

namespace anchorprobe {

RgbImage::RgbImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {
  if (w <= 0 || h <= 0) throw DomainError("image dimensions must be positive");
}

std::string raster_digest(const RgbImage& image) {
  std::string head = "RGB8 " + std::to_string(image.width) + " " + std::to_string(image.height) + "\n";
  std::vector<std::uint8_t> buf(head.begin(), head.end());
  buf.insert(buf.end(), image.pixels.begin(), image.pixels.end());
  return sha256_hex(buf);
}

// ---------------------------------------------------------------- JPEG

namespace {

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

extern "C" void jpeg_error_exit_longjmp(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Keeps non-trivial C++ objects out of the frame that calls setjmp.
bool encode_jpeg_raw(const RgbImage& image, int quality, unsigned char** out, unsigned long* out_size,
                     char* message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit_longjmp;
  if (setjmp(jerr.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", jerr.message);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, out, out_size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_compress(&cinfo, TRUE);
  const auto stride = static_cast<std::size_t>(image.width) * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPLE*>(image.pixels.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

bool decode_jpeg_raw(const std::uint8_t* data, std::size_t size, RgbImage* image, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit_longjmp;
  if (setjmp(jerr.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", jerr.message);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  image->width = static_cast<int>(cinfo.output_width);
  image->height = static_cast<int>(cinfo.output_height);
  image->pixels.assign(static_cast<std::size_t>(image->width) * image->height * 3, 0);
  const auto stride = static_cast<std::size_t>(image->width) * 3;
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = image->pixels.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality) {
  if (quality < 1 || quality > 100) throw DomainError("JPEG quality must lie in [1, 100]");
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  char message[JMSG_LENGTH_MAX] = {};
  const bool ok = encode_jpeg_raw(image, quality, &buf, &size, message);
  std::vector<std::uint8_t> out;
  if (ok) out.assign(buf, buf + size);
  std::free(buf);
  if (!ok) throw FormatError(std::string("JPEG encode failed: ") + message);
  return out;
}

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  RgbImage image;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg_raw(bytes.data(), bytes.size(), &image, message)) {
    throw FormatError(std::string("JPEG decode failed: ") + message);
  }
  return image;
}

// ---------------------------------------------------------------- PNG

namespace {

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw FormatError(std::string("PNG decode failed: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("PNG decode failed: " + msg);
  }
  return out;
}

}  // namespace

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    throw Error("PNG write failed for " + path.string() + ": " + img.message);
  }
}

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(bytes);
  }
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSig), std::end(kPngSig), bytes.begin())) {
    return decode_png(bytes);
  }
  throw FormatError("unrecognised image format (expected JPEG or PNG)");
}

RgbImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- degradations

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw DomainError("blur sigma must be finite and >= 0");
  if (sigma == 0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& w : k) w /= sum;
  return k;
}

RgbImage apply_gaussian_blur(const RgbImage& image, double sigma) {
  const std::vector<double> kernel = gaussian_kernel(sigma);
  if (kernel.size() == 1) return image;
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width, h = image.height;

  // Horizontal pass kept in double so rounding happens once.
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xx = std::clamp(x + i, 0, w - 1);
          acc += kernel[i + radius] * image.at(xx, y, c);
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
      }
    }
  }
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int yy = std::clamp(y + i, 0, h - 1);
          acc += kernel[i + radius] * tmp[(static_cast<std::size_t>(yy) * w + x) * 3 + c];
        }
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
    }
  }
  return out;
}

RgbImage apply_jpeg_quality(const RgbImage& image, int quality) {
  return decode_jpeg(encode_jpeg(image, quality));
}

}  // namespace anchorprobe
