#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "anchorprobe/error.hpp"
#include "anchorprobe/image.hpp"
#include "anchorprobe/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace anchorprobe;

namespace {

RgbImage scene(int w = 160, int h = 120, const std::string& id = "oslo_01") {
  return synthetic::base_image(w, h, 42, id);
}

}  // namespace

TEST(GaussianKernel, NormalisedWithExpectedRadius) {
  for (double sigma : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const auto k = gaussian_kernel(sigma);
    EXPECT_EQ(k.size(), 2 * static_cast<std::size_t>(std::ceil(3 * sigma)) + 1);
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(k.front(), k.back());
  }
  EXPECT_EQ(gaussian_kernel(0.0), std::vector<double>{1.0});
}

TEST(GaussianBlur, SigmaZeroIsIdentityNegativeThrows) {
  const auto img = scene();
  EXPECT_EQ(apply_gaussian_blur(img, 0.0), img);
  EXPECT_THROW(apply_gaussian_blur(img, -1.0), DomainError);
}

TEST(GaussianBlur, ConstantImageUnchanged) {
  RgbImage flat(40, 30, 77);
  EXPECT_EQ(apply_gaussian_blur(flat, 3.0), flat);
}

TEST(GaussianBlur, SharpnessStrictlyDecreases) {
  for (const char* id : {"oslo_01", "lima_07", "rome_12"}) {
    const auto img = scene(160, 120, id);
    double prev = oracle::laplacian_variance(img);
    for (double sigma : {2.0, 5.0, 10.0}) {
      const double v = oracle::laplacian_variance(apply_gaussian_blur(img, sigma));
      EXPECT_LT(v, prev) << id << " sigma " << sigma;
      prev = v;
    }
  }
}

TEST(Jpeg, MaxQualityRoundTripIsClose) {
  const auto img = scene();
  const auto out = apply_jpeg_quality(img, 100);
  ASSERT_EQ(out.width, img.width);
  ASSERT_EQ(out.height, img.height);
  double mad = 0;
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    mad += std::fabs(double(img.pixels[i]) - double(out.pixels[i]));
  EXPECT_LT(mad / img.pixels.size(), 2.0);
}

TEST(Jpeg, MseGrowsAsQualityDrops) {
  for (const char* id : {"oslo_01", "lima_07"}) {
    const auto img = scene(160, 120, id);
    double prev = 0;
    for (int q : {30, 15, 5}) {
      const double e = oracle::mse(img, apply_jpeg_quality(img, q));
      EXPECT_GT(e, prev) << id << " q " << q;
      prev = e;
    }
  }
}

TEST(Jpeg, QualityRange) {
  const auto img = scene(32, 32);
  EXPECT_THROW(apply_jpeg_quality(img, 0), DomainError);
  EXPECT_THROW(apply_jpeg_quality(img, 101), DomainError);
}

TEST(ImageIo, PngRoundTripAndSniffing) {
  fixture::TempDir dir;
  const auto img = scene(33, 17);
  write_png(img, dir / "a.png");
  EXPECT_EQ(read_image(dir / "a.png"), img);
  const auto jpg = encode_jpeg(img, 90);
  const auto back = decode_image(jpg);
  EXPECT_EQ(back.width, 33);
  std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
  EXPECT_THROW(decode_image(junk), FormatError);
}

TEST(ImageIo, RasterDigestTracksPixels) {
  auto img = scene(20, 20);
  const auto d0 = raster_digest(img);
  EXPECT_EQ(d0.size(), 64u);
  EXPECT_EQ(raster_digest(img), d0);
  img.at(3, 4, 1) ^= 1;
  EXPECT_NE(raster_digest(img), d0);
}

TEST(SyntheticImage, DeterministicAndNotConstant) {
  const auto a = scene(), b = scene();
  EXPECT_EQ(a, b);
  EXPECT_NE(scene(160, 120, "lima_02"), a);
  EXPECT_GT(oracle::laplacian_variance(a), 1.0);
}
