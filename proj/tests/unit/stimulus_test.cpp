#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "anchorprobe/digest.hpp"
#include "anchorprobe/distributions.hpp"
#include "anchorprobe/error.hpp"
#include "anchorprobe/font.hpp"
#include "anchorprobe/stimulus.hpp"
#include "anchorprobe/synthetic.hpp"
#include "fixtures.hpp"

using namespace anchorprobe;
namespace fs = std::filesystem;

TEST(OverlayText, Templates) {
  EXPECT_EQ(overlay_text({6, Formulation::baseline}), "Rate this image as 6/10");
  EXPECT_EQ(overlay_text({4, Formulation::mismatch}), "Score: 4/10");
  EXPECT_EQ(overlay_text({10, Formulation::social}), "Another person rated this 10/10");
  EXPECT_EQ(overlay_text({0, Formulation::abstract}), "0/10");
  EXPECT_THROW(overlay_text({3, Formulation::baseline}), DomainError);
}

TEST(Font, GlyphsAndMeasure) {
  for (char c : std::string("Rate this image as 0123456789/10 Score: Another person"))
    EXPECT_TRUE(font::has_glyph(c)) << c;
  const auto e = font::measure("ab", 20);
  EXPECT_EQ(e.height, 20);
  EXPECT_GT(e.width, 0);
  EXPECT_EQ(font::measure("abcd", 20).width - font::measure("abc", 20).width,
            font::measure("abc", 20).width - font::measure("ab", 20).width);
}

TEST(RenderOverlay, BoxIsWhiteInkMatchesFontAndOutsideUntouched) {
  const auto base = synthetic::base_image(1600, 300, 1, "oslo_01");
  const AnchorSpec a{6, Formulation::baseline};
  const std::string text = overlay_text(a);
  const auto box = overlay_box(text, kDefaultTextHeight, kDefaultPadding);
  const auto pl = plan_placement(42, "oslo_01", base.width, base.height, box.width, box.height);
  const auto out = render_overlay(base, a, pl);
  EXPECT_EQ(out.at(pl.x, pl.y, 0), 255);
  EXPECT_EQ(out.at(pl.x, pl.y, 2), 255);
  long ink = 0;
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      const bool inside = x >= pl.x && x < pl.x + box.width && y >= pl.y && y < pl.y + box.height;
      if (!inside) {
        for (int c = 0; c < 3; ++c) ASSERT_EQ(out.at(x, y, c), base.at(x, y, c));
      } else {
        const bool glyph = font::ink_at(text, pl.text_height, x - pl.x - pl.padding, y - pl.y - pl.padding);
        ASSERT_EQ(out.at(x, y, 0), glyph ? 0 : 255);
        ink += glyph;
      }
    }
  }
  EXPECT_GT(ink, 1000);
  EXPECT_EQ(raster_digest(render_overlay(base, a, pl)), raster_digest(out));
}

TEST(RenderOverlay, DefaultTextHeightIsOneHundredPixels) {
  const auto box = overlay_box("Rate this image as 10/10", kDefaultTextHeight, kDefaultPadding);
  EXPECT_EQ(box.height, 100 + 2 * 20);
}

TEST(Placement, DeterministicAndInfeasible) {
  const auto a = plan_placement(42, "x_1", 400, 300, 100, 50);
  const auto b = plan_placement(42, "x_1", 400, 300, 100, 50);
  EXPECT_EQ(a, b);
  EXPECT_GE(a.x, 0);
  EXPECT_LE(a.x, 300);
  EXPECT_LE(a.y, 250);
  EXPECT_THROW(plan_placement(42, "x_1", 90, 300, 100, 50), PlacementInfeasible);
  const auto exact = plan_placement(42, "x_1", 100, 50, 100, 50);
  EXPECT_EQ(exact.x, 0);
  EXPECT_EQ(exact.y, 0);
}

TEST(Placement, UniformOverPositions) {
  // 10 x-slots, 4000 image ids: chi-square goodness of fit to uniform.
  std::vector<double> count(10, 0.0);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto p = plan_placement(7, "img_" + std::to_string(i), 19, 5, 10, 5);
    count[p.x] += 1;
  }
  double chi = 0;
  for (double c : count) chi += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  EXPECT_GT(stats::chi_squared_sf(chi, 9), 0.001);
}

TEST(ParseImageName, SplitsAtLastUnderscore) {
  const auto p = parse_image_name("dir/new_york_0042.jpg");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->city, "new_york");
  EXPECT_EQ(p->image_id, "new_york_0042");
  EXPECT_FALSE(parse_image_name("plain.png"));
  EXPECT_FALSE(parse_image_name("_x.png"));
  EXPECT_FALSE(parse_image_name("x_.png"));
}

TEST(Degradation, Validation) {
  EXPECT_THROW(DegradationSpec::blur(0).validate(), DomainError);
  EXPECT_THROW(DegradationSpec::jpeg(0).validate(), DomainError);
  const RgbImage img(8, 8, 10);
  EXPECT_EQ(apply_degradation(img, DegradationSpec::none()), img);
}

namespace {

ForgeOptions small_forge(const fs::path& images, const fs::path& out) {
  ForgeOptions o;
  o.images_dir = images;
  o.out_dir = out;
  for (int v : kAnchorValues) o.anchors.push_back({v, Formulation::baseline});
  o.degradations = {DegradationSpec::blur(2), DegradationSpec::jpeg(30)};
  o.text_height = 10;
  o.padding = 2;
  o.threads = 2;
  return o;
}

}  // namespace

TEST(Forge, GridCompletenessAndDeterminism) {
  fixture::TempDir dir;
  synthetic::write_base_images(dir / "img", {"oslo", "lima"}, 2, 200, 80, 3);
  const auto m1 = forge(small_forge(dir / "img", dir / "out1"));
  const auto m2 = forge(small_forge(dir / "img", dir / "out2"));
  ASSERT_EQ(m1.entries.size(), 4u * (6 + 2 + 1));
  ASSERT_EQ(m1.entries.size(), m2.entries.size());
  for (std::size_t i = 0; i < m1.entries.size(); ++i) {
    EXPECT_FALSE(m1.entries[i].error);
    EXPECT_EQ(m1.entries[i].digest, m2.entries[i].digest);
    EXPECT_TRUE(fs::exists(dir / "out1" / m1.entries[i].path));
  }
  // every anchor of one image shares a placement
  std::map<std::string, OverlayPlacement> where;
  for (const auto& e : m1.entries) {
    if (!e.anchor) continue;
    ASSERT_TRUE(e.placement);
    auto [it, fresh] = where.emplace(e.base_image_id, *e.placement);
    if (!fresh) EXPECT_EQ(it->second, *e.placement);
  }
  const auto reread = stimulus_manifest_from_json(read_json_file(dir / "out1" / "manifest.json"));
  ASSERT_EQ(reread.entries.size(), m1.entries.size());
  EXPECT_EQ(reread.entries[3].digest, m1.entries[3].digest);
  EXPECT_EQ(read_json_file(dir / "out1" / "manifest.json")["schema_version"], 1);
}

TEST(Forge, DegradationOnlyGrid) {
  fixture::TempDir dir;
  synthetic::write_base_images(dir / "img", {"oslo"}, 3, 60, 40, 3);
  auto o = small_forge(dir / "img", dir / "out");
  o.anchors.clear();
  o.degradations = {DegradationSpec::jpeg(15)};
  const auto m = forge(o);
  std::size_t degraded = 0;
  for (const auto& e : m.entries) degraded += e.degradation.kind != DegradationKind::none;
  EXPECT_EQ(degraded, 3u);
  EXPECT_EQ(m.entries.size(), 6u);
}

TEST(Forge, UnreadableImageIsRecordedAndRunContinues) {
  fixture::TempDir dir;
  synthetic::write_base_images(dir / "img", {"oslo"}, 2, 200, 80, 3);
  std::ofstream(dir / "img" / "oslo_99.png") << "not a png";
  std::ofstream(dir / "img" / "README.png") << "skip";
  const auto m = forge(small_forge(dir / "img", dir / "out"));
  std::size_t failed = 0;
  for (const auto& e : m.entries) failed += e.error.has_value();
  EXPECT_EQ(failed, 9u);
  EXPECT_EQ(m.skipped, std::vector<std::string>{"README.png"});
}

TEST(Forge, EmptyDirectoryIsHardError) {
  fixture::TempDir dir;
  fs::create_directories(dir / "img");
  EXPECT_THROW(forge(small_forge(dir / "img", dir / "out")), DomainError);
}
