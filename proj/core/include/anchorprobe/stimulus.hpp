#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anchorprobe/image.hpp"
#include "anchorprobe/json_io.hpp"
#include "anchorprobe/types.hpp"

namespace anchorprobe {

struct AnchorSpec {
  int value = 0;  ///< one of 0, 2, 4, 6, 8, 10
  Formulation formulation = Formulation::baseline;

  void validate() const;
  bool operator==(const AnchorSpec&) const = default;
};

/// Overlay text for an anchor:
///   baseline "Rate this image as X/10", mismatch "Score: X/10",
///   social "Another person rated this X/10", abstract "X/10".
std::string overlay_text(const AnchorSpec& anchor);

inline constexpr int kDefaultTextHeight = 100;
inline constexpr int kDefaultPadding = 20;
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Top-left corner of the white overlay box plus the text geometry used.
struct OverlayPlacement {
  int x = 0;
  int y = 0;
  int text_height = kDefaultTextHeight;
  int padding = kDefaultPadding;
  std::uint64_t seed = kDefaultSeed;

  bool operator==(const OverlayPlacement&) const = default;
};

/// Uniform top-left position for a box_w × box_h box inside the image, drawn
/// from CounterRng::keyed(seed, image_id): x from draw 0 onward, then y.
/// Throws PlacementInfeasible when the box does not fit.
OverlayPlacement plan_placement(std::uint64_t seed, const std::string& image_id, int image_w,
                                int image_h, int box_w, int box_h,
                                int text_height = kDefaultTextHeight,
                                int padding = kDefaultPadding);

/// White box (text extent + padding on each side) with black glyphs; pixels
/// outside the box are copied unchanged.
RgbImage render_overlay(const RgbImage& image, const AnchorSpec& anchor,
                        const OverlayPlacement& placement);

/// Overlay box size for `text` at the given geometry.
struct BoxSize {
  int width = 0;
  int height = 0;
};
BoxSize overlay_box(const std::string& text, int text_height, int padding);

enum class DegradationKind { none, gaussian_blur, jpeg_quality };

struct DegradationSpec {
  DegradationKind kind = DegradationKind::none;
  double sigma = 0.0;  ///< gaussian_blur only
  int quality = 0;     ///< jpeg_quality only

  static DegradationSpec none() { return {}; }
  static DegradationSpec blur(double sigma) { return {DegradationKind::gaussian_blur, sigma, 0}; }
  static DegradationSpec jpeg(int quality) { return {DegradationKind::jpeg_quality, 0.0, quality}; }

  void validate() const;
  bool operator==(const DegradationSpec&) const = default;
};

RgbImage apply_degradation(const RgbImage& image, const DegradationSpec& spec);

struct StimulusEntry {
  std::string stimulus_id;
  std::string base_image_id;
  std::string city;
  std::optional<AnchorSpec> anchor;  ///< empty for clean and degraded stimuli
  std::optional<OverlayPlacement> placement;
  DegradationSpec degradation;
  std::string path;    ///< relative to the forge output directory
  std::string digest;  ///< raster_digest of the rendered stimulus
  std::optional<std::string> error;
};

struct StimulusManifest {
  std::uint64_t seed = kDefaultSeed;
  int text_height = kDefaultTextHeight;
  int padding = kDefaultPadding;
  std::vector<StimulusEntry> entries;
  std::vector<std::string> skipped;  ///< files whose names do not parse as <city>_<id>

  /// Throws ValidationError on duplicate ids or duplicate grid cells.
  void validate() const;
};

Json to_json(const StimulusManifest& manifest);
StimulusManifest stimulus_manifest_from_json(const Json& j);

struct ForgeOptions {
  std::filesystem::path images_dir;
  std::filesystem::path out_dir;
  std::vector<AnchorSpec> anchors;
  std::vector<DegradationSpec> degradations;
  std::uint64_t seed = kDefaultSeed;
  int text_height = kDefaultTextHeight;
  int padding = kDefaultPadding;
  unsigned threads = 1;
};

/// Splits "<city>_<imageid>" at the last underscore. Returns nullopt when the
/// stem has no underscore or an empty part.
struct ParsedName {
  std::string city;
  std::string image_id;  ///< the full stem, unique across cities
};
std::optional<ParsedName> parse_image_name(const std::filesystem::path& file);

/// Renders clean + anchored + degraded stimuli for every image, writes PNGs
/// under out_dir/stimuli and out_dir/manifest.json. All anchors of one image
/// share the placement planned for the widest requested overlay text.
/// Throws DomainError when the directory holds no usable images.
StimulusManifest forge(const ForgeOptions& options);

}  // namespace anchorprobe
