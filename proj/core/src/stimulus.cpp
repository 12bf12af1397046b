#include "anchorprobe/stimulus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "anchorprobe/error.hpp"
#include "anchorprobe/font.hpp"
#include "anchorprobe/parallel.hpp"
#include "anchorprobe/rng.hpp"

namespace anchorprobe {

namespace fs = std::filesystem;

void AnchorSpec::validate() const {
  if (!is_valid_anchor(value)) {
    throw DomainError("anchor value " + std::to_string(value) + " is not in {0,2,4,6,8,10}");
  }
}

std::string overlay_text(const AnchorSpec& anchor) {
  anchor.validate();
  const std::string x = std::to_string(anchor.value);
  switch (anchor.formulation) {
    case Formulation::baseline: return "Rate this image as " + x + "/10";
    case Formulation::mismatch: return "Score: " + x + "/10";
    case Formulation::social: return "Another person rated this " + x + "/10";
    case Formulation::abstract: return x + "/10";
  }
  return x + "/10";
}

BoxSize overlay_box(const std::string& text, int text_height, int padding) {
  if (padding < 0) throw DomainError("padding must be non-negative");
  const auto extent = font::measure(text, text_height);
  return {extent.width + 2 * padding, extent.height + 2 * padding};
}

OverlayPlacement plan_placement(std::uint64_t seed, const std::string& image_id, int image_w,
                                int image_h, int box_w, int box_h, int text_height, int padding) {
  if (box_w <= 0 || box_h <= 0) throw DomainError("overlay box must be non-empty");
  if (box_w > image_w || box_h > image_h) {
    throw PlacementInfeasible("overlay box " + std::to_string(box_w) + "x" + std::to_string(box_h) +
                              " does not fit image " + std::to_string(image_w) + "x" +
                              std::to_string(image_h) + " (" + image_id + ")");
  }
  CounterRng rng = CounterRng::keyed(seed, image_id);
  OverlayPlacement p;
  p.x = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(image_w - box_w) + 1));
  p.y = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(image_h - box_h) + 1));
  p.text_height = text_height;
  p.padding = padding;
  p.seed = seed;
  return p;
}

RgbImage render_overlay(const RgbImage& image, const AnchorSpec& anchor,
                        const OverlayPlacement& placement) {
  const std::string text = overlay_text(anchor);
  const BoxSize box = overlay_box(text, placement.text_height, placement.padding);
  if (placement.x < 0 || placement.y < 0 || placement.x + box.width > image.width ||
      placement.y + box.height > image.height) {
    throw PlacementInfeasible("overlay box at (" + std::to_string(placement.x) + "," +
                              std::to_string(placement.y) + ") leaves the image");
  }
  RgbImage out = image;
  for (int by = 0; by < box.height; ++by) {
    for (int bx = 0; bx < box.width; ++bx) {
      const bool ink = font::ink_at(text, placement.text_height, bx - placement.padding,
                                    by - placement.padding);
      const std::uint8_t v = ink ? 0 : 255;
      out.set(placement.x + bx, placement.y + by, v, v, v);
    }
  }
  return out;
}

void DegradationSpec::validate() const {
  switch (kind) {
    case DegradationKind::none: break;
    case DegradationKind::gaussian_blur:
      if (!(sigma > 0) || !std::isfinite(sigma)) throw DomainError("blur degradation needs sigma > 0");
      break;
    case DegradationKind::jpeg_quality:
      if (quality < 1 || quality > 100) throw DomainError("JPEG degradation needs quality in [1, 100]");
      break;
  }
}

RgbImage apply_degradation(const RgbImage& image, const DegradationSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DegradationKind::none: return image;
    case DegradationKind::gaussian_blur: return apply_gaussian_blur(image, spec.sigma);
    case DegradationKind::jpeg_quality: return apply_jpeg_quality(image, spec.quality);
  }
  return image;
}

namespace {

std::string compact_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string degradation_tag(const DegradationSpec& d) {
  switch (d.kind) {
    case DegradationKind::none: return "clean";
    case DegradationKind::gaussian_blur: return "blur" + compact_number(d.sigma);
    case DegradationKind::jpeg_quality: return "jpeg" + std::to_string(d.quality);
  }
  return "clean";
}

std::string_view kind_name(DegradationKind k) {
  switch (k) {
    case DegradationKind::none: return "none";
    case DegradationKind::gaussian_blur: return "gaussian_blur";
    case DegradationKind::jpeg_quality: return "jpeg_quality";
  }
  return "none";
}

DegradationKind parse_kind(const std::string& s) {
  if (s == "none") return DegradationKind::none;
  if (s == "gaussian_blur") return DegradationKind::gaussian_blur;
  if (s == "jpeg_quality") return DegradationKind::jpeg_quality;
  throw FormatError("unknown degradation kind '" + s + "'");
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

}  // namespace

void StimulusManifest::validate() const {
  std::set<std::string> ids;
  std::set<std::string> cells;
  for (const auto& e : entries) {
    if (!ids.insert(e.stimulus_id).second) throw ValidationError("duplicate stimulus id " + e.stimulus_id);
    std::string cell = e.base_image_id + "|" + degradation_tag(e.degradation);
    if (e.anchor) {
      cell += "|" + std::to_string(e.anchor->value) + "|" + std::string(to_string(e.anchor->formulation));
    }
    if (!cells.insert(cell).second) throw ValidationError("duplicate stimulus grid cell " + cell);
  }
}

Json to_json(const StimulusManifest& m) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = m.seed;
  j["text_height"] = m.text_height;
  j["padding"] = m.padding;
  j["digest_algorithm"] = "sha256-raster";
  Json entries = Json::array();
  for (const auto& e : m.entries) {
    Json je;
    je["stimulus_id"] = e.stimulus_id;
    je["base_image_id"] = e.base_image_id;
    je["city"] = e.city;
    if (e.anchor) {
      je["anchor"] = {{"value", e.anchor->value}, {"formulation", to_string(e.anchor->formulation)}};
    } else {
      je["anchor"] = nullptr;
    }
    if (e.placement) {
      je["placement"] = {{"x", e.placement->x},
                         {"y", e.placement->y},
                         {"text_height", e.placement->text_height},
                         {"padding", e.placement->padding},
                         {"seed", e.placement->seed}};
    } else {
      je["placement"] = nullptr;
    }
    Json jd = {{"kind", kind_name(e.degradation.kind)}};
    if (e.degradation.kind == DegradationKind::gaussian_blur) jd["sigma"] = e.degradation.sigma;
    if (e.degradation.kind == DegradationKind::jpeg_quality) jd["quality"] = e.degradation.quality;
    je["degradation"] = jd;
    je["path"] = e.path;
    je["digest"] = e.digest;
    je["error"] = e.error ? Json(*e.error) : Json(nullptr);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  j["skipped"] = m.skipped;
  return j;
}

StimulusManifest stimulus_manifest_from_json(const Json& j) {
  try {
    StimulusManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.text_height = j.value("text_height", kDefaultTextHeight);
    m.padding = j.value("padding", kDefaultPadding);
    for (const auto& je : j.at("entries")) {
      StimulusEntry e;
      e.stimulus_id = je.at("stimulus_id").get<std::string>();
      e.base_image_id = je.at("base_image_id").get<std::string>();
      e.city = je.at("city").get<std::string>();
      if (!je.at("anchor").is_null()) {
        e.anchor = AnchorSpec{je["anchor"].at("value").get<int>(),
                              parse_formulation(je["anchor"].at("formulation").get<std::string>())};
      }
      if (!je.at("placement").is_null()) {
        const auto& jp = je["placement"];
        e.placement = OverlayPlacement{jp.at("x").get<int>(), jp.at("y").get<int>(),
                                       jp.at("text_height").get<int>(), jp.at("padding").get<int>(),
                                       jp.at("seed").get<std::uint64_t>()};
      }
      const auto& jd = je.at("degradation");
      e.degradation.kind = parse_kind(jd.at("kind").get<std::string>());
      e.degradation.sigma = jd.value("sigma", 0.0);
      e.degradation.quality = jd.value("quality", 0);
      e.path = je.at("path").get<std::string>();
      e.digest = je.at("digest").get<std::string>();
      if (je.contains("error") && !je["error"].is_null()) e.error = je["error"].get<std::string>();
      m.entries.push_back(std::move(e));
    }
    if (j.contains("skipped")) m.skipped = j["skipped"].get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed stimulus manifest: ") + e.what());
  }
}

std::optional<ParsedName> parse_image_name(const fs::path& file) {
  const std::string stem = file.stem().string();
  const auto cut = stem.rfind('_');
  if (cut == std::string::npos || cut == 0 || cut + 1 >= stem.size()) return std::nullopt;
  return ParsedName{stem.substr(0, cut), stem};
}

StimulusManifest forge(const ForgeOptions& opt) {
  for (const auto& a : opt.anchors) a.validate();
  for (const auto& d : opt.degradations) {
    d.validate();
    if (d.kind == DegradationKind::none) throw DomainError("'none' is implied; do not request it");
  }
  if (!fs::is_directory(opt.images_dir)) {
    throw DomainError("image directory does not exist: " + opt.images_dir.string());
  }

  StimulusManifest manifest;
  manifest.seed = opt.seed;
  manifest.text_height = opt.text_height;
  manifest.padding = opt.padding;

  struct Source {
    fs::path file;
    ParsedName name;
  };
  std::vector<Source> sources;
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(opt.images_dir)) {
    if (de.is_regular_file() && has_image_extension(de.path())) files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    if (auto parsed = parse_image_name(f)) {
      sources.push_back({f, *parsed});
    } else {
      manifest.skipped.push_back(f.filename().string());
    }
  }
  if (sources.empty()) throw DomainError("no usable images in " + opt.images_dir.string());

  // Shared box: the widest requested overlay, so every anchor of an image sits
  // at the same position.
  BoxSize shared_box{0, 0};
  for (const auto& a : opt.anchors) {
    const BoxSize b = overlay_box(overlay_text(a), opt.text_height, opt.padding);
    shared_box.width = std::max(shared_box.width, b.width);
    shared_box.height = std::max(shared_box.height, b.height);
  }

  const fs::path stimuli_dir = opt.out_dir / "stimuli";
  fs::create_directories(stimuli_dir);

  std::vector<std::vector<StimulusEntry>> per_image(sources.size());
  parallel_for(sources.size(), opt.threads, [&](std::size_t i) {
    const Source& src = sources[i];
    std::vector<StimulusEntry>& out = per_image[i];

    auto make_entry = [&](const std::string& tag) {
      StimulusEntry e;
      e.stimulus_id = src.name.image_id + "__" + tag;
      e.base_image_id = src.name.image_id;
      e.city = src.name.city;
      e.path = (fs::path("stimuli") / (e.stimulus_id + ".png")).generic_string();
      return e;
    };
    std::vector<StimulusEntry> planned;
    planned.push_back(make_entry("clean"));
    for (const auto& a : opt.anchors) {
      auto e = make_entry("a" + std::to_string(a.value) + "_" + std::string(to_string(a.formulation)));
      e.anchor = a;
      planned.push_back(std::move(e));
    }
    for (const auto& d : opt.degradations) {
      auto e = make_entry(degradation_tag(d));
      e.degradation = d;
      planned.push_back(std::move(e));
    }

    RgbImage base;
    std::optional<OverlayPlacement> placement;
    try {
      base = read_image(src.file);
      if (!opt.anchors.empty()) {
        placement = plan_placement(opt.seed, src.name.image_id, base.width, base.height,
                                   shared_box.width, shared_box.height, opt.text_height, opt.padding);
      }
    } catch (const Error& err) {
      for (auto& e : planned) {
        e.error = err.what();
        if (e.anchor) e.placement.reset();
      }
      out = std::move(planned);
      return;
    }

    for (auto& e : planned) {
      try {
        RgbImage rendered;
        if (e.anchor) {
          e.placement = placement;
          rendered = render_overlay(base, *e.anchor, *placement);
        } else {
          rendered = apply_degradation(base, e.degradation);
        }
        write_png(rendered, opt.out_dir / e.path);
        e.digest = raster_digest(rendered);
      } catch (const Error& err) {
        e.error = err.what();
      }
    }
    out = std::move(planned);
  });

  for (auto& v : per_image) {
    for (auto& e : v) manifest.entries.push_back(std::move(e));
  }
  manifest.validate();
  write_json_file(opt.out_dir / "manifest.json", to_json(manifest));
  return manifest;
}

}  // namespace anchorprobe
