#include "anchorprobe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "anchorprobe/error.hpp"
#include "anchorprobe/rng.hpp"

namespace anchorprobe::synthetic {

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

double clamp_score(double s) { return std::clamp(s, 0.0, 10.0); }

std::string two_digits(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return buf;
}

}  // namespace

std::vector<std::string> city_names(std::size_t count) {
  static const char* kNames[] = {"amsterdam", "bangkok", "berlin", "cairo",   "delhi",  "lagos",  "lima",
                                 "london",    "madrid",  "nairobi", "paris",  "seoul",  "sydney", "tokyo"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i < std::size(kNames) ? kNames[i] : "city" + std::to_string(i));
  }
  return out;
}

RgbImage base_image(int width, int height, std::uint64_t seed, const std::string& image_id) {
  if (width < 2 || height < 2) throw DomainError("synthetic image must be at least 2x2");
  auto rng = CounterRng::keyed(seed, "image/" + image_id);
  RgbImage img(width, height);
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = 40 + 170 * rng.uniform01();
    c1[c] = 40 + 170 * rng.uniform01();
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = (static_cast<double>(x) / width + static_cast<double>(y) / height) / 2.0;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_byte(c0[c] + (c1[c] - c0[c]) * t);
    }
  }
  const int shapes = 4 + static_cast<int>(rng.uniform_below(5));
  for (int s = 0; s < shapes; ++s) {
    const int w = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(width / 3 + 1)));
    const int h = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(height / 3 + 1)));
    const int x0 = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(width - std::min(w, width - 1))));
    const int y0 = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(height - std::min(h, height - 1))));
    const std::uint8_t r = to_byte(255 * rng.uniform01()), g = to_byte(255 * rng.uniform01()),
                       b = to_byte(255 * rng.uniform01());
    for (int y = y0; y < std::min(height, y0 + h); ++y) {
      for (int x = x0; x < std::min(width, x0 + w); ++x) img.set(x, y, r, g, b);
    }
  }
  // Fine texture so blur and compression have something to remove.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double n = 24.0 * (rng.uniform01() - 0.5);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_byte(img.at(x, y, c) + n);
    }
  }
  return img;
}

std::vector<std::filesystem::path> write_base_images(const std::filesystem::path& dir,
                                                     const std::vector<std::string>& cities, int per_city,
                                                     int width, int height, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& city : cities) {
    for (int i = 0; i < per_city; ++i) {
      const std::string stem = city + "_" + two_digits(static_cast<std::size_t>(i));
      out.push_back(dir / (stem + ".png"));
      write_png(base_image(width, height, seed, stem), out.back());
    }
  }
  return out;
}

ProbeData make_probe_data(const ProbeSpec& spec, bool include_degraded) {
  if (spec.dim < 7) throw DomainError("synthetic probe data needs dim >= 7");
  if (spec.layers == 0 || spec.cities == 0 || spec.images_per_city == 0) {
    throw DomainError("synthetic probe data needs at least one layer and image");
  }
  const auto cities = city_names(spec.cities);
  const std::size_t n_images = spec.cities * spec.images_per_city;
  const std::size_t n_anchors = std::size(kAnchorValues);

  ProbeData data;
  data.anchored = LayerTensorSet(spec.layers, n_images * n_anchors, spec.dim);
  data.clean = LayerTensorSet(spec.layers, n_images, spec.dim);

  std::vector<std::string> ids;
  std::vector<std::string> image_city;
  auto quality_rng = CounterRng::keyed(spec.seed, "synthetic/quality");
  for (const auto& city : cities) {
    for (std::size_t i = 0; i < spec.images_per_city; ++i) {
      ids.push_back(city + "_" + two_digits(i));
      image_city.push_back(city);
      data.quality.push_back(1.0 + 8.0 * quality_rng.uniform01());
    }
  }

  // Per-image shared component, identical across layers and stimuli.
  std::vector<double> shared(n_images * spec.dim);
  auto shared_rng = CounterRng::keyed(spec.seed, "synthetic/shared");
  for (auto& v : shared) v = spec.image_scale * shared_rng.normal();

  auto noise_rng = CounterRng::keyed(spec.seed, "synthetic/noise");
  for (std::size_t l = 0; l < spec.layers; ++l) {
    const bool anchor_on = l >= spec.anchor_layer;
    const bool quality_on = l >= spec.quality_layer;
    for (std::size_t img = 0; img < n_images; ++img) {
      const double q_term = quality_on ? spec.quality_strength * (data.quality[img] - 5.0) : 0.0;
      for (std::size_t d = 0; d < spec.dim; ++d) {
        double v = shared[img * spec.dim + d] + spec.noise * noise_rng.normal();
        if (d == 6) v += q_term;
        data.clean.at(l, img, d) = static_cast<float>(v);
      }
      for (std::size_t a = 0; a < n_anchors; ++a) {
        const std::size_t row = img * n_anchors + a;
        for (std::size_t d = 0; d < spec.dim; ++d) {
          double v = shared[img * spec.dim + d] + spec.noise * noise_rng.normal();
          if (d == 6) v += q_term;
          if (anchor_on && d == a) v += spec.anchor_margin;
          data.anchored.at(l, row, d) = static_cast<float>(v);
        }
      }
    }
  }

  auto score_rng = CounterRng::keyed(spec.seed, "synthetic/scores");
  for (std::size_t img = 0; img < n_images; ++img) {
    SampleRecord clean;
    clean.image_id = ids[img];
    clean.city = image_city[img];
    clean.condition = Condition::clean;
    clean.model_id = spec.model_id;
    data.clean_manifest.push_back(clean);
    const double q = data.quality[img];
    const double clean_score = clamp_score(std::round((q + 0.3 * score_rng.normal()) * 10.0) / 10.0);
    data.scores.rows.push_back({clean, clean_score, {}});

    for (std::size_t a = 0; a < n_anchors; ++a) {
      SampleRecord r = clean;
      r.condition = Condition::anchor;
      r.anchor_value = kAnchorValues[a];
      r.formulation = Formulation::baseline;
      data.anchored_manifest.push_back(r);
      const double s = q + spec.anchor_pull * (kAnchorValues[a] - q) + 0.3 * score_rng.normal();
      data.scores.rows.push_back({r, clamp_score(std::round(s * 10.0) / 10.0), {}});
    }
    if (include_degraded) {
      for (double sigma : {2.0, 5.0, 10.0}) {
        SampleRecord r = clean;
        r.condition = Condition::blur;
        r.degradation_param = sigma;
        const double s = clean_score - 0.08 * sigma + 0.3 * score_rng.normal();
        data.scores.rows.push_back({r, clamp_score(std::round(s * 10.0) / 10.0), {}});
      }
      for (int quality : {30, 15, 5}) {
        SampleRecord r = clean;
        r.condition = Condition::jpeg;
        r.degradation_param = quality;
        const double s = clean_score - 0.01 * (100 - quality) + 0.3 * score_rng.normal();
        data.scores.rows.push_back({r, clamp_score(std::round(s * 10.0) / 10.0), {}});
      }
    }
  }
  return data;
}

}  // namespace anchorprobe::synthetic
