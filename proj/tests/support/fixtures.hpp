#pragma once

#include <algorithm>
#include <atomic>
#include <optional>
#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "anchorprobe/score_table.hpp"
#include "anchorprobe/sweep.hpp"

namespace fixture {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("anchorprobe_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------- fusion curves
// Per-layer mean cosine series rebuilt around the published layer values.

/// 34 layers: 0.983 at L1, peak 0.999 at L15.
inline std::vector<double> gemma3_curve() {
  std::vector<double> v(34);
  v[0] = 0.912;
  for (int l = 1; l <= 15; ++l) v[l] = 0.983 + (0.999 - 0.983) * (l - 1) / 14.0;
  for (int l = 16; l < 34; ++l) v[l] = 0.997 - 0.0005 * (l - 16);
  return v;
}

/// 42 layers: first at or above 0.95 at L2 (0.994), sustained.
inline std::vector<double> gemma4_curve() {
  std::vector<double> v(42, 0.0);
  v[0] = 0.871;
  v[1] = 0.932;
  v[2] = 0.994;
  for (int l = 3; l < 42; ++l) v[l] = 0.990 - 0.0002 * (l - 3);
  return v;
}

/// 32 layers: monotone from -0.14 at L0 to 0.939 at L31.
inline std::vector<double> minicpm_curve() {
  std::vector<double> v(32);
  for (int l = 0; l < 32; ++l) {
    const double t = l / 31.0;
    v[l] = -0.14 + (0.939 + 0.14) * std::sqrt(t);
  }
  return v;
}

/// 32 layers: peak 0.933 at L1, then a steady decline.
inline std::vector<double> qwen35_curve() {
  std::vector<double> v(32);
  v[0] = 0.904;
  v[1] = 0.933;
  for (int l = 2; l < 32; ++l) v[l] = 0.933 - 0.011 * (l - 1);
  return v;
}

/// 36 layers: rises to 0.87 at L6, collapses to 0.099 at L7, recovers to
/// 0.851 at L35.
inline std::vector<double> qwen3vl_curve() {
  std::vector<double> v(36);
  for (int l = 0; l <= 6; ++l) v[l] = 0.62 + (0.87 - 0.62) * l / 6.0;
  v[7] = 0.099;
  for (int l = 8; l < 36; ++l) v[l] = 0.099 + (0.851 - 0.099) * (l - 7) / 28.0;
  return v;
}

// ---------------------------------------------------------------- sweeps

inline anchorprobe::LayerSweepResult sweep_from_series(anchorprobe::SweepMetric metric,
                                                       const std::vector<double>& values,
                                                       double threshold) {
  anchorprobe::LayerSweepResult r;
  r.metric = metric;
  r.threshold = threshold;
  for (std::size_t l = 0; l < values.size(); ++l) {
    anchorprobe::LayerPoint p;
    p.layer = l;
    p.value = p.ci_lo = p.ci_hi = values[l];
    r.per_layer.push_back(p);
  }
  r.breakthrough = anchorprobe::detect_breakthrough(values, threshold);
  r.saturation = anchorprobe::detect_saturation(values);
  r.optimal = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  return r;
}

// ---------------------------------------------------------------- score tables

inline anchorprobe::ScoreRow score_row(const std::string& image, anchorprobe::Condition cond,
                                       std::optional<int> anchor, double score,
                                       const std::string& model = "m",
                                       anchorprobe::PromptMode mode = anchorprobe::PromptMode::simple,
                                       anchorprobe::Formulation f = anchorprobe::Formulation::baseline,
                                       std::optional<double> param = std::nullopt) {
  anchorprobe::ScoreRow row;
  row.record.image_id = image;
  row.record.city = "city";
  row.record.condition = cond;
  row.record.model_id = model;
  row.record.prompt_mode = mode;
  if (cond == anchorprobe::Condition::anchor) {
    row.record.anchor_value = anchor;
    row.record.formulation = f;
  }
  row.record.degradation_param = param;
  row.score = score;
  return row;
}

}  // namespace fixture
