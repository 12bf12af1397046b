#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anchorprobe/tensor_store.hpp"

namespace anchorprobe {

enum class FusionPattern { instant_fusion, gradual, near_fusion_divergence, drop_recovery, other };
std::string_view to_string(FusionPattern p);

struct FusionPoint {
  std::size_t layer = 0;
  double mean = 0.0;  ///< mean cosine over pairs
  double sd = 0.0;
  std::size_t pairs = 0;
  std::size_t zero_norm_excluded = 0;
  bool flagged = false;  ///< no pair had two nonzero vectors
};

struct LayerValue {
  std::size_t layer = 0;
  double value = 0.0;
};

struct FusionThresholds {
  double fusion = 0.95;
  double drop = 0.3;
  double divergence_margin = 0.05;
  double jitter = 0.02;
  std::size_t early_layers = 3;
  std::size_t instant_max_layer = 2;
};

struct FusionCurve {
  std::vector<FusionPoint> per_layer;
  std::optional<std::size_t> fusion_layer;
  LayerValue peak;
  LayerValue max_drop;
  FusionPattern pattern = FusionPattern::other;
  std::size_t unpaired = 0;
  std::vector<std::string> warnings;

  std::vector<double> values() const;
};

struct PairingOptions {
  std::optional<int> anchor;  ///< restrict the anchored side to one anchor value
};

/// Per-layer mean/SD of cosine(anchored_i, clean(image_i)) over anchored rows.
/// Clean rows are matched on (image_id, model_id, prompt_mode); unmatched
/// anchored rows are counted in `unpaired`. Zero-norm vectors are excluded
/// per layer. Only per_layer, unpaired and warnings are filled.
FusionCurve similarity_curve(const LayerTensorSet& anchored, std::span<const SampleRecord> anchored_manifest,
                             const LayerTensorSet& clean, std::span<const SampleRecord> clean_manifest,
                             const PairingOptions& pairing = {});

/// Fills fusion_layer, peak, max_drop and pattern from per_layer.
void analyze_curve(FusionCurve& curve, const FusionThresholds& thresholds = {});

/// A curve built directly from mean cosine values (sd 0), then analyzed.
FusionCurve curve_from_values(std::span<const double> values, const FusionThresholds& thresholds = {});

std::optional<std::size_t> find_fusion_layer(std::span<const double> values, double threshold = 0.95);

/// Layer l maximising values[l-1] - values[l]; requires >= 2 values.
LayerValue max_consecutive_drop(std::span<const double> values);

/// Rule cascade, first match wins:
///   drop_recovery          some consecutive decrease >= drop
///   instant_fusion         fusion layer <= instant_max_layer
///   near_fusion_divergence no fusion, peak within the first early_layers,
///                          final <= peak - divergence_margin
///   gradual                no fusion, non-decreasing up to jitter, peak in
///                          the last quarter of layers
///   other                  anything else, including curves under 4 layers
FusionPattern classify_pattern(std::span<const double> values, const FusionThresholds& thresholds = {});

}  // namespace anchorprobe
