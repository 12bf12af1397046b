#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anchorprobe/folds.hpp"
#include "anchorprobe/probe.hpp"
#include "anchorprobe/stats.hpp"
#include "anchorprobe/tensor_store.hpp"

namespace anchorprobe {

enum class SweepMetric { accuracy, r_squared };
std::string_view to_string(SweepMetric m);

struct LayerPoint {
  std::size_t layer = 0;
  double value = 0.0;  ///< pooled held-out accuracy, or mean fold R²
  double ci_lo = 0.0;  ///< accuracy: bootstrap 95% CI
  double ci_hi = 0.0;
  double sd = 0.0;     ///< R²: SD across folds
  std::vector<double> fold_values;  ///< per-fold accuracy or R², skipped folds omitted
  std::vector<int> fold_ids;        ///< fold index of each fold_values entry
  std::vector<std::vector<long>> confusion;  ///< accuracy only: [true][predicted]
  std::optional<double> adjacent_confusion;  ///< accuracy only
};

struct LayerSweepResult {
  SweepMetric metric = SweepMetric::accuracy;
  std::vector<LayerPoint> per_layer;
  double threshold = 0.95;
  std::optional<std::size_t> breakthrough;
  std::optional<std::size_t> saturation;
  std::size_t optimal = 0;
  std::vector<std::string> warnings;
  std::vector<bool> converged;  ///< accuracy only: every fold's optimizer converged, per layer

  std::vector<double> values() const;
};

struct SweepOptions {
  double l2 = 1.0;         ///< softmax penalty
  double lambda = 1.0;     ///< ridge penalty
  double threshold = -1;   ///< breakthrough; < 0 = metric default (0.95 accuracy, 0.5 R²)
  double saturation_epsilon = 0.001;
  int bootstrap_resamples = 1000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  SoftmaxOptions softmax;
};

/// Per-layer k-fold anchor classification. `labels` are class indices aligned
/// with the tensor rows; `manifest` supplies the image ids used for splitting.
/// A fold whose training split lacks a class present overall is skipped with
/// a warning.
LayerSweepResult classification_sweep(const LayerTensorSet& tensors,
                                      std::span<const SampleRecord> manifest,
                                      std::span<const int> labels, const FoldAssignment& folds,
                                      const SweepOptions& options = {});

/// Per-layer k-fold ridge regression; value = mean held-out R² over folds.
LayerSweepResult regression_sweep(const LayerTensorSet& tensors,
                                  std::span<const SampleRecord> manifest,
                                  std::span<const double> targets, const FoldAssignment& folds,
                                  const SweepOptions& options = {});

/// Smallest index with value >= threshold.
std::optional<std::size_t> detect_breakthrough(std::span<const double> series, double threshold);

/// Smallest index l with series[l'] >= max - epsilon for every l' >= l.
/// Throws DomainError on an empty series.
std::optional<std::size_t> detect_saturation(std::span<const double> series, double epsilon = 0.001);

/// Fraction of off-diagonal mass whose predicted class is ordinally adjacent
/// to the true class (classes are assumed listed in ordinal order). nullopt
/// when there are no errors.
std::optional<double> adjacent_confusion_rate(const std::vector<std::vector<long>>& confusion);

struct LayerComparison {
  std::size_t layer_a = 0;
  std::size_t layer_b = 0;
  double mean_diff = 0.0;  ///< mean(a) - mean(b) over folds
  stats::RankTestResult test;
  std::optional<double> cohens_d;  ///< absent when both layers are constant across folds
  std::string method = "paired per-fold wilcoxon signed-rank + cohen's d";
};

/// Paired per-fold comparison of two layers of the same sweep. nullopt when
/// the layers share no folds or every per-fold difference is zero.
std::optional<LayerComparison> compare_layers(const LayerSweepResult& sweep, std::size_t layer_a,
                                              std::size_t layer_b);

/// Anchor class index (anchor_value / 2) for each anchored row; throws
/// ValidationError for a row without an anchor.
std::vector<int> anchor_labels(std::span<const SampleRecord> manifest);

}  // namespace anchorprobe
