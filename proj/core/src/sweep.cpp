#include "anchorprobe/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

#include "anchorprobe/error.hpp"
#include "anchorprobe/parallel.hpp"

namespace anchorprobe {

std::string_view to_string(SweepMetric m) { return m == SweepMetric::accuracy ? "accuracy" : "r_squared"; }

std::vector<double> LayerSweepResult::values() const {
  std::vector<double> out;
  out.reserve(per_layer.size());
  for (const auto& p : per_layer) out.push_back(p.value);
  return out;
}

namespace {

Eigen::MatrixXd gather(const Eigen::Map<const RowMatrixF>& layer, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), layer.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = layer.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
  }
  return out;
}

void check_alignment(const LayerTensorSet& tensors, std::span<const SampleRecord> manifest,
                     std::size_t targets) {
  tensors.validate();
  if (manifest.size() != tensors.samples() || targets != tensors.samples()) {
    throw ValidationError("targets (" + std::to_string(targets) + ") and manifest (" +
                          std::to_string(manifest.size()) + ") must align with the " +
                          std::to_string(tensors.samples()) + " tensor rows");
  }
}

void finish(LayerSweepResult& result, const SweepOptions& options) {
  const auto series = result.values();
  if (series.empty()) return;
  result.breakthrough = detect_breakthrough(series, result.threshold);
  result.saturation = detect_saturation(series, options.saturation_epsilon);
  result.optimal = static_cast<std::size_t>(
      std::distance(series.begin(), std::max_element(series.begin(), series.end())));
}

}  // namespace

LayerSweepResult classification_sweep(const LayerTensorSet& tensors,
                                      std::span<const SampleRecord> manifest,
                                      std::span<const int> labels, const FoldAssignment& folds,
                                      const SweepOptions& options) {
  check_alignment(tensors, manifest, labels.size());
  const std::set<int> all_classes(labels.begin(), labels.end());
  if (all_classes.size() < 2) throw DomainError("classification sweep needs at least two classes");
  if (*all_classes.begin() < 0) throw DomainError("class labels must be non-negative");
  const int classes = std::max(options.softmax.classes, *all_classes.rbegin() + 1);

  const auto splits = make_splits(manifest, folds);
  LayerSweepResult result;
  result.metric = SweepMetric::accuracy;
  result.threshold = options.threshold >= 0 ? options.threshold : 0.95;

  // Skip decisions depend only on labels, so they are made once for all layers.
  std::vector<bool> usable(splits.size(), true);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    std::set<int> train_classes;
    for (auto i : splits[f].train) train_classes.insert(labels[i]);
    if (splits[f].test.empty()) {
      usable[f] = false;
      result.warnings.push_back("fold " + std::to_string(splits[f].fold) + " has no test rows; skipped");
    } else if (train_classes != all_classes) {
      usable[f] = false;
      result.warnings.push_back("fold " + std::to_string(splits[f].fold) +
                                " is missing a class in its training split; skipped");
    }
  }

  result.per_layer.resize(tensors.layers());
  result.converged.assign(tensors.layers(), true);
  SoftmaxOptions sm = options.softmax;
  sm.classes = classes;

  parallel_for(tensors.layers(), options.threads, [&](std::size_t l) {
    const auto layer = tensors.layer(l);
    LayerPoint point;
    point.layer = l;
    point.confusion.assign(static_cast<std::size_t>(classes), std::vector<long>(static_cast<std::size_t>(classes), 0));
    std::vector<double> correct;
    bool all_converged = true;
    for (std::size_t f = 0; f < splits.size(); ++f) {
      if (!usable[f]) continue;
      const auto& split = splits[f];
      std::vector<int> y_train;
      y_train.reserve(split.train.size());
      for (auto i : split.train) y_train.push_back(labels[i]);
      const auto model = train_softmax_probe(gather(layer, split.train), y_train, options.l2, sm);
      all_converged = all_converged && model.converged;
      const auto predicted = predict_class(model, gather(layer, split.test));
      std::size_t hits = 0;
      for (std::size_t j = 0; j < split.test.size(); ++j) {
        const int truth = labels[split.test[j]];
        ++point.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted[j])];
        const bool ok = truth == predicted[j];
        hits += ok ? 1 : 0;
        correct.push_back(ok ? 1.0 : 0.0);
      }
      point.fold_values.push_back(static_cast<double>(hits) / static_cast<double>(split.test.size()));
      point.fold_ids.push_back(split.fold);
    }
    if (!correct.empty()) {
      point.value = stats::mean(correct);
      const auto ci = stats::bootstrap_ci(correct, [](std::span<const double> xs) { return stats::mean(xs); },
                                          options.bootstrap_resamples, 0.05, options.seed + l);
      point.ci_lo = std::min(ci.lo, point.value);
      point.ci_hi = std::max(ci.hi, point.value);
    }
    if (point.fold_values.size() >= 2) point.sd = stats::stddev(point.fold_values);
    point.adjacent_confusion = adjacent_confusion_rate(point.confusion);
    result.per_layer[l] = std::move(point);
    result.converged[l] = all_converged;
  });

  for (std::size_t l = 0; l < result.converged.size(); ++l) {
    if (!result.converged[l]) {
      result.warnings.push_back("layer " + std::to_string(l) + ": softmax optimizer stopped before reaching the gradient tolerance in at least one fold");
    }
  }
  finish(result, options);
  return result;
}

LayerSweepResult regression_sweep(const LayerTensorSet& tensors,
                                  std::span<const SampleRecord> manifest,
                                  std::span<const double> targets, const FoldAssignment& folds,
                                  const SweepOptions& options) {
  check_alignment(tensors, manifest, targets.size());
  const auto splits = make_splits(manifest, folds);
  LayerSweepResult result;
  result.metric = SweepMetric::r_squared;
  result.threshold = options.threshold >= 0 ? options.threshold : 0.5;

  std::vector<bool> usable(splits.size(), true);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    if (splits[f].test.size() < 2 || splits[f].train.size() < 2) {
      usable[f] = false;
      result.warnings.push_back("fold " + std::to_string(splits[f].fold) + " has too few rows; skipped");
    }
  }

  result.per_layer.resize(tensors.layers());
  parallel_for(tensors.layers(), options.threads, [&](std::size_t l) {
    const auto layer = tensors.layer(l);
    LayerPoint point;
    point.layer = l;
    for (std::size_t f = 0; f < splits.size(); ++f) {
      if (!usable[f]) continue;
      const auto& split = splits[f];
      std::vector<double> y_train, y_test;
      for (auto i : split.train) y_train.push_back(targets[i]);
      for (auto i : split.test) y_test.push_back(targets[i]);
      const auto model = train_ridge(gather(layer, split.train), y_train, options.lambda);
      point.fold_values.push_back(r_squared(y_test, predict(model, gather(layer, split.test))));
      point.fold_ids.push_back(split.fold);
    }
    if (!point.fold_values.empty()) point.value = stats::mean(point.fold_values);
    if (point.fold_values.size() >= 2) point.sd = stats::stddev(point.fold_values);
    point.ci_lo = point.value - point.sd;
    point.ci_hi = point.value + point.sd;
    result.per_layer[l] = std::move(point);
  });
  finish(result, options);
  return result;
}

std::optional<std::size_t> detect_breakthrough(std::span<const double> series, double threshold) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] >= threshold) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> detect_saturation(std::span<const double> series, double epsilon) {
  if (series.empty()) throw DomainError("detect_saturation: empty series");
  const double floor = *std::max_element(series.begin(), series.end()) - epsilon;
  std::size_t start = series.size();
  while (start > 0 && series[start - 1] >= floor) --start;
  if (start == series.size()) return std::nullopt;  // only when max is NaN
  return start;
}

std::optional<double> adjacent_confusion_rate(const std::vector<std::vector<long>>& confusion) {
  long errors = 0, adjacent = 0;
  for (std::size_t t = 0; t < confusion.size(); ++t) {
    for (std::size_t p = 0; p < confusion[t].size(); ++p) {
      if (t == p) continue;
      errors += confusion[t][p];
      if (t + 1 == p || p + 1 == t) adjacent += confusion[t][p];
    }
  }
  if (errors == 0) return std::nullopt;
  return static_cast<double>(adjacent) / static_cast<double>(errors);
}

std::optional<LayerComparison> compare_layers(const LayerSweepResult& sweep, std::size_t layer_a,
                                              std::size_t layer_b) {
  if (layer_a >= sweep.per_layer.size() || layer_b >= sweep.per_layer.size()) {
    throw DomainError("compare_layers: layer out of range");
  }
  const auto& a = sweep.per_layer[layer_a];
  const auto& b = sweep.per_layer[layer_b];
  std::map<int, double> by_fold;
  for (std::size_t i = 0; i < b.fold_ids.size(); ++i) by_fold[b.fold_ids[i]] = b.fold_values[i];
  std::vector<double> va, vb, diffs;
  for (std::size_t i = 0; i < a.fold_ids.size(); ++i) {
    auto it = by_fold.find(a.fold_ids[i]);
    if (it == by_fold.end()) continue;
    va.push_back(a.fold_values[i]);
    vb.push_back(it->second);
    diffs.push_back(a.fold_values[i] - it->second);
  }
  if (diffs.empty() || std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; })) {
    return std::nullopt;
  }
  LayerComparison out;
  out.layer_a = layer_a;
  out.layer_b = layer_b;
  out.mean_diff = stats::mean(diffs);
  out.test = stats::wilcoxon_signed_rank(diffs);
  if (va.size() >= 2) {
    try {
      out.cohens_d = stats::cohens_d(va, vb).value;
    } catch (const DegenerateError&) {
    }
  }
  return out;
}

std::vector<int> anchor_labels(std::span<const SampleRecord> manifest) {
  std::vector<int> out;
  out.reserve(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!manifest[i].anchor_value) {
      throw ValidationError("row " + std::to_string(i) + " (" + manifest[i].image_id + ") has no anchor value");
    }
    out.push_back(anchor_class(*manifest[i].anchor_value));
  }
  return out;
}

}  // namespace anchorprobe
