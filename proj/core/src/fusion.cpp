#include "anchorprobe/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "anchorprobe/error.hpp"

namespace anchorprobe {

std::string_view to_string(FusionPattern p) {
  switch (p) {
    case FusionPattern::instant_fusion: return "instant_fusion";
    case FusionPattern::gradual: return "gradual";
    case FusionPattern::near_fusion_divergence: return "near_fusion_divergence";
    case FusionPattern::drop_recovery: return "drop_recovery";
    case FusionPattern::other: return "other";
  }
  return "other";
}

std::vector<double> FusionCurve::values() const {
  std::vector<double> out;
  out.reserve(per_layer.size());
  for (const auto& p : per_layer) out.push_back(p.mean);
  return out;
}

FusionCurve similarity_curve(const LayerTensorSet& anchored, std::span<const SampleRecord> anchored_manifest,
                             const LayerTensorSet& clean, std::span<const SampleRecord> clean_manifest,
                             const PairingOptions& pairing) {
  if (anchored.layers() != clean.layers() || anchored.dim() != clean.dim()) {
    throw ValidationError("anchored and clean tensors differ in layer count or dimension");
  }
  if (anchored_manifest.size() != anchored.samples() || clean_manifest.size() != clean.samples()) {
    throw ValidationError("manifest length does not match tensor sample count");
  }

  using Key = std::tuple<std::string, std::string, PromptMode>;
  std::map<Key, std::size_t> clean_index;
  for (std::size_t i = 0; i < clean_manifest.size(); ++i) {
    const auto& r = clean_manifest[i];
    if (r.condition != Condition::clean) continue;
    clean_index.emplace(Key{r.image_id, r.model_id, r.prompt_mode}, i);
  }

  FusionCurve curve;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < anchored_manifest.size(); ++i) {
    const auto& r = anchored_manifest[i];
    if (r.condition != Condition::anchor) continue;
    if (pairing.anchor && r.anchor_value != pairing.anchor) continue;
    auto it = clean_index.find(Key{r.image_id, r.model_id, r.prompt_mode});
    if (it == clean_index.end()) {
      ++curve.unpaired;
      continue;
    }
    pairs.emplace_back(i, it->second);
  }
  if (curve.unpaired > 0) {
    curve.warnings.push_back(std::to_string(curve.unpaired) + " anchored rows had no clean partner");
  }
  if (pairs.empty()) throw ValidationError("no anchored row could be paired with a clean row");

  const std::size_t d = anchored.dim();
  curve.per_layer.resize(anchored.layers());
  for (std::size_t l = 0; l < anchored.layers(); ++l) {
    FusionPoint point;
    point.layer = l;
    std::vector<double> cosines;
    cosines.reserve(pairs.size());
    for (const auto& [ia, ic] : pairs) {
      double dot = 0, na = 0, nc = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const double a = anchored.at(l, ia, k), c = clean.at(l, ic, k);
        dot += a * c;
        na += a * a;
        nc += c * c;
      }
      if (na == 0.0 || nc == 0.0) {
        ++point.zero_norm_excluded;
        continue;
      }
      cosines.push_back(std::clamp(dot / std::sqrt(na * nc), -1.0, 1.0));
    }
    point.pairs = cosines.size();
    if (cosines.empty()) {
      point.flagged = true;
      curve.warnings.push_back("layer " + std::to_string(l) + ": every pair has a zero-norm vector");
    } else {
      double sum = 0;
      for (double c : cosines) sum += c;
      point.mean = sum / static_cast<double>(cosines.size());
      if (cosines.size() >= 2) {
        double ss = 0;
        for (double c : cosines) ss += (c - point.mean) * (c - point.mean);
        point.sd = std::sqrt(ss / static_cast<double>(cosines.size() - 1));
      }
    }
    curve.per_layer[l] = point;
  }
  return curve;
}

std::optional<std::size_t> find_fusion_layer(std::span<const double> values, double threshold) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= threshold) return i;
  }
  return std::nullopt;
}

LayerValue max_consecutive_drop(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("max_consecutive_drop needs at least two layers");
  LayerValue best{1, values[0] - values[1]};
  for (std::size_t l = 2; l < values.size(); ++l) {
    const double drop = values[l - 1] - values[l];
    if (drop > best.value) best = {l, drop};
  }
  return best;
}

FusionPattern classify_pattern(std::span<const double> values, const FusionThresholds& t) {
  const std::size_t n = values.size();
  if (n < 4) return FusionPattern::other;
  if (max_consecutive_drop(values).value >= t.drop) return FusionPattern::drop_recovery;

  const auto fusion = find_fusion_layer(values, t.fusion);
  if (fusion && *fusion <= t.instant_max_layer) return FusionPattern::instant_fusion;
  if (fusion) return FusionPattern::other;

  const auto peak_it = std::max_element(values.begin(), values.end());
  const auto peak = static_cast<std::size_t>(peak_it - values.begin());
  if (peak < t.early_layers && values.back() <= *peak_it - t.divergence_margin) {
    return FusionPattern::near_fusion_divergence;
  }

  bool rising = true;
  for (std::size_t l = 1; l < n; ++l) {
    if (values[l] < values[l - 1] - t.jitter) {
      rising = false;
      break;
    }
  }
  const std::size_t last_quarter = n - (n + 3) / 4;
  if (rising && peak >= last_quarter) return FusionPattern::gradual;
  return FusionPattern::other;
}

void analyze_curve(FusionCurve& curve, const FusionThresholds& thresholds) {
  const auto v = curve.values();
  if (v.empty()) throw DomainError("fusion curve has no layers");
  curve.fusion_layer = find_fusion_layer(v, thresholds.fusion);
  const auto peak = std::max_element(v.begin(), v.end());
  curve.peak = {static_cast<std::size_t>(peak - v.begin()), *peak};
  curve.max_drop = v.size() >= 2 ? max_consecutive_drop(v) : LayerValue{0, 0.0};
  curve.pattern = classify_pattern(v, thresholds);
}

FusionCurve curve_from_values(std::span<const double> values, const FusionThresholds& thresholds) {
  FusionCurve curve;
  for (std::size_t l = 0; l < values.size(); ++l) {
    FusionPoint p;
    p.layer = l;
    p.mean = values[l];
    p.pairs = 1;
    curve.per_layer.push_back(p);
  }
  analyze_curve(curve, thresholds);
  return curve;
}

}  // namespace anchorprobe
