#include "anchorprobe/serialize.hpp"

#include <limits>

#include "anchorprobe/error.hpp"

namespace anchorprobe {

namespace {

Json num(double v) { return number_or_null(v); }

template <typename T>
Json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return num(*v);
  } else {
    return *v;
  }
}

double read_num(const Json& j, const char* key, double fallback = std::numeric_limits<double>::quiet_NaN()) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw FormatError(std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

std::optional<std::size_t> read_opt_index(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::size_t>();
}

}  // namespace

Json to_json(const stats::AnovaResult& r) {
  return Json{{"f", num(r.f)},
              {"p", num(r.p)},
              {"log10_p", num(r.log10_p)},
              {"eta_squared", num(r.eta_squared)},
              {"df_between", r.df_between},
              {"df_within", r.df_within},
              {"ss_between", num(r.ss_between)},
              {"ss_within", num(r.ss_within)}};
}

Json to_json(const stats::RankTestResult& r) {
  return Json{{"statistic", num(r.statistic)},
              {"p", num(r.p)},
              {"log10_p", num(r.log10_p)},
              {"exact", r.exact},
              {"n_used", r.n_used},
              {"alternative", std::string(stats::to_string(r.alternative))}};
}

Json to_json(const stats::Correlation& r) {
  return Json{{"r", num(r.r)}, {"p", num(r.p)}, {"log10_p", num(r.log10_p)}, {"n", r.n}};
}

// ---------------------------------------------------------------- sweeps

Json to_json(const LayerSweepResult& r) {
  Json layers = Json::array();
  for (const auto& p : r.per_layer) {
    Json l{{"layer", p.layer}, {"value", num(p.value)}};
    if (r.metric == SweepMetric::accuracy) {
      l["ci_lo"] = num(p.ci_lo);
      l["ci_hi"] = num(p.ci_hi);
    }
    l["sd"] = num(p.sd);
    Json folds = Json::array();
    for (std::size_t i = 0; i < p.fold_values.size(); ++i) {
      folds.push_back(Json{{"fold", p.fold_ids[i]}, {"value", num(p.fold_values[i])}});
    }
    l["folds"] = folds;
    if (r.metric == SweepMetric::accuracy) {
      l["confusion"] = p.confusion;
      l["adjacent_confusion_rate"] = opt(p.adjacent_confusion);
    }
    layers.push_back(std::move(l));
  }
  Json out{{"metric", std::string(to_string(r.metric))},
           {"threshold", r.threshold},
           {"breakthrough", opt(r.breakthrough)},
           {"saturation", opt(r.saturation)},
           {"optimal", r.optimal},
           {"per_layer", layers}};
  if (r.metric == SweepMetric::accuracy) {
    Json conv = Json::array();
    for (bool c : r.converged) conv.push_back(c);
    out["converged"] = conv;
  }
  out["warnings"] = r.warnings;
  return out;
}

LayerSweepResult sweep_from_json(const Json& j) {
  LayerSweepResult r;
  const auto metric = j.at("metric").get<std::string>();
  if (metric == "accuracy") {
    r.metric = SweepMetric::accuracy;
  } else if (metric == "r_squared") {
    r.metric = SweepMetric::r_squared;
  } else {
    throw FormatError("unknown sweep metric '" + metric + "'");
  }
  r.threshold = read_num(j, "threshold", r.metric == SweepMetric::accuracy ? 0.95 : 0.5);
  r.breakthrough = read_opt_index(j, "breakthrough");
  r.saturation = read_opt_index(j, "saturation");
  r.optimal = j.value("optimal", std::size_t{0});
  for (const auto& l : j.at("per_layer")) {
    LayerPoint p;
    p.layer = l.at("layer").get<std::size_t>();
    p.value = read_num(l, "value");
    p.ci_lo = read_num(l, "ci_lo", p.value);
    p.ci_hi = read_num(l, "ci_hi", p.value);
    p.sd = read_num(l, "sd", 0.0);
    if (auto it = l.find("folds"); it != l.end()) {
      for (const auto& f : *it) {
        p.fold_ids.push_back(f.at("fold").get<int>());
        p.fold_values.push_back(read_num(f, "value"));
      }
    }
    if (auto it = l.find("confusion"); it != l.end()) p.confusion = it->get<std::vector<std::vector<long>>>();
    if (auto it = l.find("adjacent_confusion_rate"); it != l.end() && !it->is_null()) {
      p.adjacent_confusion = it->get<double>();
    }
    r.per_layer.push_back(std::move(p));
  }
  if (auto it = j.find("warnings"); it != j.end()) r.warnings = it->get<std::vector<std::string>>();
  return r;
}

Json to_json(const LayerComparison& c) {
  return Json{{"layer_a", c.layer_a},
              {"layer_b", c.layer_b},
              {"mean_diff", num(c.mean_diff)},
              {"test", to_json(c.test)},
              {"cohens_d", opt(c.cohens_d)},
              {"method", c.method}};
}

// ---------------------------------------------------------------- fusion

Json to_json(const FusionCurve& c) {
  Json layers = Json::array();
  for (const auto& p : c.per_layer) {
    layers.push_back(Json{{"layer", p.layer},
                          {"mean", num(p.mean)},
                          {"sd", num(p.sd)},
                          {"pairs", p.pairs},
                          {"zero_norm_excluded", p.zero_norm_excluded},
                          {"flagged", p.flagged}});
  }
  return Json{{"fusion_layer", opt(c.fusion_layer)},
              {"peak", Json{{"layer", c.peak.layer}, {"value", num(c.peak.value)}}},
              {"max_drop", Json{{"layer", c.max_drop.layer}, {"magnitude", num(c.max_drop.value)}}},
              {"pattern", std::string(to_string(c.pattern))},
              {"unpaired", c.unpaired},
              {"per_layer", layers},
              {"warnings", c.warnings}};
}

FusionCurve fusion_curve_from_json(const Json& j) {
  FusionCurve c;
  for (const auto& l : j.at("per_layer")) {
    FusionPoint p;
    p.layer = l.at("layer").get<std::size_t>();
    p.mean = read_num(l, "mean");
    p.sd = read_num(l, "sd", 0.0);
    p.pairs = l.value("pairs", std::size_t{0});
    p.zero_norm_excluded = l.value("zero_norm_excluded", std::size_t{0});
    p.flagged = l.value("flagged", false);
    c.per_layer.push_back(p);
  }
  c.fusion_layer = read_opt_index(j, "fusion_layer");
  if (auto it = j.find("peak"); it != j.end()) c.peak = {it->at("layer").get<std::size_t>(), read_num(*it, "value")};
  if (auto it = j.find("max_drop"); it != j.end()) {
    c.max_drop = {it->at("layer").get<std::size_t>(), read_num(*it, "magnitude")};
  }
  const auto pattern = j.value("pattern", std::string("other"));
  for (auto p : {FusionPattern::instant_fusion, FusionPattern::gradual, FusionPattern::near_fusion_divergence,
                 FusionPattern::drop_recovery, FusionPattern::other}) {
    if (pattern == to_string(p)) c.pattern = p;
  }
  c.unpaired = j.value("unpaired", std::size_t{0});
  if (auto it = j.find("warnings"); it != j.end()) c.warnings = it->get<std::vector<std::string>>();
  return c;
}

// ---------------------------------------------------------------- PCA

Json to_json(const VarianceSpectrum& s) {
  Json ratios = Json::array();
  for (double r : s.ratios) ratios.push_back(num(r));
  return Json{{"layer", s.layer}, {"pc1_share", num(s.pc1_share)}, {"randomized", s.randomized}, {"ratios", ratios}};
}

Json to_json(const std::vector<VarianceSpectrum>& trajectory) {
  Json out = Json::array();
  for (const auto& s : trajectory) out.push_back(to_json(s));
  return out;
}

// ---------------------------------------------------------------- behavior

Json to_json(const SusceptibilitySummary& s) {
  Json anchors = Json::array();
  for (const auto& a : s.per_anchor) {
    anchors.push_back(Json{{"anchor", a.anchor},
                           {"n", a.n},
                           {"mean_score", num(a.mean_score)},
                           {"sd_score", num(a.sd_score)},
                           {"n_pairs", a.n_pairs},
                           {"mean_delta", opt(a.mean_delta)},
                           {"cohens_d", opt(a.cohens_d)},
                           {"wilcoxon", a.wilcoxon ? to_json(*a.wilcoxon) : Json(nullptr)},
                           {"wilcoxon_error", a.wilcoxon_error.empty() ? Json(nullptr) : Json(a.wilcoxon_error)},
                           {"directional_bias", num(a.directional_bias)},
                           {"bias_label", a.bias_label}});
  }
  return Json{{"model_id", s.model_id},
              {"eta_squared", num(s.eta_squared)},
              {"mean_abs_delta", opt(s.mean_abs_delta)},
              {"r", num(s.anchor_score.r)},
              {"anova", to_json(s.anova)},
              {"anchor_score_correlation", to_json(s.anchor_score)},
              {"per_anchor", anchors},
              {"bias_labels", "heuristic: copy |bias| < 0.1, boundary-negative bias < -0.5 at anchors 0/10"},
              {"coverage", Json{{"paired", s.coverage.paired}, {"unpaired", s.coverage.unpaired}}},
              {"warnings", s.warnings}};
}

Json to_json(const DeltaAnalysis& d) {
  Json groups = Json::array();
  for (const auto& g : d.groups) {
    groups.push_back(Json{{"model_id", g.model_id},
                          {"prompt_mode", std::string(to_string(g.prompt_mode))},
                          {"formulation", std::string(to_string(g.formulation))},
                          {"anchor", g.anchor},
                          {"n", g.n},
                          {"mean_delta", num(g.mean_delta)},
                          {"cohens_d", opt(g.cohens_d)},
                          {"wilcoxon", g.wilcoxon ? to_json(*g.wilcoxon) : Json(nullptr)},
                          {"wilcoxon_error", g.wilcoxon_error.empty() ? Json(nullptr) : Json(g.wilcoxon_error)}});
  }
  return Json{{"groups", groups},
              {"coverage", Json{{"paired", d.coverage.paired}, {"unpaired", d.coverage.unpaired}}}};
}

Json to_json(const ConfigComparison& c) {
  return Json{{"n_a", c.n_a},
              {"n_b", c.n_b},
              {"mean_shift", num(c.mean_shift)},
              {"mann_whitney", to_json(c.mann_whitney)},
              {"cohens_d", opt(c.cohens_d)}};
}

Json to_json(const ReformulationAnalysis& r) {
  Json forms = Json::array();
  for (const auto& f : r.formulations) {
    Json anchors = Json::array();
    for (const auto& a : f.per_anchor) {
      anchors.push_back(Json{{"anchor", a.anchor},
                             {"n", a.n},
                             {"mean_delta", num(a.mean_delta)},
                             {"cohens_d", opt(a.cohens_d)},
                             {"wilcoxon", a.wilcoxon ? to_json(*a.wilcoxon) : Json(nullptr)},
                             {"wilcoxon_error", a.wilcoxon_error.empty() ? Json(nullptr) : Json(a.wilcoxon_error)}});
    }
    forms.push_back(Json{{"formulation", std::string(to_string(f.formulation))},
                         {"mean_abs_delta", num(f.mean_abs_delta)},
                         {"per_anchor", anchors}});
  }
  Json anovas = Json::array();
  for (const auto& a : r.per_anchor_anova) {
    anovas.push_back(Json{{"anchor", a.anchor},
                          {"anova", a.anova ? to_json(*a.anova) : Json(nullptr)},
                          {"note", a.error.empty() ? Json(nullptr) : Json(a.error)}});
  }
  return Json{{"model_id", r.model_id},
              {"formulations", forms},
              {"per_anchor_anova", anovas},
              {"omnibus", r.omnibus ? to_json(*r.omnibus) : Json(nullptr)},
              {"warnings", r.warnings}};
}

Json to_json(const DegradationComparison& d) {
  Json shifts = Json::array();
  for (const auto& s : d.shifts) {
    shifts.push_back(Json{{"condition", std::string(to_string(s.condition))},
                          {"param", num(s.param)},
                          {"n", s.n},
                          {"mean_delta", num(s.mean_delta)}});
  }
  return Json{{"model_id", d.model_id},
              {"quality_mean_abs_delta", num(d.quality_mean_abs_delta)},
              {"anchor_mean_abs_delta", num(d.anchor_mean_abs_delta)},
              {"ratio", d.anchor_only_effect ? Json("anchor-only effect") : opt(d.ratio)},
              {"mann_whitney", to_json(d.mann_whitney)},
              {"cohens_d", opt(d.cohens_d)},
              {"shifts", shifts},
              {"blur_strength_r", d.blur_strength_r ? to_json(*d.blur_strength_r) : Json(nullptr)},
              {"jpeg_strength_r", d.jpeg_strength_r ? to_json(*d.jpeg_strength_r) : Json(nullptr)}};
}

}  // namespace anchorprobe
