#include "anchorprobe/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "anchorprobe/error.hpp"

namespace anchorprobe {

namespace {

using CleanKey = std::tuple<std::string, PromptMode, std::string>;

CleanKey clean_key(const SampleRecord& r) { return {r.model_id, r.prompt_mode, r.image_id}; }

std::map<CleanKey, double> clean_scores(const ScoreTable& table) {
  std::map<CleanKey, double> out;
  for (const auto& row : table.rows) {
    if (row.record.condition == Condition::clean) out.emplace(clean_key(row.record), row.score);
  }
  return out;
}

std::optional<double> try_cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  try {
    return stats::cohens_d(a, b).value;
  } catch (const DegenerateError&) {
    return std::nullopt;
  }
}

void run_wilcoxon(const std::vector<double>& deltas, stats::Alternative alt,
                  std::optional<stats::RankTestResult>& result, std::string& error) {
  if (deltas.empty()) {
    error = "no paired rows";
    return;
  }
  try {
    result = stats::wilcoxon_signed_rank(deltas, alt);
  } catch (const DegenerateError& e) {
    error = e.what();
  }
}

double mean_abs(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += std::abs(x);
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace

std::vector<DeltaRecord> compute_deltas(const ScoreTable& table, Coverage* coverage) {
  const auto clean = clean_scores(table);
  std::vector<DeltaRecord> out;
  Coverage cov;
  for (const auto& row : table.rows) {
    const auto& r = row.record;
    if (r.condition != Condition::anchor || !r.anchor_value) continue;
    auto it = clean.find(clean_key(r));
    if (it == clean.end()) {
      ++cov.unpaired;
      continue;
    }
    ++cov.paired;
    out.push_back({r.image_id, r.model_id, r.prompt_mode, *r.anchor_value,
                   r.formulation.value_or(Formulation::baseline), row.score, it->second,
                   row.score - it->second});
  }
  if (coverage) *coverage = cov;
  return out;
}

std::string bias_label(int anchor, double bias) {
  if (std::abs(bias) < 0.1) return "copy";
  if (bias < -0.5 && (anchor == 0 || anchor == 10)) return "boundary-negative";
  return bias < 0 ? "underestimate" : "overestimate";
}

SusceptibilitySummary susceptibility(const ScoreTable& table, const std::string& model_id,
                                     const SusceptibilityOptions& options) {
  SusceptibilitySummary out;
  out.model_id = model_id;

  auto selected = [&](const SampleRecord& r) {
    if (r.model_id != model_id) return false;
    if (options.prompt_mode && r.prompt_mode != *options.prompt_mode) return false;
    return true;
  };

  std::map<int, std::vector<double>> by_anchor;
  std::vector<double> clean_group, xs, ys;
  for (const auto& row : table.rows) {
    const auto& r = row.record;
    if (!selected(r)) continue;
    if (r.condition == Condition::clean) {
      clean_group.push_back(row.score);
    } else if (r.condition == Condition::anchor && r.anchor_value) {
      if (options.formulation && r.formulation.value_or(Formulation::baseline) != *options.formulation) continue;
      by_anchor[*r.anchor_value].push_back(row.score);
      xs.push_back(*r.anchor_value);
      ys.push_back(row.score);
    }
  }
  if (by_anchor.empty()) throw DomainError("model '" + model_id + "' has no anchored rows in the selection");
  if (by_anchor.size() < 2) throw DomainError("model '" + model_id + "' has a single anchor group; ANOVA needs two");

  std::vector<std::vector<double>> groups;
  if (options.include_clean_group && !clean_group.empty()) groups.push_back(clean_group);
  for (const auto& [a, v] : by_anchor) groups.push_back(v);
  out.anova = stats::one_way_anova(groups);
  out.eta_squared = out.anova.eta_squared;
  try {
    out.anchor_score = stats::pearson_r(xs, ys);
  } catch (const DegenerateError& e) {
    out.warnings.push_back(std::string("anchor/score correlation undefined: ") + e.what());
  }

  // Deltas restricted to the same selection.
  Coverage cov;
  std::map<int, std::vector<double>> deltas_by_anchor;
  std::vector<double> all_deltas;
  for (const auto& d : compute_deltas(table, nullptr)) {
    if (d.model_id != model_id) continue;
    if (options.prompt_mode && d.prompt_mode != *options.prompt_mode) continue;
    if (options.formulation && d.formulation != *options.formulation) continue;
    deltas_by_anchor[d.anchor_value].push_back(d.delta);
    all_deltas.push_back(d.delta);
  }
  cov.paired = all_deltas.size();
  cov.unpaired = xs.size() - all_deltas.size();
  out.coverage = cov;
  if (clean_group.empty()) {
    out.warnings.push_back("no clean rows for model '" + model_id + "'; delta fields omitted");
  } else if (cov.unpaired > 0) {
    out.warnings.push_back(std::to_string(cov.unpaired) + " anchored rows lack a clean partner");
  }
  if (!all_deltas.empty()) out.mean_abs_delta = mean_abs(all_deltas);

  for (const auto& [anchor, scores] : by_anchor) {
    AnchorBias b;
    b.anchor = anchor;
    b.n = scores.size();
    b.mean_score = stats::mean(scores);
    b.sd_score = scores.size() >= 2 ? stats::stddev(scores) : 0.0;
    b.directional_bias = b.mean_score - anchor;
    b.bias_label = bias_label(anchor, b.directional_bias);
    auto it = deltas_by_anchor.find(anchor);
    if (it != deltas_by_anchor.end()) {
      b.n_pairs = it->second.size();
      b.mean_delta = stats::mean(it->second);
      b.cohens_d = try_cohens_d(scores, clean_group);
      run_wilcoxon(it->second, options.alternative, b.wilcoxon, b.wilcoxon_error);
    }
    out.per_anchor.push_back(std::move(b));
  }
  return out;
}

DeltaAnalysis delta_analysis(const ScoreTable& table, stats::Alternative alternative) {
  DeltaAnalysis out;
  const auto deltas = compute_deltas(table, &out.coverage);

  using GroupKey = std::tuple<std::string, PromptMode, Formulation, int>;
  std::map<GroupKey, std::vector<double>> deltas_by_group, scores_by_group;
  for (const auto& d : deltas) {
    const GroupKey k{d.model_id, d.prompt_mode, d.formulation, d.anchor_value};
    deltas_by_group[k].push_back(d.delta);
    scores_by_group[k].push_back(d.anchored_score);
  }
  std::map<std::pair<std::string, PromptMode>, std::vector<double>> clean_by_model_mode;
  for (const auto& row : table.rows) {
    if (row.record.condition == Condition::clean) {
      clean_by_model_mode[{row.record.model_id, row.record.prompt_mode}].push_back(row.score);
    }
  }

  for (const auto& [key, ds] : deltas_by_group) {
    DeltaGroup g;
    std::tie(g.model_id, g.prompt_mode, g.formulation, g.anchor) = key;
    g.n = ds.size();
    g.mean_delta = stats::mean(ds);
    g.cohens_d = try_cohens_d(scores_by_group[key], clean_by_model_mode[{g.model_id, g.prompt_mode}]);
    run_wilcoxon(ds, alternative, g.wilcoxon, g.wilcoxon_error);
    out.groups.push_back(std::move(g));
  }
  return out;
}

ConfigComparison config_comparison(const ScoreTable& a, const ScoreTable& b, const RowSelection& sel) {
  auto pick = [&](const ScoreTable& t) {
    std::vector<double> out;
    for (const auto& row : t.rows) {
      const auto& r = row.record;
      if (r.condition != Condition::clean) continue;
      if (sel.model_id && r.model_id != *sel.model_id) continue;
      if (sel.prompt_mode && r.prompt_mode != *sel.prompt_mode) continue;
      out.push_back(row.score);
    }
    return out;
  };
  const auto xa = pick(a), xb = pick(b);
  if (xa.empty() || xb.empty()) throw DomainError("config_comparison: empty clean-row selection");
  ConfigComparison out;
  out.n_a = xa.size();
  out.n_b = xb.size();
  out.mean_shift = stats::mean(xa) - stats::mean(xb);
  out.mann_whitney = stats::mann_whitney_u(xa, xb);
  out.cohens_d = try_cohens_d(xa, xb);
  return out;
}

ReformulationAnalysis reformulation_analysis(const ScoreTable& table, const std::string& model_id) {
  ReformulationAnalysis out;
  out.model_id = model_id;
  std::map<Formulation, std::map<int, std::vector<double>>> deltas, scores;
  for (const auto& d : compute_deltas(table)) {
    if (d.model_id != model_id) continue;
    deltas[d.formulation][d.anchor_value].push_back(d.delta);
    scores[d.formulation][d.anchor_value].push_back(d.anchored_score);
  }
  if (deltas.empty()) throw DomainError("model '" + model_id + "' has no paired anchored rows");

  std::vector<double> clean;
  for (const auto& row : table.rows) {
    if (row.record.model_id == model_id && row.record.condition == Condition::clean) clean.push_back(row.score);
  }

  for (const auto& [f, per_anchor] : deltas) {
    FormulationSummary s;
    s.formulation = f;
    std::vector<double> all;
    for (const auto& [anchor, ds] : per_anchor) {
      FormulationAnchor fa;
      fa.anchor = anchor;
      fa.n = ds.size();
      fa.mean_delta = stats::mean(ds);
      fa.cohens_d = try_cohens_d(scores[f][anchor], clean);
      run_wilcoxon(ds, stats::Alternative::two_sided, fa.wilcoxon, fa.wilcoxon_error);
      s.per_anchor.push_back(std::move(fa));
      all.insert(all.end(), ds.begin(), ds.end());
    }
    s.mean_abs_delta = mean_abs(all);
    out.formulations.push_back(std::move(s));
  }
  std::stable_sort(out.formulations.begin(), out.formulations.end(),
                   [](const auto& x, const auto& y) { return x.mean_abs_delta > y.mean_abs_delta; });

  if (deltas.size() < 2) {
    out.warnings.push_back("single formulation; cross-formulation tests omitted");
    return out;
  }

  std::set<int> anchors;
  for (const auto& [f, per_anchor] : deltas) {
    for (const auto& [a, ds] : per_anchor) anchors.insert(a);
  }
  for (int a : anchors) {
    AnchorAnova aa;
    aa.anchor = a;
    std::vector<std::vector<double>> groups;
    for (const auto& [f, per_anchor] : deltas) {
      auto it = per_anchor.find(a);
      if (it != per_anchor.end() && it->second.size() >= 2) groups.push_back(it->second);
    }
    if (groups.size() < 2) {
      aa.error = "fewer than two formulations with >= 2 rows";
    } else {
      try {
        aa.anova = stats::one_way_anova(groups);
      } catch (const DegenerateError&) {
        // Every delta identical: no between-formulation variation.
        stats::AnovaResult flat;
        flat.df_between = static_cast<int>(groups.size()) - 1;
        int n = 0;
        for (const auto& g : groups) n += static_cast<int>(g.size());
        flat.df_within = n - static_cast<int>(groups.size());
        aa.anova = flat;
        aa.error = "all deltas identical";
      }
    }
    out.per_anchor_anova.push_back(std::move(aa));
  }

  std::vector<std::vector<double>> cells;
  for (const auto& [f, per_anchor] : scores) {
    for (const auto& [a, ss] : per_anchor) {
      if (ss.size() >= 2) cells.push_back(ss);
    }
  }
  if (cells.size() >= 2) {
    try {
      out.omnibus = stats::one_way_anova(cells);
    } catch (const DegenerateError& e) {
      out.warnings.push_back(std::string("omnibus ANOVA undefined: ") + e.what());
    }
  }
  return out;
}

DegradationComparison degradation_vs_anchor(const ScoreTable& table, const std::string& model_id) {
  const auto clean = clean_scores(table);
  bool has_clean = false;
  for (const auto& [k, v] : clean) has_clean = has_clean || std::get<0>(k) == model_id;
  if (!has_clean) throw DomainError("degradation_vs_anchor: model '" + model_id + "' has no clean rows");

  DegradationComparison out;
  out.model_id = model_id;
  std::vector<double> anchor_abs, quality_abs;
  std::map<std::pair<Condition, double>, std::vector<double>> shifts;
  std::vector<double> blur_strength, blur_delta, jpeg_strength, jpeg_delta;
  for (const auto& row : table.rows) {
    const auto& r = row.record;
    if (r.model_id != model_id || r.condition == Condition::clean) continue;
    auto it = clean.find(clean_key(r));
    if (it == clean.end()) continue;
    const double delta = row.score - it->second;
    if (r.condition == Condition::anchor) {
      anchor_abs.push_back(std::abs(delta));
    } else {
      quality_abs.push_back(std::abs(delta));
      const double param = r.degradation_param.value_or(0.0);
      shifts[{r.condition, param}].push_back(delta);
      if (r.condition == Condition::blur) {
        blur_strength.push_back(param);
        blur_delta.push_back(delta);
      } else {
        jpeg_strength.push_back(100.0 - param);
        jpeg_delta.push_back(delta);
      }
    }
  }
  if (anchor_abs.empty()) throw DomainError("degradation_vs_anchor: model '" + model_id + "' has no paired anchor rows");
  if (quality_abs.empty()) throw DomainError("degradation_vs_anchor: model '" + model_id + "' has no paired degraded rows");

  out.anchor_mean_abs_delta = stats::mean(anchor_abs);
  out.quality_mean_abs_delta = stats::mean(quality_abs);
  if (out.quality_mean_abs_delta > 0) {
    out.ratio = out.anchor_mean_abs_delta / out.quality_mean_abs_delta;
  } else {
    out.anchor_only_effect = true;
  }
  out.mann_whitney = stats::mann_whitney_u(anchor_abs, quality_abs);
  out.cohens_d = try_cohens_d(anchor_abs, quality_abs);
  for (const auto& [key, ds] : shifts) {
    out.shifts.push_back({key.first, key.second, ds.size(), stats::mean(ds)});
  }
  auto corr = [](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<stats::Correlation> {
    if (x.size() < 3) return std::nullopt;
    try {
      return stats::pearson_r(x, y);
    } catch (const DegenerateError&) {
      return std::nullopt;
    }
  };
  out.blur_strength_r = corr(blur_strength, blur_delta);
  out.jpeg_strength_r = corr(jpeg_strength, jpeg_delta);
  return out;
}

stats::Correlation external_metric_correlation(const ScoreTable& table, const std::string& metric,
                                               const RowSelection& sel) {
  const auto names = table.metric_names();
  if (std::find(names.begin(), names.end(), metric) == names.end()) {
    throw DomainError("unknown external metric '" + metric + "'");
  }
  std::vector<double> m, s;
  for (const auto& row : table.rows) {
    const auto& r = row.record;
    if (r.condition != Condition::clean) continue;
    if (sel.model_id && r.model_id != *sel.model_id) continue;
    if (sel.prompt_mode && r.prompt_mode != *sel.prompt_mode) continue;
    auto it = row.metrics.find(metric);
    if (it == row.metrics.end()) continue;
    m.push_back(it->second);
    s.push_back(row.score);
  }
  return stats::pearson_r(m, s);
}

}  // namespace anchorprobe
