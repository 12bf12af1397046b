#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anchorprobe/score_table.hpp"
#include "anchorprobe/stats.hpp"

namespace anchorprobe {

/// score(anchored) - score(clean) for one anchored row, paired on
/// (model_id, prompt_mode, image_id).
struct DeltaRecord {
  std::string image_id;
  std::string model_id;
  PromptMode prompt_mode = PromptMode::simple;
  int anchor_value = 0;
  Formulation formulation = Formulation::baseline;
  double anchored_score = 0.0;
  double clean_score = 0.0;
  double delta = 0.0;
};

struct Coverage {
  std::size_t paired = 0;
  std::size_t unpaired = 0;  ///< anchored rows without a clean partner
};

/// Pairs every anchored row with its clean row. Rows lacking a partner are
/// counted, not returned.
std::vector<DeltaRecord> compute_deltas(const ScoreTable& table, Coverage* coverage = nullptr);

struct AnchorBias {
  int anchor = 0;
  std::size_t n = 0;           ///< anchored rows
  double mean_score = 0.0;
  double sd_score = 0.0;
  std::size_t n_pairs = 0;     ///< rows with a clean partner
  std::optional<double> mean_delta;
  std::optional<double> cohens_d;   ///< anchored vs clean scores, two-sample
  std::optional<stats::RankTestResult> wilcoxon;  ///< on paired deltas
  std::string wilcoxon_error;       ///< set when the test was degenerate
  double directional_bias = 0.0;    ///< mean_score - anchor
  std::string bias_label;           ///< heuristic: copy / boundary-negative / underestimate / overestimate
};

struct SusceptibilityOptions {
  std::optional<Formulation> formulation = Formulation::baseline;  ///< nullopt = all formulations
  std::optional<PromptMode> prompt_mode;  ///< nullopt = pool both modes
  bool include_clean_group = false;       ///< ANOVA over seven groups (clean + six anchors)
  stats::Alternative alternative = stats::Alternative::two_sided;
};

struct SusceptibilitySummary {
  std::string model_id;
  stats::AnovaResult anova;
  double eta_squared = 0.0;
  stats::Correlation anchor_score;  ///< Pearson r of anchor value vs score
  std::optional<double> mean_abs_delta;
  std::vector<AnchorBias> per_anchor;
  Coverage coverage;
  std::vector<std::string> warnings;
};

/// η², anchor/score correlation and per-anchor shifts for one model.
/// Throws DomainError when the model has no anchored rows or fewer than two
/// anchor groups. Without clean rows the delta fields stay empty and a
/// warning is recorded.
SusceptibilitySummary susceptibility(const ScoreTable& table, const std::string& model_id,
                                     const SusceptibilityOptions& options = {});

/// Heuristic label for mean(score) - anchor.
std::string bias_label(int anchor, double directional_bias);

struct DeltaGroup {
  std::string model_id;
  PromptMode prompt_mode = PromptMode::simple;
  int anchor = 0;
  Formulation formulation = Formulation::baseline;
  std::size_t n = 0;
  double mean_delta = 0.0;
  std::optional<double> cohens_d;
  std::optional<stats::RankTestResult> wilcoxon;
  std::string wilcoxon_error;
};

struct DeltaAnalysis {
  std::vector<DeltaGroup> groups;  ///< ordered by model, mode, formulation, anchor
  Coverage coverage;
};

DeltaAnalysis delta_analysis(const ScoreTable& table,
                             stats::Alternative alternative = stats::Alternative::two_sided);

struct RowSelection {
  std::optional<std::string> model_id;
  std::optional<PromptMode> prompt_mode;
};

struct ConfigComparison {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double mean_shift = 0.0;  ///< mean(a) - mean(b)
  stats::RankTestResult mann_whitney;
  std::optional<double> cohens_d;
};

/// Compares the clean-score distributions of two configurations. Throws
/// DomainError when either selection is empty.
ConfigComparison config_comparison(const ScoreTable& a, const ScoreTable& b,
                                   const RowSelection& selection = {});

struct FormulationAnchor {
  int anchor = 0;
  std::size_t n = 0;
  double mean_delta = 0.0;
  std::optional<double> cohens_d;
  std::optional<stats::RankTestResult> wilcoxon;
  std::string wilcoxon_error;
};

struct FormulationSummary {
  Formulation formulation = Formulation::baseline;
  double mean_abs_delta = 0.0;
  std::vector<FormulationAnchor> per_anchor;
};

struct AnchorAnova {
  int anchor = 0;
  std::optional<stats::AnovaResult> anova;  ///< deltas grouped by formulation
  std::string error;
};

struct ReformulationAnalysis {
  std::string model_id;
  std::vector<FormulationSummary> formulations;  ///< descending mean |Δ|
  std::vector<AnchorAnova> per_anchor_anova;     ///< empty with one formulation
  std::optional<stats::AnovaResult> omnibus;     ///< scores grouped by formulation × anchor cell
  std::vector<std::string> warnings;
};

/// Throws DomainError when the model has no paired anchored rows.
ReformulationAnalysis reformulation_analysis(const ScoreTable& table, const std::string& model_id);

struct DegradationShift {
  Condition condition = Condition::blur;
  double param = 0.0;
  std::size_t n = 0;
  double mean_delta = 0.0;
};

struct DegradationComparison {
  std::string model_id;
  double quality_mean_abs_delta = 0.0;
  double anchor_mean_abs_delta = 0.0;
  std::optional<double> ratio;      ///< anchor / quality; absent when quality |Δ| is zero
  bool anchor_only_effect = false;  ///< quality |Δ| is zero
  stats::RankTestResult mann_whitney;  ///< anchor |Δ| vs quality |Δ|
  std::optional<double> cohens_d;
  std::vector<DegradationShift> shifts;
  /// Per row Δ against strength (blur sigma, or 100 - JPEG quality), per kind.
  std::optional<stats::Correlation> blur_strength_r;
  std::optional<stats::Correlation> jpeg_strength_r;
};

/// Throws DomainError naming the missing condition class (clean, anchor or
/// degraded).
DegradationComparison degradation_vs_anchor(const ScoreTable& table, const std::string& model_id);

/// Pearson r between an external metric and the score over clean rows.
/// Throws DomainError for an unknown metric and DegenerateError for a
/// constant one.
stats::Correlation external_metric_correlation(const ScoreTable& table, const std::string& metric,
                                               const RowSelection& selection = {});

}  // namespace anchorprobe
