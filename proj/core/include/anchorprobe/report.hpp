#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "anchorprobe/fusion.hpp"
#include "anchorprobe/json_io.hpp"
#include "anchorprobe/sweep.hpp"

namespace anchorprobe {

struct LayerMark {
  std::size_t layer = 0;
  double value = 0.0;
};

/// One model's milestones: score-probe breakthrough, fusion layer, anchor
/// breakthrough and saturation, best R².
struct CrossPhaseRow {
  std::string model_id;
  std::optional<LayerMark> score_breakthrough;
  std::optional<LayerMark> fusion_layer;
  std::optional<LayerMark> anchor_breakthrough;
  std::optional<LayerMark> anchor_saturation;
  std::optional<LayerMark> best_r2;
  std::vector<std::string> warnings;
};

/// Assembles the row from already-computed results. Score breakthrough is
/// the first layer whose mean R² reaches `score_threshold`. Missing or empty
/// inputs leave the matching fields empty and add a warning.
CrossPhaseRow cross_phase_table(const std::string& model_id, const LayerSweepResult* anchor_sweep,
                                const LayerSweepResult* score_sweep, const FusionCurve* fusion,
                                double score_threshold = 0.5);

Json to_json(const CrossPhaseRow& row);

enum class ReportFormat { csv, json, svg };
ReportFormat parse_report_format(std::string_view text);

/// Results bundle consumed by render_reports:
///   { "schema_version": 1,
///     "susceptibility": [ <susceptibility summary>, ... ],
///     "models": [ { "model_id": ..., "anchor_sweep": <sweep>|null,
///                   "score_sweep": <sweep>|null, "fusion": <curve>|null,
///                   "pca": [<spectrum>, ...]|null }, ... ] }
/// Either array may be absent.
///
/// Writes, per requested format:
///   csv   susceptibility.csv, cross_phase.csv
///   json  report.json
///   svg   layer_sweep_<model>.svg for models with a sweep, fusion.svg when
///         any model has a fusion curve
/// Returns the written paths in creation order. Throws ValidationError for a
/// bundle with a missing or wrong schema_version.
std::vector<std::filesystem::path> render_reports(const Json& bundle, const std::set<ReportFormat>& formats,
                                                  const std::filesystem::path& out_dir);

/// Dual-axis plot: accuracy on the left axis, R² on the right.
std::string render_layer_sweep_svg(const std::string& model_id, const LayerSweepResult* accuracy,
                                   const LayerSweepResult* r_squared);

struct NamedCurve {
  std::string model_id;
  FusionCurve curve;
};

/// Mean cosine per layer for each model plus the fusion threshold line.
std::string render_fusion_svg(const std::vector<NamedCurve>& curves, double threshold = 0.95);

/// Filesystem-safe version of a model id.
std::string file_safe(const std::string& name);

}  // namespace anchorprobe
