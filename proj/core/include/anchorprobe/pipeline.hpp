#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anchorprobe/behavior.hpp"
#include "anchorprobe/error.hpp"
#include "anchorprobe/fusion.hpp"
#include "anchorprobe/json_io.hpp"
#include "anchorprobe/score_table.hpp"
#include "anchorprobe/stimulus.hpp"
#include "anchorprobe/tensor_store.hpp"

namespace anchorprobe {

// ---------------------------------------------------------------- stages
// Each stage returns the JSON document it would write; every document
// carries schema_version.

/// Validates tensor files (header, sidecar, values) and the score table and
/// records shapes, pooling tags and SHA-256 file digests.
Json ingest_stage(const std::vector<std::filesystem::path>& tensor_files,
                  const std::optional<std::filesystem::path>& scores_file);

struct BehaveOptions {
  stats::Alternative alternative = stats::Alternative::two_sided;
  bool include_clean_group = false;
};

/// Susceptibility per model, delta groups, and, where the data allow it,
/// reformulation, degradation and external-metric analyses.
Json behave_stage(const ScoreTable& scores, const BehaveOptions& options = {});

enum class ProbeTask { anchor6, score };
ProbeTask parse_probe_task(std::string_view text);
std::string_view to_string(ProbeTask task);

struct ProbeStageOptions {
  int k = 5;
  std::uint64_t seed = 42;
  double l2 = 1.0;
  double lambda = 1.0;
  double anchor_threshold = 0.95;
  double score_threshold = 0.5;
  double saturation_epsilon = 0.001;
  int bootstrap_resamples = 1000;
  unsigned threads = 0;
};

/// Runs the requested probe tasks. anchor6 uses the anchored rows of
/// `anchored`; score uses the clean rows of `clean` joined to `scores`.
/// Folds are assigned once over the union of both manifests. With both
/// tasks, the anchor saturation layer is compared with the best R² layer.
Json probe_stage(const TensorFile* anchored, const TensorFile* clean, const ScoreTable* scores,
                 const std::vector<ProbeTask>& tasks, const ProbeStageOptions& options);

struct FusionStageOptions {
  FusionThresholds thresholds;
  std::optional<int> anchor;  ///< restrict to one anchor value
};

Json fusion_stage(const TensorFile& anchored, const TensorFile& clean, const FusionStageOptions& options = {});

struct PcaStageOptions {
  std::size_t components = 10;
  bool include_clean = false;
  bool silhouette = true;  ///< silhouette of anchor classes on the 2D projection, per layer
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

Json pca_stage(const TensorFile& tensors, const PcaStageOptions& options = {});

/// Builds the render_reports bundle from whichever stage documents exist.
Json assemble_bundle(const std::optional<Json>& behavior, const std::optional<Json>& probe,
                     const std::optional<Json>& fusion, const std::optional<Json>& pca);

// ---------------------------------------------------------------- runner

struct StageOutcome {
  std::string stage;
  bool cache_hit = false;
  std::string key;
  std::vector<std::filesystem::path> outputs;
};

struct PipelineResult {
  int exit_code = kExitOk;
  std::vector<StageOutcome> stages;
  std::string error;
  std::string failed_stage;
};

/// Stage names in dependency order.
const std::vector<std::string>& pipeline_stage_order();

/// Executes the stages named in a JSON config (schema in the README). Paths
/// in the config are relative to the config file. Outputs go under out_dir;
/// per-stage cache records live in $ANCHORPROBE_CACHE or <out_dir>/.cache.
/// Never throws: failures map to exit codes 2 (validation), 3 (missing
/// dependency) and 4 (internal), with the failing stage named.
PipelineResult run_pipeline(const std::filesystem::path& config_path, std::ostream& log);

}  // namespace anchorprobe
