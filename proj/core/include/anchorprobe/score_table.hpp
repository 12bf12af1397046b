#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anchorprobe/types.hpp"

namespace anchorprobe {

struct ScoreRow {
  SampleRecord record;
  double score = 0.0;  ///< in [0, 10]
  std::map<std::string, double> metrics;  ///< external no-reference metrics, when present
};

/// Long-format model scores. Row identity is (image_id, condition, anchor,
/// formulation, degradation_param, prompt_mode, model_id).
struct ScoreTable {
  std::vector<ScoreRow> rows;

  /// Throws ValidationError listing every out-of-range score and the first
  /// duplicate key.
  void validate() const;

  std::vector<std::string> models() const;
  std::vector<std::string> metric_names() const;
};

/// Columns every scores.csv must carry, in the order they are written.
inline constexpr const char* kRequiredScoreColumns[] = {
    "image_id", "city", "condition", "anchor", "formulation", "prompt_mode", "model_id", "score"};

/// Parses scores.csv. An optional `degradation_param` column holds blur sigma
/// or JPEG quality; every other extra column is read as a numeric external
/// metric (empty cell = absent). Row numbers in errors are 1-based file lines.
ScoreTable load_scores(const std::filesystem::path& path);
ScoreTable parse_scores(const std::string& csv_text, const std::string& source = "<memory>");

void write_scores(const ScoreTable& table, const std::filesystem::path& path);

std::string row_key(const SampleRecord& r);

}  // namespace anchorprobe
