#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace anchorprobe {

/// Wording of the overlaid anchor text.
enum class Formulation { baseline, mismatch, social, abstract };

enum class Condition { clean, anchor, blur, jpeg };

enum class PromptMode { simple, thinking };

/// Which token positions the producer pooled into one hidden-state vector.
enum class Pooling { last_token, mean_prompt_tokens };

std::string_view to_string(Formulation f);
std::string_view to_string(Condition c);
std::string_view to_string(PromptMode m);
std::string_view to_string(Pooling p);

Formulation parse_formulation(std::string_view text);
Condition parse_condition(std::string_view text);
PromptMode parse_prompt_mode(std::string_view text);
Pooling parse_pooling(std::string_view text);

/// The six anchor values used throughout: 0, 2, ..., 10.
inline constexpr int kAnchorValues[] = {0, 2, 4, 6, 8, 10};
inline constexpr int kAnchorClassCount = 6;

bool is_valid_anchor(int value) noexcept;
/// 0 -> 0, 2 -> 1, ..., 10 -> 5. Throws DomainError for invalid anchors.
int anchor_class(int value);

/// One sample's provenance; index-aligned with tensor rows and score rows.
struct SampleRecord {
  std::string image_id;
  std::string city;
  Condition condition = Condition::clean;
  std::optional<int> anchor_value;
  std::optional<Formulation> formulation;
  std::optional<double> degradation_param;
  PromptMode prompt_mode = PromptMode::simple;
  std::string model_id;

  /// Throws ValidationError if the condition/optional-field pairing is violated.
  void validate() const;

  bool operator==(const SampleRecord&) const = default;
};

}  // namespace anchorprobe
