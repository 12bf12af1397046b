#include "anchorprobe/types.hpp"

#include "anchorprobe/error.hpp"

namespace anchorprobe {

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::baseline: return "baseline";
    case Formulation::mismatch: return "mismatch";
    case Formulation::social: return "social";
    case Formulation::abstract: return "abstract";
  }
  return "baseline";
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::clean: return "clean";
    case Condition::anchor: return "anchor";
    case Condition::blur: return "blur";
    case Condition::jpeg: return "jpeg";
  }
  return "clean";
}

std::string_view to_string(PromptMode m) { return m == PromptMode::simple ? "simple" : "thinking"; }

std::string_view to_string(Pooling p) {
  return p == Pooling::last_token ? "last_token" : "mean_prompt_tokens";
}

Formulation parse_formulation(std::string_view text) {
  if (text == "baseline") return Formulation::baseline;
  if (text == "mismatch") return Formulation::mismatch;
  if (text == "social") return Formulation::social;
  if (text == "abstract") return Formulation::abstract;
  throw DomainError("unknown formulation: '" + std::string(text) + "'");
}

Condition parse_condition(std::string_view text) {
  if (text == "clean") return Condition::clean;
  if (text == "anchor") return Condition::anchor;
  if (text == "blur") return Condition::blur;
  if (text == "jpeg") return Condition::jpeg;
  throw DomainError("unknown condition: '" + std::string(text) + "'");
}

PromptMode parse_prompt_mode(std::string_view text) {
  if (text == "simple") return PromptMode::simple;
  if (text == "thinking") return PromptMode::thinking;
  throw DomainError("unknown prompt mode: '" + std::string(text) + "'");
}

Pooling parse_pooling(std::string_view text) {
  if (text == "last_token") return Pooling::last_token;
  if (text == "mean_prompt_tokens") return Pooling::mean_prompt_tokens;
  throw DomainError("unknown pooling: '" + std::string(text) + "'");
}

bool is_valid_anchor(int value) noexcept { return value >= 0 && value <= 10 && value % 2 == 0; }

int anchor_class(int value) {
  if (!is_valid_anchor(value)) throw DomainError("invalid anchor value " + std::to_string(value));
  return value / 2;
}

void SampleRecord::validate() const {
  if (image_id.empty()) throw ValidationError("sample record without image_id");
  switch (condition) {
    case Condition::anchor:
      if (!anchor_value || !formulation) {
        throw ValidationError("anchor record for " + image_id + " lacks anchor value or formulation");
      }
      if (!is_valid_anchor(*anchor_value)) {
        throw ValidationError("record for " + image_id + " has invalid anchor " +
                              std::to_string(*anchor_value));
      }
      break;
    case Condition::clean:
      if (anchor_value || formulation) {
        throw ValidationError("clean record for " + image_id + " carries anchor fields");
      }
      break;
    case Condition::blur:
    case Condition::jpeg:
      if (anchor_value || formulation) {
        throw ValidationError("degraded record for " + image_id + " carries anchor fields");
      }
      break;
  }
}

}  // namespace anchorprobe
