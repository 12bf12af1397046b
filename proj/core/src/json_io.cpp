#include "anchorprobe/json_io.hpp"

#include <cmath>
#include <fstream>

#include "anchorprobe/error.hpp"

namespace anchorprobe {

Json to_json(const SampleRecord& r) {
  Json j;
  j["image_id"] = r.image_id;
  j["city"] = r.city;
  j["condition"] = to_string(r.condition);
  j["anchor"] = r.anchor_value ? Json(*r.anchor_value) : Json(nullptr);
  j["formulation"] = r.formulation ? Json(to_string(*r.formulation)) : Json(nullptr);
  j["degradation_param"] = r.degradation_param ? Json(*r.degradation_param) : Json(nullptr);
  j["prompt_mode"] = to_string(r.prompt_mode);
  j["model_id"] = r.model_id;
  return j;
}

SampleRecord sample_record_from_json(const Json& j) {
  try {
    SampleRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.city = j.value("city", std::string{});
    r.condition = parse_condition(j.at("condition").get<std::string>());
    if (j.contains("anchor") && !j["anchor"].is_null()) r.anchor_value = j["anchor"].get<int>();
    if (j.contains("formulation") && !j["formulation"].is_null()) {
      r.formulation = parse_formulation(j["formulation"].get<std::string>());
    }
    if (j.contains("degradation_param") && !j["degradation_param"].is_null()) {
      r.degradation_param = j["degradation_param"].get<double>();
    }
    r.prompt_mode = parse_prompt_mode(j.value("prompt_mode", std::string("simple")));
    r.model_id = j.value("model_id", std::string{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed sample record: ") + e.what());
  }
}

Json number_or_null(double value) {
  return std::isfinite(value) ? Json(value) : Json(nullptr);
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace anchorprobe
