#include "anchorprobe/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "anchorprobe/error.hpp"
#include "anchorprobe/serialize.hpp"

namespace anchorprobe {

namespace {

Json mark_json(const std::optional<LayerMark>& m, const char* value_key) {
  if (!m) return nullptr;
  return Json{{"layer", m->layer}, {value_key, number_or_null(m->value)}};
}

std::string cell(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

double json_number(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::nan("");
  return it->get<double>();
}

}  // namespace

CrossPhaseRow cross_phase_table(const std::string& model_id, const LayerSweepResult* anchor_sweep,
                                const LayerSweepResult* score_sweep, const FusionCurve* fusion,
                                double score_threshold) {
  CrossPhaseRow row;
  row.model_id = model_id;
  if (anchor_sweep && !anchor_sweep->per_layer.empty()) {
    const auto v = anchor_sweep->values();
    if (anchor_sweep->breakthrough) row.anchor_breakthrough = LayerMark{*anchor_sweep->breakthrough, v[*anchor_sweep->breakthrough]};
    else row.warnings.push_back("anchor accuracy never reaches the breakthrough threshold");
    if (anchor_sweep->saturation) row.anchor_saturation = LayerMark{*anchor_sweep->saturation, v[*anchor_sweep->saturation]};
    if (row.anchor_breakthrough && row.anchor_saturation && row.anchor_breakthrough->layer > row.anchor_saturation->layer) {
      row.warnings.push_back("anchor saturation precedes breakthrough (plateau below threshold + epsilon)");
    }
  } else {
    row.warnings.push_back("no anchor classification sweep");
  }
  if (score_sweep && !score_sweep->per_layer.empty()) {
    const auto v = score_sweep->values();
    if (auto bt = detect_breakthrough(v, score_threshold)) row.score_breakthrough = LayerMark{*bt, v[*bt]};
    else row.warnings.push_back("score R2 never reaches the breakthrough threshold");
    row.best_r2 = LayerMark{score_sweep->optimal, v[score_sweep->optimal]};
  } else {
    row.warnings.push_back("no score regression sweep");
  }
  if (fusion && !fusion->per_layer.empty()) {
    const auto v = fusion->values();
    if (fusion->fusion_layer) row.fusion_layer = LayerMark{*fusion->fusion_layer, v[*fusion->fusion_layer]};
  } else {
    row.warnings.push_back("no fusion curve");
  }
  return row;
}

Json to_json(const CrossPhaseRow& row) {
  return Json{{"model_id", row.model_id},
              {"score_breakthrough", mark_json(row.score_breakthrough, "r_squared")},
              {"fusion_layer", mark_json(row.fusion_layer, "cosine")},
              {"anchor_breakthrough", mark_json(row.anchor_breakthrough, "accuracy")},
              {"anchor_saturation", mark_json(row.anchor_saturation, "accuracy")},
              {"best_r2", mark_json(row.best_r2, "r_squared")},
              {"warnings", row.warnings}};
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  if (text == "svg") return ReportFormat::svg;
  throw DomainError("unknown report format '" + std::string(text) + "' (expected csv, json or svg)");
}

std::string file_safe(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "model" : out;
}

std::vector<std::filesystem::path> render_reports(const Json& bundle, const std::set<ReportFormat>& formats,
                                                  const std::filesystem::path& out_dir) {
  if (!bundle.is_object() || bundle.value("schema_version", 0) != kSchemaVersion) {
    throw ValidationError("results bundle lacks schema_version " + std::to_string(kSchemaVersion));
  }
  std::filesystem::create_directories(out_dir);

  struct ModelResults {
    std::string id;
    std::optional<LayerSweepResult> anchor, score;
    std::optional<FusionCurve> fusion;
  };
  std::vector<ModelResults> models;
  if (auto it = bundle.find("models"); it != bundle.end()) {
    for (const auto& m : *it) {
      ModelResults r;
      r.id = m.at("model_id").get<std::string>();
      if (auto s = m.find("anchor_sweep"); s != m.end() && !s->is_null()) r.anchor = sweep_from_json(*s);
      if (auto s = m.find("score_sweep"); s != m.end() && !s->is_null()) r.score = sweep_from_json(*s);
      if (auto s = m.find("fusion"); s != m.end() && !s->is_null()) r.fusion = fusion_curve_from_json(*s);
      models.push_back(std::move(r));
    }
  }
  std::vector<CrossPhaseRow> rows;
  for (const auto& m : models) {
    rows.push_back(cross_phase_table(m.id, m.anchor ? &*m.anchor : nullptr, m.score ? &*m.score : nullptr,
                                     m.fusion ? &*m.fusion : nullptr));
  }
  const Json susceptibility = bundle.contains("susceptibility") ? bundle.at("susceptibility") : Json::array();

  std::vector<std::filesystem::path> written;
  if (formats.count(ReportFormat::csv)) {
    std::string s = "model,eta_squared,mean_abs_delta,r\n";
    for (const auto& m : susceptibility) {
      s += csv_field(m.at("model_id").get<std::string>()) + "," + cell(json_number(m, "eta_squared")) + "," +
           cell(json_number(m, "mean_abs_delta")) + "," + cell(json_number(m, "r")) + "\n";
    }
    written.push_back(out_dir / "susceptibility.csv");
    write_text(written.back(), s);

    auto layer_cell = [](const std::optional<LayerMark>& m) { return m ? std::to_string(m->layer) : std::string(); };
    auto value_cell = [](const std::optional<LayerMark>& m) { return m ? cell(m->value) : std::string(); };
    std::string c =
        "model,score_layer,score_r2,fusion_layer,fusion_cosine,anchor_breakthrough_layer,anchor_breakthrough_accuracy,"
        "anchor_saturation_layer,anchor_saturation_accuracy,best_r2_layer,best_r2\n";
    for (const auto& r : rows) {
      c += csv_field(r.model_id) + "," + layer_cell(r.score_breakthrough) + "," + value_cell(r.score_breakthrough) +
           "," + layer_cell(r.fusion_layer) + "," + value_cell(r.fusion_layer) + "," +
           layer_cell(r.anchor_breakthrough) + "," + value_cell(r.anchor_breakthrough) + "," +
           layer_cell(r.anchor_saturation) + "," + value_cell(r.anchor_saturation) + "," + layer_cell(r.best_r2) +
           "," + value_cell(r.best_r2) + "\n";
    }
    written.push_back(out_dir / "cross_phase.csv");
    write_text(written.back(), c);
  }
  if (formats.count(ReportFormat::json)) {
    Json table = Json::array();
    for (const auto& m : susceptibility) {
      table.push_back(Json{{"model", m.at("model_id")},
                           {"eta_squared", m.value("eta_squared", Json(nullptr))},
                           {"mean_abs_delta", m.value("mean_abs_delta", Json(nullptr))},
                           {"r", m.value("r", Json(nullptr))}});
    }
    Json cross = Json::array();
    for (const auto& r : rows) cross.push_back(to_json(r));
    Json doc{{"schema_version", kSchemaVersion}, {"susceptibility", table}, {"cross_phase", cross}};
    written.push_back(out_dir / "report.json");
    write_json_file(written.back(), doc);
  }
  if (formats.count(ReportFormat::svg)) {
    std::vector<NamedCurve> curves;
    for (const auto& m : models) {
      if (m.anchor || m.score) {
        written.push_back(out_dir / ("layer_sweep_" + file_safe(m.id) + ".svg"));
        write_text(written.back(), render_layer_sweep_svg(m.id, m.anchor ? &*m.anchor : nullptr,
                                                          m.score ? &*m.score : nullptr));
      }
      if (m.fusion) curves.push_back({m.id, *m.fusion});
    }
    if (!curves.empty()) {
      written.push_back(out_dir / "fusion.svg");
      write_text(written.back(), render_fusion_svg(curves));
    }
  }
  return written;
}

}  // namespace anchorprobe
