#include "anchorprobe/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <ostream>
#include <set>

#include "anchorprobe/digest.hpp"
#include "anchorprobe/dimension.hpp"
#include "anchorprobe/folds.hpp"
#include "anchorprobe/report.hpp"
#include "anchorprobe/serialize.hpp"
#include "anchorprobe/sweep.hpp"

namespace fs = std::filesystem;

namespace anchorprobe {

namespace {

struct Subset {
  LayerTensorSet tensors;
  std::vector<SampleRecord> manifest;
};

Subset select_rows(const TensorFile& file, const std::vector<std::size_t>& rows) {
  const auto& t = file.tensors;
  Subset out{LayerTensorSet(t.layers(), rows.size(), t.dim(), t.pooling()), {}};
  for (std::size_t l = 0; l < t.layers(); ++l) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t d = 0; d < t.dim(); ++d) out.tensors.at(l, i, d) = t.at(l, rows[i], d);
    }
  }
  for (auto r : rows) out.manifest.push_back(file.manifest[r]);
  return out;
}

std::vector<std::size_t> rows_with(const std::vector<SampleRecord>& manifest, Condition c) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (manifest[i].condition == c) out.push_back(i);
  }
  return out;
}

std::string model_of(const std::vector<SampleRecord>& manifest) {
  std::set<std::string> ids;
  for (const auto& r : manifest) ids.insert(r.model_id);
  if (ids.size() > 1) throw ValidationError("tensor manifest mixes several model ids");
  return ids.empty() ? std::string() : *ids.begin();
}

Json json_warnings(const std::vector<std::string>& w) { return Json(w); }

}  // namespace

// ---------------------------------------------------------------- ingest

Json ingest_stage(const std::vector<fs::path>& tensor_files, const std::optional<fs::path>& scores_file) {
  Json tensors = Json::array();
  for (const auto& path : tensor_files) {
    const auto file = read_tensors(path);
    for (const auto& r : file.manifest) r.validate();
    std::map<std::string, std::size_t> by_condition;
    for (const auto& r : file.manifest) ++by_condition[std::string(to_string(r.condition))];
    Json counts = Json::object();
    for (const auto& [k, v] : by_condition) counts[k] = v;
    tensors.push_back(Json{{"path", path.filename().string()},
                           {"sha256", sha256_file(path)},
                           {"manifest_sha256", sha256_file(sidecar_path(path))},
                           {"layers", file.tensors.layers()},
                           {"samples", file.tensors.samples()},
                           {"dim", file.tensors.dim()},
                           {"pooling", std::string(to_string(file.tensors.pooling()))},
                           {"model_id", model_of(file.manifest)},
                           {"conditions", counts}});
  }
  Json doc{{"schema_version", kSchemaVersion}, {"stage", "ingest"}, {"tensors", tensors}};
  if (scores_file) {
    const auto table = load_scores(*scores_file);
    table.validate();
    doc["scores"] = Json{{"path", scores_file->filename().string()},
                         {"sha256", sha256_file(*scores_file)},
                         {"rows", table.rows.size()},
                         {"models", table.models()},
                         {"metrics", table.metric_names()}};
  } else {
    doc["scores"] = nullptr;
  }
  return doc;
}

// ---------------------------------------------------------------- behave

Json behave_stage(const ScoreTable& scores, const BehaveOptions& options) {
  scores.validate();
  Json models = Json::array(), errors = Json::array(), reform = Json::array(), degr = Json::array(),
       external = Json::array();
  SusceptibilityOptions sopt;
  sopt.alternative = options.alternative;
  sopt.include_clean_group = options.include_clean_group;
  for (const auto& model : scores.models()) {
    std::set<Formulation> formulations;
    bool has_baseline = false, has_degraded = false;
    for (const auto& row : scores.rows) {
      const auto& r = row.record;
      if (r.model_id != model) continue;
      if (r.condition == Condition::anchor) {
        formulations.insert(r.formulation.value_or(Formulation::baseline));
        has_baseline = has_baseline || r.formulation.value_or(Formulation::baseline) == Formulation::baseline;
      }
      if (r.condition == Condition::blur || r.condition == Condition::jpeg) has_degraded = true;
    }
    auto o = sopt;
    if (!has_baseline) o.formulation.reset();
    try {
      models.push_back(to_json(susceptibility(scores, model, o)));
    } catch (const Error& e) {
      errors.push_back(Json{{"model_id", model}, {"analysis", "susceptibility"}, {"error", e.what()}});
    }
    if (formulations.size() >= 2) {
      try {
        reform.push_back(to_json(reformulation_analysis(scores, model)));
      } catch (const Error& e) {
        errors.push_back(Json{{"model_id", model}, {"analysis", "reformulation"}, {"error", e.what()}});
      }
    }
    if (has_degraded) {
      try {
        degr.push_back(to_json(degradation_vs_anchor(scores, model)));
      } catch (const Error& e) {
        errors.push_back(Json{{"model_id", model}, {"analysis", "degradation"}, {"error", e.what()}});
      }
    }
    for (const auto& metric : scores.metric_names()) {
      try {
        RowSelection sel;
        sel.model_id = model;
        auto c = to_json(external_metric_correlation(scores, metric, sel));
        c["model_id"] = model;
        c["metric"] = metric;
        external.push_back(c);
      } catch (const Error& e) {
        errors.push_back(Json{{"model_id", model}, {"analysis", "external_metric:" + metric}, {"error", e.what()}});
      }
    }
  }
  return Json{{"schema_version", kSchemaVersion},
              {"stage", "behave"},
              {"options",
               Json{{"alternative", std::string(stats::to_string(options.alternative))},
                    {"include_clean_group", options.include_clean_group},
                    {"alpha", stats::kAlpha}}},
              {"models", models},
              {"delta_analysis", to_json(delta_analysis(scores, options.alternative))},
              {"reformulation", reform},
              {"degradation", degr},
              {"external_metrics", external},
              {"errors", errors}};
}

// ---------------------------------------------------------------- probe

ProbeTask parse_probe_task(std::string_view text) {
  if (text == "anchor6") return ProbeTask::anchor6;
  if (text == "score") return ProbeTask::score;
  throw DomainError("unknown probe task '" + std::string(text) + "' (expected anchor6 or score)");
}

std::string_view to_string(ProbeTask task) { return task == ProbeTask::anchor6 ? "anchor6" : "score"; }

Json probe_stage(const TensorFile* anchored, const TensorFile* clean, const ScoreTable* scores,
                 const std::vector<ProbeTask>& tasks, const ProbeStageOptions& options) {
  const bool want_anchor = std::count(tasks.begin(), tasks.end(), ProbeTask::anchor6) > 0;
  const bool want_score = std::count(tasks.begin(), tasks.end(), ProbeTask::score) > 0;
  if (want_anchor && !anchored) throw ValidationError("anchor6 probe needs anchored tensors");
  if (want_score && (!clean || !scores)) throw ValidationError("score probe needs clean tensors and scores");

  std::vector<SampleRecord> all;
  if (anchored) all.insert(all.end(), anchored->manifest.begin(), anchored->manifest.end());
  if (clean) all.insert(all.end(), clean->manifest.begin(), clean->manifest.end());
  const auto folds = assign_folds(all, options.k, options.seed);

  SweepOptions sopt;
  sopt.l2 = options.l2;
  sopt.lambda = options.lambda;
  sopt.saturation_epsilon = options.saturation_epsilon;
  sopt.bootstrap_resamples = options.bootstrap_resamples;
  sopt.seed = options.seed;
  sopt.threads = options.threads;

  Json doc{{"schema_version", kSchemaVersion},
           {"stage", "probe"},
           {"model_id", model_of(anchored ? anchored->manifest : clean->manifest)},
           {"options",
            Json{{"k", options.k},
                 {"seed", options.seed},
                 {"l2", options.l2},
                 {"lambda", options.lambda},
                 {"anchor_threshold", options.anchor_threshold},
                 {"score_threshold", options.score_threshold},
                 {"saturation_epsilon", options.saturation_epsilon},
                 {"bootstrap_resamples", options.bootstrap_resamples}}},
           {"fold_warnings", json_warnings(folds.warnings)}};

  std::optional<LayerSweepResult> anchor_sweep, score_sweep;
  if (want_anchor) {
    const auto subset = select_rows(*anchored, rows_with(anchored->manifest, Condition::anchor));
    if (subset.manifest.empty()) throw ValidationError("anchored tensors contain no anchor rows");
    const auto labels = anchor_labels(subset.manifest);
    sopt.threshold = options.anchor_threshold;
    sopt.softmax.classes = kAnchorClassCount;
    anchor_sweep = classification_sweep(subset.tensors, subset.manifest, labels, folds, sopt);
    doc["anchor6"] = Json{{"rows", subset.manifest.size()},
                          {"classes", kAnchorClassCount},
                          {"sweep", to_json(*anchor_sweep)}};
  }
  if (want_score) {
    std::map<std::string, double> by_key;
    for (const auto& row : scores->rows) by_key.emplace(row_key(row.record), row.score);
    std::vector<std::size_t> rows;
    std::vector<double> targets;
    std::size_t missing = 0;
    for (auto i : rows_with(clean->manifest, Condition::clean)) {
      auto it = by_key.find(row_key(clean->manifest[i]));
      if (it == by_key.end()) {
        ++missing;
        continue;
      }
      rows.push_back(i);
      targets.push_back(it->second);
    }
    if (rows.size() < 2) throw ValidationError("fewer than two clean tensor rows have a score");
    const auto subset = select_rows(*clean, rows);
    sopt.threshold = options.score_threshold;
    score_sweep = regression_sweep(subset.tensors, subset.manifest, targets, folds, sopt);
    Json warnings = Json::array();
    if (missing > 0) warnings.push_back(std::to_string(missing) + " clean rows had no score and were excluded");
    doc["score"] = Json{{"rows", rows.size()}, {"sweep", to_json(*score_sweep)}, {"warnings", warnings}};
  }
  if (anchor_sweep && score_sweep && anchor_sweep->saturation) {
    const std::size_t sat = *anchor_sweep->saturation;
    if (sat < score_sweep->per_layer.size() && sat != score_sweep->optimal) {
      const auto cmp = compare_layers(*score_sweep, score_sweep->optimal, sat);
      doc["saturation_vs_optimal"] = cmp ? to_json(*cmp) : Json(nullptr);
    } else {
      doc["saturation_vs_optimal"] = nullptr;
    }
  }
  return doc;
}

// ---------------------------------------------------------------- fusion

Json fusion_stage(const TensorFile& anchored, const TensorFile& clean, const FusionStageOptions& options) {
  PairingOptions pairing;
  pairing.anchor = options.anchor;
  auto curve = similarity_curve(anchored.tensors, anchored.manifest, clean.tensors, clean.manifest, pairing);
  analyze_curve(curve, options.thresholds);
  const auto& t = options.thresholds;
  return Json{{"schema_version", kSchemaVersion},
              {"stage", "fusion"},
              {"model_id", model_of(anchored.manifest)},
              {"anchors", options.anchor ? Json(*options.anchor) : Json("pooled")},
              {"thresholds",
               Json{{"fusion", t.fusion},
                    {"drop", t.drop},
                    {"divergence_margin", t.divergence_margin},
                    {"jitter", t.jitter},
                    {"early_layers", t.early_layers},
                    {"instant_max_layer", t.instant_max_layer}}},
              {"curve", to_json(curve)}};
}

// ---------------------------------------------------------------- pca

Json pca_stage(const TensorFile& tensors, const PcaStageOptions& options) {
  Pc1Options popt;
  popt.include_clean = options.include_clean;
  popt.n_components = options.components;
  popt.pca.seed = options.seed;
  popt.threads = options.threads;
  const auto trajectory = pc1_trajectory(tensors.tensors, tensors.manifest, popt);

  Json silhouettes = Json::array();
  if (options.silhouette) {
    const auto anchored_rows = rows_with(tensors.manifest, Condition::anchor);
    if (!anchored_rows.empty()) {
      const auto subset = select_rows(tensors, anchored_rows);
      const auto labels = anchor_labels(subset.manifest);
      for (std::size_t l = 0; l < subset.tensors.layers(); ++l) {
        const Eigen::MatrixXd x = subset.tensors.layer(l).cast<double>();
        try {
          silhouettes.push_back(Json{{"layer", l}, {"silhouette", number_or_null(silhouette(project_2d(x), labels))}});
        } catch (const Error& e) {
          silhouettes.push_back(Json{{"layer", l}, {"silhouette", nullptr}, {"error", e.what()}});
        }
      }
    }
  }
  return Json{{"schema_version", kSchemaVersion},
              {"stage", "pca"},
              {"model_id", model_of(tensors.manifest)},
              {"rows", options.include_clean ? "anchored+clean" : "anchored"},
              {"components", options.components},
              {"projection", "pca-2d"},
              {"layers", to_json(trajectory)},
              {"silhouette", silhouettes}};
}

// ---------------------------------------------------------------- bundle

Json assemble_bundle(const std::optional<Json>& behavior, const std::optional<Json>& probe,
                     const std::optional<Json>& fusion, const std::optional<Json>& pca) {
  Json bundle{{"schema_version", kSchemaVersion}};
  bundle["susceptibility"] = behavior ? behavior->at("models") : Json::array();
  std::map<std::string, Json> models;
  std::vector<std::string> order;
  auto slot = [&](const std::string& id) -> Json& {
    if (!models.count(id)) {
      order.push_back(id);
      models[id] = Json{{"model_id", id}, {"anchor_sweep", nullptr}, {"score_sweep", nullptr},
                        {"fusion", nullptr}, {"pca", nullptr}};
    }
    return models[id];
  };
  if (probe) {
    auto& m = slot(probe->at("model_id").get<std::string>());
    if (probe->contains("anchor6")) m["anchor_sweep"] = probe->at("anchor6").at("sweep");
    if (probe->contains("score")) m["score_sweep"] = probe->at("score").at("sweep");
  }
  if (fusion) slot(fusion->at("model_id").get<std::string>())["fusion"] = fusion->at("curve");
  if (pca) slot(pca->at("model_id").get<std::string>())["pca"] = pca->at("layers");
  Json arr = Json::array();
  for (const auto& id : order) arr.push_back(models[id]);
  bundle["models"] = arr;
  return bundle;
}

// ---------------------------------------------------------------- runner

const std::vector<std::string>& pipeline_stage_order() {
  static const std::vector<std::string> order = {"forge", "ingest", "behave", "probe", "fusion", "pca", "report"};
  return order;
}

namespace {

struct Config {
  fs::path base;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> stages;
  double anchor_threshold = 0.95, score_threshold = 0.5, fusion_threshold = 0.95;
  Json raw;

  std::optional<fs::path> input(const char* key) const {
    const auto& in = raw.at("inputs");
    auto it = in.find(key);
    if (it == in.end() || it->is_null()) return std::nullopt;
    const auto p = base / it->get<std::string>();
    if (!fs::exists(p)) throw ValidationError(std::string("config: inputs.") + key + " does not exist: " + p.string());
    return p;
  }
  Json section(const char* key) const {
    auto it = raw.find(key);
    return it == raw.end() ? Json::object() : *it;
  }
};

double require_number(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ValidationError("config: '" + where + "." + key + "' must be given explicitly as a number");
  }
  return it->get<double>();
}

Config parse_config(const fs::path& path) {
  Config c;
  try {
    c.raw = read_json_file(path);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  const auto& j = c.raw;
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw ValidationError("config schema_version must be " + std::to_string(kSchemaVersion));
  }
  if (!j.contains("seed") || !j.at("seed").is_number_unsigned()) {
    throw ValidationError("config: 'seed' must be given explicitly as a non-negative integer");
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("thresholds") || !j.at("thresholds").is_object()) {
    throw ValidationError("config: 'thresholds' must be given explicitly");
  }
  const auto& t = j.at("thresholds");
  c.anchor_threshold = require_number(t, "anchor_breakthrough", "thresholds");
  c.score_threshold = require_number(t, "score_breakthrough", "thresholds");
  c.fusion_threshold = require_number(t, "fusion", "thresholds");
  if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty()) {
    throw ValidationError("config: 'stages' must be a non-empty array");
  }
  const auto& known = pipeline_stage_order();
  for (const auto& s : j.at("stages")) {
    const auto name = s.get<std::string>();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ValidationError("config: unknown stage '" + name + "'");
    }
    if (std::find(c.stages.begin(), c.stages.end(), name) != c.stages.end()) {
      throw ValidationError("config: stage '" + name + "' listed twice");
    }
    c.stages.push_back(name);
  }
  if (!j.contains("inputs") || !j.at("inputs").is_object()) throw ValidationError("config: 'inputs' object missing");
  c.base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  c.out_dir = c.base / j.value("out_dir", std::string("results"));
  return c;
}

fs::path stage_output(const Config& c, const std::string& stage) {
  if (stage == "forge") return c.out_dir / "forge" / "manifest.json";
  if (stage == "report") return c.out_dir / "report" / "report.json";
  static const std::map<std::string, std::string> names = {
      {"ingest", "ingest.json"}, {"behave", "behavior.json"}, {"probe", "probe.json"},
      {"fusion", "fusion.json"}, {"pca", "pca.json"}};
  return c.out_dir / names.at(stage);
}

std::vector<std::string> dependencies(const std::string& stage) {
  if (stage == "probe" || stage == "fusion" || stage == "pca") return {"ingest"};
  return {};
}

void check_order(const Config& c) {
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const auto& stage = c.stages[i];
    for (const auto& dep : dependencies(stage)) {
      auto pos = std::find(c.stages.begin(), c.stages.end(), dep);
      if (pos != c.stages.end() && static_cast<std::size_t>(pos - c.stages.begin()) > i) {
        throw MissingDependency("stage '" + stage + "' requires '" + dep + "', which is listed after it; run '" +
                                dep + "' first");
      }
      if (pos == c.stages.end() && !fs::exists(stage_output(c, dep))) {
        throw MissingDependency("stage '" + stage + "' requires '" + dep + "' output " +
                                stage_output(c, dep).string() + "; run '" + dep + "' first");
      }
    }
    if (stage == "report") {
      bool any = false;
      for (const char* up : {"behave", "probe", "fusion", "pca"}) {
        auto pos = std::find(c.stages.begin(), c.stages.end(), up);
        if (pos != c.stages.end() && static_cast<std::size_t>(pos - c.stages.begin()) > i) {
          throw MissingDependency("stage 'report' must come after '" + std::string(up) + "'");
        }
        any = any || pos != c.stages.end() || fs::exists(stage_output(c, up));
      }
      if (!any) throw MissingDependency("stage 'report' needs at least one of behave, probe, fusion or pca; run one first");
    }
  }
}

std::string digest_or_missing(const std::optional<fs::path>& p) {
  if (!p) return "none";
  if (!fs::exists(*p)) return "missing";
  if (fs::is_directory(*p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(*p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += fs::relative(f, *p).generic_string() + ":" + sha256_file(f) + "\n";
    return sha256_hex(acc);
  }
  return sha256_file(*p);
}

std::optional<fs::path> existing(const fs::path& p) {
  return fs::exists(p) ? std::optional<fs::path>(p) : std::nullopt;
}

std::optional<Json> read_if_exists(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  return read_json_file(p);
}

fs::path cache_dir(const Config& c) {
  if (const char* env = std::getenv("ANCHORPROBE_CACHE"); env && *env) return fs::path(env);
  return c.out_dir / ".cache";
}

std::vector<fs::path> list_outputs(const Config& c, const std::string& stage) {
  if (stage == "forge") {
    std::vector<fs::path> out;
    const auto dir = c.out_dir / "forge";
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  if (stage == "report") {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(c.out_dir / "report")) {
      if (e.is_regular_file()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  return {stage_output(c, stage)};
}

Json stage_params(const Config& c, const std::string& stage) {
  Json p{{"stage", stage}, {"seed", c.seed}};
  if (stage == "forge") {
    p["forge"] = c.section("forge");
    p["images"] = digest_or_missing(c.input("images"));
  } else if (stage == "ingest") {
    p["anchored"] = digest_or_missing(c.input("anchored_tensors"));
    p["anchored_manifest"] = c.input("anchored_tensors") ? digest_or_missing(sidecar_path(*c.input("anchored_tensors"))) : "none";
    p["clean"] = digest_or_missing(c.input("clean_tensors"));
    p["clean_manifest"] = c.input("clean_tensors") ? digest_or_missing(sidecar_path(*c.input("clean_tensors"))) : "none";
    p["scores"] = digest_or_missing(c.input("scores"));
  } else if (stage == "behave") {
    p["behave"] = c.section("behave");
    p["scores"] = digest_or_missing(c.input("scores"));
  } else if (stage == "probe" || stage == "fusion" || stage == "pca") {
    p[stage] = c.section(stage.c_str());
    p["thresholds"] = c.raw.at("thresholds");
    p["ingest"] = digest_or_missing(stage_output(c, "ingest"));
  } else if (stage == "report") {
    p["report"] = c.section("report");
    for (const char* up : {"behave", "probe", "fusion", "pca"}) p[up] = digest_or_missing(existing(stage_output(c, up)));
  }
  return p;
}

void run_stage(const Config& c, const std::string& stage, std::ostream& log) {
  const unsigned threads = static_cast<unsigned>(c.raw.value("threads", 0));
  if (stage == "forge") {
    const auto images = c.input("images");
    if (!images) throw ValidationError("forge needs inputs.images");
    const auto f = c.section("forge");
    ForgeOptions o;
    o.images_dir = *images;
    o.out_dir = c.out_dir / "forge";
    o.seed = c.seed;
    o.text_height = f.value("text_height", kDefaultTextHeight);
    o.padding = f.value("padding", kDefaultPadding);
    o.threads = std::max(1u, threads);
    std::vector<Formulation> forms;
    if (f.contains("formulations")) {
      for (const auto& s : f.at("formulations")) forms.push_back(parse_formulation(s.get<std::string>()));
    } else {
      forms.push_back(parse_formulation(f.value("formulation", std::string("baseline"))));
    }
    for (const auto& a : f.value("anchors", std::vector<int>{0, 2, 4, 6, 8, 10})) {
      for (auto form : forms) o.anchors.push_back({a, form});
    }
    for (double s : f.value("blur", std::vector<double>{})) o.degradations.push_back(DegradationSpec::blur(s));
    for (int q : f.value("jpeg", std::vector<int>{})) o.degradations.push_back(DegradationSpec::jpeg(q));
    if (fs::exists(o.out_dir)) fs::remove_all(o.out_dir);
    const auto manifest = forge(o);
    log << "  forged " << manifest.entries.size() << " stimuli\n";
  } else if (stage == "ingest") {
    std::vector<fs::path> tensors;
    for (const char* key : {"anchored_tensors", "clean_tensors"}) {
      if (auto p = c.input(key)) tensors.push_back(*p);
    }
    if (tensors.empty() && !c.input("scores")) throw ValidationError("ingest needs tensors or scores inputs");
    write_json_file(stage_output(c, "ingest"), ingest_stage(tensors, c.input("scores")));
  } else if (stage == "behave") {
    const auto scores = c.input("scores");
    if (!scores) throw ValidationError("behave needs inputs.scores");
    const auto b = c.section("behave");
    BehaveOptions o;
    o.alternative = stats::parse_alternative(b.value("alternative", std::string("two_sided")));
    o.include_clean_group = b.value("include_clean_group", false);
    write_json_file(stage_output(c, "behave"), behave_stage(load_scores(*scores), o));
  } else if (stage == "probe") {
    const auto p = c.section("probe");
    ProbeStageOptions o;
    o.k = p.value("k", 5);
    o.seed = c.seed;
    o.l2 = p.value("l2", 1.0);
    o.lambda = p.value("lambda", 1.0);
    o.saturation_epsilon = p.value("saturation_epsilon", 0.001);
    o.bootstrap_resamples = p.value("bootstrap_resamples", 1000);
    o.anchor_threshold = c.anchor_threshold;
    o.score_threshold = c.score_threshold;
    o.threads = threads;
    std::optional<TensorFile> anchored, clean;
    std::optional<ScoreTable> scores;
    std::vector<ProbeTask> tasks;
    if (auto a = c.input("anchored_tensors")) {
      anchored = read_tensors(*a);
      tasks.push_back(ProbeTask::anchor6);
    }
    if (auto cl = c.input("clean_tensors"); cl && c.input("scores")) {
      clean = read_tensors(*cl);
      scores = load_scores(*c.input("scores"));
      tasks.push_back(ProbeTask::score);
    }
    if (tasks.empty()) throw ValidationError("probe needs inputs.anchored_tensors or clean_tensors + scores");
    write_json_file(stage_output(c, "probe"),
                    probe_stage(anchored ? &*anchored : nullptr, clean ? &*clean : nullptr,
                                scores ? &*scores : nullptr, tasks, o));
  } else if (stage == "fusion") {
    const auto a = c.input("anchored_tensors"), cl = c.input("clean_tensors");
    if (!a || !cl) throw ValidationError("fusion needs inputs.anchored_tensors and inputs.clean_tensors");
    const auto f = c.section("fusion");
    FusionStageOptions o;
    o.thresholds.fusion = c.fusion_threshold;
    if (f.contains("anchor") && !f.at("anchor").is_null()) o.anchor = f.at("anchor").get<int>();
    write_json_file(stage_output(c, "fusion"), fusion_stage(read_tensors(*a), read_tensors(*cl), o));
  } else if (stage == "pca") {
    const auto a = c.input("anchored_tensors");
    if (!a) throw ValidationError("pca needs inputs.anchored_tensors");
    const auto p = c.section("pca");
    PcaStageOptions o;
    o.components = p.value("components", std::size_t{10});
    o.include_clean = p.value("include_clean", false);
    o.seed = c.seed;
    o.threads = threads;
    TensorFile file = read_tensors(*a);
    if (o.include_clean) {
      if (auto cl = c.input("clean_tensors")) {
        const auto extra = read_tensors(*cl);
        if (extra.tensors.layers() != file.tensors.layers() || extra.tensors.dim() != file.tensors.dim()) {
          throw ValidationError("clean tensors differ in shape from anchored tensors");
        }
        const auto& t = file.tensors;
        LayerTensorSet merged(t.layers(), t.samples() + extra.tensors.samples(), t.dim(), t.pooling());
        for (std::size_t l = 0; l < t.layers(); ++l) {
          for (std::size_t i = 0; i < t.samples(); ++i)
            for (std::size_t d = 0; d < t.dim(); ++d) merged.at(l, i, d) = t.at(l, i, d);
          for (std::size_t i = 0; i < extra.tensors.samples(); ++i)
            for (std::size_t d = 0; d < t.dim(); ++d) merged.at(l, t.samples() + i, d) = extra.tensors.at(l, i, d);
        }
        file.manifest.insert(file.manifest.end(), extra.manifest.begin(), extra.manifest.end());
        file.tensors = std::move(merged);
      }
    }
    write_json_file(stage_output(c, "pca"), pca_stage(file, o));
  } else if (stage == "report") {
    std::set<ReportFormat> formats;
    for (const auto& s : c.section("report").value("formats", std::vector<std::string>{"csv", "json", "svg"})) {
      formats.insert(parse_report_format(s));
    }
    const auto bundle = assemble_bundle(read_if_exists(stage_output(c, "behave")), read_if_exists(stage_output(c, "probe")),
                                        read_if_exists(stage_output(c, "fusion")), read_if_exists(stage_output(c, "pca")));
    const auto dir = c.out_dir / "report";
    if (fs::exists(dir)) fs::remove_all(dir);
    write_json_file(c.out_dir / "bundle.json", bundle);
    formats.insert(ReportFormat::json);  // report.json is the stage's anchor artifact
    render_reports(bundle, formats, dir);
  }
}

bool cache_lookup(const Config& c, const std::string& stage, const std::string& key) {
  const auto record = cache_dir(c) / (stage + "-" + key + ".json");
  if (!fs::exists(record)) return false;
  const auto rec = read_json_file(record);
  const auto store = cache_dir(c) / (stage + "-" + key);
  for (const auto& o : rec.at("outputs")) {
    const fs::path rel = o.at("path").get<std::string>();
    const auto target = c.out_dir / rel;
    const auto digest = o.at("sha256").get<std::string>();
    if (fs::exists(target) && sha256_file(target) == digest) continue;
    const auto saved = store / rel;
    if (!fs::exists(saved) || sha256_file(saved) != digest) return false;
    fs::create_directories(target.parent_path());
    fs::copy_file(saved, target, fs::copy_options::overwrite_existing);
  }
  return true;
}

void cache_store(const Config& c, const std::string& stage, const std::string& key,
                 const std::vector<fs::path>& outputs) {
  const auto dir = cache_dir(c);
  const auto store = dir / (stage + "-" + key);
  fs::create_directories(store);
  Json list = Json::array();
  for (const auto& p : outputs) {
    const auto rel = fs::relative(p, c.out_dir);
    list.push_back(Json{{"path", rel.generic_string()}, {"sha256", sha256_file(p)}});
    fs::create_directories((store / rel).parent_path());
    fs::copy_file(p, store / rel, fs::copy_options::overwrite_existing);
  }
  write_json_file(dir / (stage + "-" + key + ".json"), Json{{"schema_version", kSchemaVersion}, {"stage", stage},
                                                            {"key", key}, {"outputs", list}});
}

}  // namespace

PipelineResult run_pipeline(const fs::path& config_path, std::ostream& log) {
  PipelineResult result;
  std::string current = "config";
  try {
    const auto config = parse_config(config_path);
    check_order(config);
    fs::create_directories(config.out_dir);
    for (const auto& stage : config.stages) {
      current = stage;
      StageOutcome outcome;
      outcome.stage = stage;
      outcome.key = sha256_hex(stage_params(config, stage).dump());
      if (cache_lookup(config, stage, outcome.key)) {
        outcome.cache_hit = true;
        log << "[" << stage << "] cache hit " << outcome.key.substr(0, 12) << "\n";
      } else {
        log << "[" << stage << "] running\n";
        run_stage(config, stage, log);
        cache_store(config, stage, outcome.key, list_outputs(config, stage));
        log << "[" << stage << "] done " << outcome.key.substr(0, 12) << "\n";
      }
      outcome.outputs = list_outputs(config, stage);
      result.stages.push_back(std::move(outcome));
    }
    Json stages = Json::array();
    for (const auto& s : result.stages) {
      stages.push_back(Json{{"stage", s.stage}, {"cache_hit", s.cache_hit}, {"key", s.key}});
    }
    write_json_file(config.out_dir / "run.json", Json{{"schema_version", kSchemaVersion}, {"stages", stages}});
    return result;
  } catch (const MissingDependency& e) {
    result.exit_code = kExitMissingDependency;
    result.error = e.what();
  } catch (const ValidationError& e) {
    result.exit_code = kExitValidation;
    result.error = e.what();
  } catch (const FormatError& e) {
    result.exit_code = kExitValidation;
    result.error = e.what();
  } catch (const DomainError& e) {
    result.exit_code = kExitValidation;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitInternal;
    result.error = e.what();
  }
  result.failed_stage = current;
  log << "[" << current << "] failed: " << result.error << "\n";
  return result;
}

}  // namespace anchorprobe
