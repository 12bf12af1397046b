#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "anchorprobe/error.hpp"
#include "anchorprobe/json_io.hpp"
#include "anchorprobe/pipeline.hpp"
#include "anchorprobe/report.hpp"
#include "anchorprobe/stimulus.hpp"
#include "anchorprobe/synthetic.hpp"

namespace fs = std::filesystem;
using namespace anchorprobe;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& text) {
  std::vector<T> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    T v{};
    try {
      if constexpr (std::is_integral_v<T>) {
        v = static_cast<T>(std::stoll(s, &used));
      } else {
        v = static_cast<T>(std::stod(s, &used));
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ValidationError("not a number: '" + s + "'");
    out.push_back(v);
  }
  return out;
}

void emit(const Json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_json_file(out, doc);
    std::cerr << "wrote " << out << "\n";
  }
}

std::string config_template(int text_height, int padding) {
  Json cfg{{"schema_version", kSchemaVersion},
           {"seed", 42},
           {"out_dir", "results"},
           {"stages", {"forge", "ingest", "behave", "probe", "fusion", "pca", "report"}},
           {"inputs",
            {{"images", "images"},
             {"scores", "scores.csv"},
             {"anchored_tensors", "anchored.apt"},
             {"clean_tensors", "clean.apt"}}},
           {"thresholds", {{"anchor_breakthrough", 0.95}, {"score_breakthrough", 0.5}, {"fusion", 0.95}}},
           {"forge",
            {{"anchors", {0, 2, 4, 6, 8, 10}},
             {"formulation", "baseline"},
             {"blur", {2, 5, 10}},
             {"jpeg", {30, 15, 5}},
             {"text_height", text_height},
             {"padding", padding}}},
           {"behave", {{"alternative", "two_sided"}, {"include_clean_group", false}}},
           {"probe", {{"k", 5}, {"l2", 1.0}, {"lambda", 1.0}, {"saturation_epsilon", 0.001}, {"bootstrap_resamples", 1000}}},
           {"fusion", {{"anchor", nullptr}}},
           {"pca", {{"components", 10}, {"include_clean", false}}},
           {"report", {{"formats", {"csv", "json", "svg"}}}}};
  return cfg.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchorprobe: visual anchoring bias audit toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "anchorprobe 0.3.0");

  // forge
  auto* forge_cmd = app.add_subcommand("forge", "Render anchored and degraded stimuli");
  std::string f_images, f_out, f_anchors = "0,2,4,6,8,10", f_forms = "baseline", f_blur, f_jpeg;
  std::uint64_t f_seed = kDefaultSeed;
  int f_height = kDefaultTextHeight, f_padding = kDefaultPadding;
  unsigned f_threads = 1;
  forge_cmd->add_option("--images", f_images, "Directory of <city>_<id>.{png,jpg} base images")->required();
  forge_cmd->add_option("--anchors", f_anchors, "Comma-separated anchor values (empty for none)");
  forge_cmd->add_option("--formulation", f_forms, "Comma-separated formulations");
  forge_cmd->add_option("--blur", f_blur, "Comma-separated Gaussian blur sigmas");
  forge_cmd->add_option("--jpeg", f_jpeg, "Comma-separated JPEG qualities");
  forge_cmd->add_option("--seed", f_seed, "Placement seed");
  forge_cmd->add_option("--text-height", f_height, "Overlay text height in pixels");
  forge_cmd->add_option("--padding", f_padding, "Overlay box padding in pixels");
  forge_cmd->add_option("--threads", f_threads, "Worker threads");
  forge_cmd->add_option("--out", f_out, "Output directory")->required();

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate tensor files and a score table");
  std::vector<std::string> i_tensors;
  std::string i_scores, i_out;
  ingest_cmd->add_option("--tensors", i_tensors, ".apt files (repeatable)");
  ingest_cmd->add_option("--scores", i_scores, "scores.csv");
  ingest_cmd->add_option("--out", i_out, "Output JSON (default stdout)");

  // behave
  auto* behave_cmd = app.add_subcommand("behave", "Behavioral statistics over a score table");
  std::string b_scores, b_out, b_alt = "two_sided";
  bool b_seven = false;
  behave_cmd->add_option("--scores", b_scores, "scores.csv")->required();
  behave_cmd->add_option("--alternative", b_alt, "two_sided, greater or less (Wilcoxon)");
  behave_cmd->add_flag("--seven-groups", b_seven, "Include clean as a seventh ANOVA group");
  behave_cmd->add_option("--out", b_out, "Output JSON (default stdout)");

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "Layer-wise linear probes");
  std::string p_tensors, p_scores, p_task = "anchor6", p_out;
  ProbeStageOptions p_opt;
  probe_cmd->add_option("--tensors", p_tensors, ".apt file")->required();
  probe_cmd->add_option("--scores", p_scores, "scores.csv (task score)");
  probe_cmd->add_option("--task", p_task, "anchor6 or score");
  probe_cmd->add_option("--k", p_opt.k, "Folds");
  probe_cmd->add_option("--seed", p_opt.seed, "Fold and bootstrap seed");
  probe_cmd->add_option("--l2", p_opt.l2, "Softmax L2 strength");
  probe_cmd->add_option("--lambda", p_opt.lambda, "Ridge penalty");
  probe_cmd->add_option("--anchor-threshold", p_opt.anchor_threshold, "Accuracy breakthrough threshold");
  probe_cmd->add_option("--score-threshold", p_opt.score_threshold, "R2 breakthrough threshold");
  probe_cmd->add_option("--epsilon", p_opt.saturation_epsilon, "Saturation epsilon");
  probe_cmd->add_option("--bootstrap", p_opt.bootstrap_resamples, "Bootstrap resamples");
  probe_cmd->add_option("--threads", p_opt.threads, "Worker threads (0 = all cores)");
  probe_cmd->add_option("--out", p_out, "Output JSON (default stdout)");

  // fusion
  auto* fusion_cmd = app.add_subcommand("fusion", "Anchored vs clean cosine similarity per layer");
  std::string u_anchored, u_clean, u_out;
  FusionStageOptions u_opt;
  int u_anchor = -1;
  fusion_cmd->add_option("--anchored", u_anchored, "Anchored .apt")->required();
  fusion_cmd->add_option("--clean", u_clean, "Clean .apt")->required();
  fusion_cmd->add_option("--threshold", u_opt.thresholds.fusion, "Fusion threshold");
  fusion_cmd->add_option("--drop", u_opt.thresholds.drop, "Drop threshold");
  fusion_cmd->add_option("--anchor", u_anchor, "Use only this anchor value");
  fusion_cmd->add_option("--out", u_out, "Output JSON (default stdout)");

  // pca
  auto* pca_cmd = app.add_subcommand("pca", "Explained-variance spectra per layer");
  std::string c_tensors, c_out;
  PcaStageOptions c_opt;
  pca_cmd->add_option("--tensors", c_tensors, ".apt file")->required();
  pca_cmd->add_option("--components", c_opt.components, "Components kept");
  pca_cmd->add_flag("--include-clean", c_opt.include_clean, "Pool clean rows with anchored rows");
  pca_cmd->add_option("--seed", c_opt.seed, "Randomized SVD seed");
  pca_cmd->add_option("--threads", c_opt.threads, "Worker threads (0 = all cores)");
  pca_cmd->add_option("--out", c_out, "Output JSON (default stdout)");

  // report
  auto* report_cmd = app.add_subcommand("report", "Render CSV/JSON/SVG reports from stage outputs");
  std::string r_bundle, r_behavior, r_probe, r_fusion, r_pca, r_formats = "csv,json,svg", r_out;
  report_cmd->add_option("--bundle", r_bundle, "Results bundle JSON");
  report_cmd->add_option("--behavior", r_behavior, "behave output");
  report_cmd->add_option("--probe", r_probe, "probe output");
  report_cmd->add_option("--fusion", r_fusion, "fusion output");
  report_cmd->add_option("--pca", r_pca, "pca output");
  report_cmd->add_option("--formats", r_formats, "Comma-separated: csv, json, svg");
  report_cmd->add_option("--out", r_out, "Output directory")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute a pipeline config");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "Pipeline config JSON")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic demo bundle");
  std::string s_out;
  synthetic::ProbeSpec s_spec;
  int s_width = 400, s_height = 300;
  bool s_no_images = false;
  synth_cmd->add_option("--out", s_out, "Output directory")->required();
  synth_cmd->add_option("--cities", s_spec.cities, "Cities");
  synth_cmd->add_option("--images-per-city", s_spec.images_per_city, "Images per city");
  synth_cmd->add_option("--layers", s_spec.layers, "Layers");
  synth_cmd->add_option("--dim", s_spec.dim, "Hidden dimension");
  synth_cmd->add_option("--seed", s_spec.seed, "Seed");
  synth_cmd->add_option("--width", s_width, "Base image width");
  synth_cmd->add_option("--height", s_height, "Base image height");
  synth_cmd->add_flag("--no-images", s_no_images, "Skip base images");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (forge_cmd->parsed()) {
      ForgeOptions o;
      o.images_dir = f_images;
      o.out_dir = f_out;
      o.seed = f_seed;
      o.text_height = f_height;
      o.padding = f_padding;
      o.threads = f_threads;
      std::vector<Formulation> forms;
      for (const auto& s : split_list(f_forms)) forms.push_back(parse_formulation(s));
      for (int a : parse_numbers<int>(f_anchors)) {
        for (auto f : forms) o.anchors.push_back({a, f});
      }
      for (double s : parse_numbers<double>(f_blur)) o.degradations.push_back(DegradationSpec::blur(s));
      for (int q : parse_numbers<int>(f_jpeg)) o.degradations.push_back(DegradationSpec::jpeg(q));
      const auto manifest = forge(o);
      std::size_t errors = 0;
      for (const auto& e : manifest.entries) errors += e.error ? 1 : 0;
      std::cerr << "forged " << manifest.entries.size() << " stimuli (" << errors << " errors) into " << f_out << "\n";
    } else if (ingest_cmd->parsed()) {
      std::vector<fs::path> tensors(i_tensors.begin(), i_tensors.end());
      std::optional<fs::path> scores;
      if (!i_scores.empty()) scores = i_scores;
      if (tensors.empty() && !scores) throw ValidationError("ingest needs --tensors and/or --scores");
      emit(ingest_stage(tensors, scores), i_out);
    } else if (behave_cmd->parsed()) {
      BehaveOptions o;
      o.alternative = stats::parse_alternative(b_alt);
      o.include_clean_group = b_seven;
      emit(behave_stage(load_scores(b_scores), o), b_out);
    } else if (probe_cmd->parsed()) {
      const auto task = parse_probe_task(p_task);
      const auto file = read_tensors(p_tensors);
      if (task == ProbeTask::anchor6) {
        emit(probe_stage(&file, nullptr, nullptr, {task}, p_opt), p_out);
      } else {
        if (p_scores.empty()) throw ValidationError("--task score needs --scores");
        const auto scores = load_scores(p_scores);
        emit(probe_stage(nullptr, &file, &scores, {task}, p_opt), p_out);
      }
    } else if (fusion_cmd->parsed()) {
      if (u_anchor >= 0) u_opt.anchor = u_anchor;
      emit(fusion_stage(read_tensors(u_anchored), read_tensors(u_clean), u_opt), u_out);
    } else if (pca_cmd->parsed()) {
      emit(pca_stage(read_tensors(c_tensors), c_opt), c_out);
    } else if (report_cmd->parsed()) {
      std::set<ReportFormat> formats;
      for (const auto& s : split_list(r_formats)) formats.insert(parse_report_format(s));
      Json bundle;
      if (!r_bundle.empty()) {
        bundle = read_json_file(r_bundle);
      } else {
        auto load = [](const std::string& p) -> std::optional<Json> {
          if (p.empty()) return std::nullopt;
          return read_json_file(p);
        };
        bundle = assemble_bundle(load(r_behavior), load(r_probe), load(r_fusion), load(r_pca));
      }
      for (const auto& p : render_reports(bundle, formats, r_out)) std::cerr << "wrote " << p.string() << "\n";
    } else if (run_cmd->parsed()) {
      const auto result = run_pipeline(run_config, std::cerr);
      if (result.exit_code != kExitOk) {
        std::cerr << "anchorprobe run: stage '" << result.failed_stage << "' failed: " << result.error << "\n";
      }
      return result.exit_code;
    } else if (synth_cmd->parsed()) {
      const fs::path out = s_out;
      fs::create_directories(out);
      const auto data = synthetic::make_probe_data(s_spec);
      write_tensors(data.anchored, data.anchored_manifest, out / "anchored.apt");
      write_tensors(data.clean, data.clean_manifest, out / "clean.apt");
      write_scores(data.scores, out / "scores.csv");
      if (!s_no_images) {
        synthetic::write_base_images(out / "images", synthetic::city_names(s_spec.cities),
                                     static_cast<int>(s_spec.images_per_city), s_width, s_height, s_spec.seed);
      }
      std::ofstream cfg(out / "config.json");
      cfg << config_template(20, 4);
      std::cerr << "wrote synthetic bundle to " << out.string() << "\n";
    }
    return kExitOk;
  } catch (const MissingDependency& e) {
    std::cerr << "anchorprobe: missing dependency: " << e.what() << "\n";
    return kExitMissingDependency;
  } catch (const ValidationError& e) {
    std::cerr << "anchorprobe: validation failed: " << e.what() << "\n";
    return kExitValidation;
  } catch (const FormatError& e) {
    std::cerr << "anchorprobe: invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "anchorprobe: invalid argument: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "anchorprobe: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
