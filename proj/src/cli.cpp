#include "oanbv/cli.hpp"

#include "oanbv/config.hpp"
#include "oanbv/io.hpp"
#include "oanbv/random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>

namespace oanbv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
  std::string families, methods, weights;
  int scenes = 0, iterations = 0;
  int trials = 0;
  double step = 0.0;
  int seeds = 0;
  std::string ablation;
  std::string family;
};

// Named outputs, written together once a command has finished.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }

  void write(const fs::path& dir) const {
    fs::create_directories(dir);
    for (const auto& [name, content] : files) write_text_file(dir / name, content);
  }
};

json base_manifest(const std::string& command, const RunConfig& cfg) {
  json m;
  m["tool"] = "oanbv";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config_to_json(cfg);
  m["protocol"] = {
      {"perception", "ground-truth oracles for segmentation, keypoints and detection"},
      {"lost_detection", "keep planning from the last valid target hypothesis; metrics record 0"},
      {"candidates", "all methods share the elevation sampler seed per iteration"},
  };
  return m;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_run(const RunConfig& cfg, Artifacts& art, json& manifest) {
  ComparisonConfig cmp;
  cmp.families = cfg.families;
  cmp.methods = cfg.methods;
  cmp.scenes = cfg.scenes;
  cmp.seed = cfg.seed;
  cmp.workers = cfg.workers;
  const auto records = run_comparison(cmp, cfg.pipeline);
  for (const auto& r : records) {
    if (!r.error.empty()) throw GenerationError(r.error);
  }
  const AggregateTable table = aggregate(records);
  art.add("trials.csv", trials_csv(records));
  art.add("aggregate.csv", aggregate_csv(table));
  art.add("peaks.csv", peaks_csv(table));
  manifest["trials"] = records.size();
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, Artifacts& art, json& manifest) {
  SweepConfig sw;
  sw.grid_step = cfg.grid_step;
  sw.trials = cfg.sweep_trials;
  sw.seed = cfg.seed;
  sw.workers = cfg.workers;
  const SweepResult res = weight_sweep(sw, cfg.pipeline);
  long failed = 0;
  for (const auto& t : res.trials) failed += !t.error.empty();
  if (failed == long(res.trials.size())) throw GenerationError("sweep: no trial scene could be generated");
  art.add("sweep_grid.csv", sweep_grid_csv(res.cells, cfg.grid_step));
  art.add("sweep_cells.csv", sweep_cells_csv(res.cells));
  manifest["failed_trials"] = failed;
  if (res.best >= 0) {
    const auto& c = res.cells[std::size_t(res.best)];
    manifest["argmax"] = {{"w_v", c.w_v}, {"w_a", c.w_a},           {"w_o", c.w_o},
                          {"snr", c.snr}, {"mean_rvis", c.mean_rvis}, {"zero_std", c.zero_std}};
  }
  return kExitOk;
}

int cmd_ablate(const RunConfig& cfg, const std::string& which, Artifacts& art, json& manifest) {
  if (which == "alignment") {
    AlignmentAblationConfig abl;
    abl.seeds = cfg.ablation_seeds;
    abl.seed = cfg.seed;
    abl.families = cfg.families;
    abl.workers = cfg.workers;
    const auto rows = ablation_alignment(abl, cfg.pipeline);
    std::vector<double> part, full;
    long degenerate = 0;
    for (const auto& r : rows) {
      if (!r.error.empty()) continue;
      part.push_back(r.mpvpe_part);
      full.push_back(r.mpvpe_full);
      degenerate += r.part_degenerate || r.full_degenerate;
    }
    if (part.empty()) throw GenerationError("ablate alignment: no scene could be generated");
    const double mp = median(part), mf = median(full);
    art.add("ablation_alignment.csv", alignment_ablation_csv(rows));
    manifest["summary"] = {{"median_mpvpe_part", mp},
                           {"median_mpvpe_full", mf},
                           {"median_reduction", mf > 0 ? 1.0 - mp / mf : 0.0},
                           {"degenerate_rows", degenerate},
                           {"rows", rows.size()}};
    return kExitOk;
  }
  if (which == "viewpoints") {
    ViewpointAblationConfig abl;
    abl.trials = cfg.ablation_trials;
    abl.seed = cfg.seed;
    abl.workers = cfg.workers;
    const auto rows = ablation_viewpoint_gen(abl, cfg.pipeline);
    json summary = json::object();
    for (const auto& r : rows) {
      json& s = summary[std::string(family_name(r.family))][std::string(sampler_name(r.sampler))];
      if (s.is_null()) s = {{"trials", 0}, {"success", 0}, {"inside_obstacle", 0}, {"los_lost", 0}, {"errors", 0}};
      s["trials"] = s["trials"].get<int>() + 1;
      s["success"] = s["success"].get<int>() + int(r.success);
      s["inside_obstacle"] = s["inside_obstacle"].get<int>() + int(r.inside_obstacle);
      s["los_lost"] = s["los_lost"].get<int>() + int(r.los_lost);
      s["errors"] = s["errors"].get<int>() + int(!r.error.empty());
    }
    art.add("ablation_viewpoints.csv", viewpoint_ablation_csv(rows));
    manifest["summary"] = summary;
    return kExitOk;
  }
  throw ConfigError("unknown ablation '" + which + "' (valid: alignment, viewpoints)");
}

int cmd_scene(const RunConfig& cfg, ScenarioFamily family, Artifacts& art, json& manifest) {
  const Scene scene = generate_scene(family, cfg.seed, cfg.pipeline.scene_config());
  const RayCaster caster(scene);
  const Pose3d cam = optical_pose(scene.spawn_camera(cfg.pipeline.robot));
  const Observation obs = render_observation(caster, cam, cfg.pipeline.K, cfg.pipeline.stride);
  art.add("scene.json", scene_to_json(scene).dump(2) + "\n");
  // Geometry files go through temporary paths so the artifact rule holds.
  const fs::path tmp = fs::temp_directory_path() / ("oanbv_scene_" + std::to_string(cfg.seed));
  fs::create_directories(tmp);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  write_ply(tmp / "spawn_cloud.ply", obs.world_cloud());
  write_pgm(tmp / "spawn_mask.pgm", obs.gt_mask, obs.K.width, obs.K.height);
  write_obj(tmp / "target.obj", scene.target);
  for (const char* name : {"spawn_cloud.ply", "spawn_mask.pgm", "target.obj", "target.obj.labels"}) {
    art.add(name, slurp(tmp / name));
  }
  fs::remove_all(tmp);
  art.add("spawn_candidates.csv",
          candidate_scores_csv(score_spawn_candidates(scene, cfg.pipeline, mix_seed(cfg.seed, 0x7))));
  const auto kv = oracle_keypoint_visibility(caster, cam, cfg.pipeline.K);
  manifest["spawn"] = {{"area", target_area(obs)},
                       {"n_vis", kv.n_vis},
                       {"occluded_vertex_fraction", occluded_vertex_fraction(caster, cam)}};
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occlusion-aware next-best-view simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags f;
  auto* o_config = app.add_option("--config", f.config_path, "JSON config file (flags override it)");
  auto* o_seed = app.add_option("--seed", f.seed, "Base seed");
  auto* o_workers = app.add_option("--workers", f.workers, "Worker threads (default: available cores)");
  auto* o_out = app.add_option("--out", f.out, "Output directory");
  (void)o_config;

  auto* run = app.add_subcommand("run", "Compare NBV methods over generated scene suites")->fallthrough();
  auto* o_families = run->add_option("--family,--families", f.families, "Comma-separated: indoor,outdoor");
  auto* o_methods = run->add_option("--methods", f.methods, "Comma-separated: oa_nbv,volumetric,pred,shell_oa");
  auto* o_scenes = run->add_option("--scenes", f.scenes, "Scenes per family");
  auto* o_iter = run->add_option("--iterations", f.iterations, "NBV moves per trial");
  auto* o_weights = run->add_option("--weights", f.weights, "w_v,w_a,w_o");

  auto* sweep = app.add_subcommand("sweep", "Grid sweep of evaluator weights")->fallthrough();
  auto* o_trials = sweep->add_option("--trials", f.trials, "Number of trials");
  auto* o_step = sweep->add_option("--step", f.step, "Grid step over (w_o, w_a)");

  auto* ablate = app.add_subcommand("ablate", "Ablations: alignment or viewpoints")->fallthrough();
  ablate->add_option("which", f.ablation, "alignment | viewpoints")->required();
  auto* o_seeds = ablate->add_option("--seeds", f.seeds, "Seeds for the alignment ablation");
  auto* o_atrials = ablate->add_option("--trials", f.trials, "Trials per setting for the viewpoint ablation");
  auto* o_afam = ablate->add_option("--family,--families", f.families, "Families for the alignment ablation");

  auto* scene = app.add_subcommand("scene", "Dump a generated scene for inspection")->fallthrough();
  scene->add_option("--family", f.family, "indoor | outdoor")->default_val("indoor");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  RunConfig cfg;
  cfg.workers = default_workers();
  std::string command;
  Artifacts art;
  json manifest;
  try {
    if (!f.config_path.empty()) cfg = load_config(f.config_path, cfg);
    if (o_seed->count()) cfg.seed = f.seed;
    if (o_workers->count()) cfg.workers = f.workers;
    if (o_out->count()) cfg.out = f.out;
    if (o_families->count() || o_afam->count()) cfg.families = parse_families(f.families);
    if (o_methods->count()) cfg.methods = parse_methods(f.methods);
    if (o_scenes->count()) cfg.scenes = f.scenes;
    if (o_iter->count()) cfg.pipeline.iterations = f.iterations;
    if (o_weights->count()) cfg.pipeline.weights = parse_weights(f.weights);
    if (o_trials->count()) cfg.sweep_trials = f.trials;
    if (o_atrials->count()) cfg.ablation_trials = f.trials;
    if (o_step->count()) cfg.grid_step = f.step;
    if (o_seeds->count()) cfg.ablation_seeds = f.seeds;
    validate(cfg);

    int code = kExitOk;
    if (run->parsed()) {
      command = "run";
      manifest = base_manifest(command, cfg);
      code = cmd_run(cfg, art, manifest);
    } else if (sweep->parsed()) {
      command = "sweep";
      manifest = base_manifest(command, cfg);
      code = cmd_sweep(cfg, art, manifest);
    } else if (ablate->parsed()) {
      if (f.ablation != "alignment" && f.ablation != "viewpoints") {
        throw ConfigError("unknown ablation '" + f.ablation + "' (valid: alignment, viewpoints)");
      }
      command = "ablate " + f.ablation;
      manifest = base_manifest(command, cfg);
      code = cmd_ablate(cfg, f.ablation, art, manifest);
    } else {
      command = "scene";
      ScenarioFamily family;
      try {
        family = parse_family(f.family);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      manifest = base_manifest(command, cfg);
      code = cmd_scene(cfg, family, art, manifest);
    }
    std::vector<std::string> names;
    for (const auto& [name, _] : art.files) names.push_back(name);
    manifest["outputs"] = names;
    art.add("manifest.json", manifest.dump(2) + "\n");
    art.write(cfg.out);
    out << command << ": wrote " << art.files.size() << " files to " << cfg.out << "\n";
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GenerationError& e) {
    err << "generation error: " << e.what() << "\n";
    return kExitGeneration;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace oanbv
