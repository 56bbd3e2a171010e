#include "oanbv/experiments.hpp"

#include "oanbv/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace oanbv {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::oa_nbv: return "oa_nbv";
    case Method::volumetric: return "volumetric";
    case Method::pred: return "pred";
    case Method::shell_oa: return "shell_oa";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::oa_nbv, Method::volumetric, Method::pred, Method::shell_oa}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (valid: oa_nbv, volumetric, pred, shell_oa)");
}

std::string_view sampler_name(Sampler s) { return s == Sampler::elevation ? "elevation" : "shell"; }

SceneGenConfig PipelineConfig::scene_config() const {
  SceneGenConfig c;
  c.robot = robot;
  c.K = K;
  c.stride = stride;
  c.detection = detection;
  return c;
}

std::uint64_t suite_scene_seed(std::uint64_t seed, ScenarioFamily family, int index) {
  return mix_seed(seed, std::uint64_t(family) + 1, std::uint64_t(index));
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t w = std::min<std::size_t>(n, std::size_t(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

int default_workers() { return std::max(1, int(std::thread::hardware_concurrency())); }

std::pair<double, double> compute_metrics(const Observation& obs, const RayCaster& caster, bool detected) {
  if (!detected) return {0.0, 0.0};
  return {target_area(obs), oracle_keypoint_visibility(caster, obs.cam, obs.K).ratio()};
}

namespace {

struct Perception {
  bool detected = false;
  double area = 0.0;
  double r_vis = 0.0;
};

Perception perceive(const Observation& obs, const RayCaster& caster, const PipelineConfig& cfg) {
  Perception p;
  const double area = target_area(obs);
  const auto kv = oracle_keypoint_visibility(caster, obs.cam, obs.K);
  p.detected = oracle_detection(area, kv.n_vis, cfg.detection);
  if (p.detected) {
    p.area = area;
    p.r_vis = kv.ratio();
  }
  return p;
}

struct Hypothesis {
  LabeledMesh mesh;  // world frame
  std::vector<Vector3> target_points;  // world frame
  double mpvpe = 0.0;
  bool skipped = false;
  bool degenerate = false;
};

// Algorithm-1 stand-in: perturbed template, oracle parts, part-aware ICP.
Hypothesis estimate_target(const Scene& scene, const RayCaster& caster, const Observation& obs,
                           const PipelineConfig& cfg, std::uint64_t seed) {
  const Pose3d& cam = obs.cam;
  PartVisibilityConfig pv = cfg.parts;
  pv.seed = mix_seed(seed, 0x9a);
  const PartSet parts = visible_parts(caster, cam, cfg.K, pv);
  const LabeledMesh init = perturb_initial_mesh(scene.target, cam, mix_seed(seed, 0x9b), cfg.perturb)
                               .transformed(cam.inverse());
  AlignConfig ac = cfg.align;
  ac.seed = mix_seed(seed, 0x9c);
  AlignmentResult res = align_target(obs, init, parts, ac);
  Hypothesis h;
  h.mesh = res.aligned.transformed(cam);
  h.mpvpe = mpvpe(h.mesh, scene.target);
  h.skipped = res.skipped;
  h.degenerate = res.degenerate;
  h.target_points.reserve(res.p_tgt.size());
  for (const auto& p : res.p_tgt.points) h.target_points.push_back(cam * p);
  return h;
}

std::vector<Vector3> world_points(const Observation& obs) {
  std::vector<Vector3> out;
  out.reserve(obs.cloud.size());
  for (const auto& p : obs.cloud.points) out.push_back(obs.cam * p);
  return out;
}

// Ground-truth-derived completion standing in for a learned completer.
std::vector<Vector3> oracle_completion(const LabeledMesh& gt, double fraction, double jitter, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xc0));
  std::vector<std::uint32_t> idx(gt.vertex_count());
  std::iota(idx.begin(), idx.end(), 0u);
  const std::size_t take = std::size_t(std::lround(fraction * double(idx.size())));
  for (std::size_t k = 0; k < take; ++k) std::swap(idx[k], idx[k + rng.index(idx.size() - k)]);
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  std::vector<Vector3> out;
  out.reserve(take);
  for (auto i : idx) {
    const double jx = rng.normal(0.0, jitter), jy = rng.normal(0.0, jitter), jz = rng.normal(0.0, jitter);
    out.push_back(gt.vertices[i] + Vector3(jx, jy, jz));
  }
  return out;
}

std::vector<CandidateView> elevation_candidates(const RayCaster& caster, const Pose3d& base, const Pose3d& cam,
                                                const Vector3& centroid, const PipelineConfig& cfg,
                                                std::uint64_t seed) {
  const ElevationMap map = build_elevation_map(caster, base, cam.translation(), cfg.elevation);
  const double ground = base.translation().z() - cfg.robot.standing_height;
  const TraversableSet trav = traversable_cells(map, base.translation().head<2>(), ground, cfg.h_step);
  ElevationSamplerConfig sc = cfg.sampler;
  sc.robot = cfg.robot;
  return sample_candidates_elevation(trav, map, base, centroid, sc, seed);
}

std::vector<CandidateView> shell_candidates(const Vector3& centroid, const PipelineConfig& cfg, std::uint64_t seed) {
  ShellSamplerConfig sc = cfg.shell;
  sc.robot = cfg.robot;
  return sample_candidates_shell(centroid, sc, seed);
}

const CandidateView& select_oa(const std::vector<CandidateView>& cands, const LabeledMesh& mesh,
                               const std::vector<Vector3>& scene_points, const PipelineConfig& cfg) {
  const auto scored = evaluate_candidates(cands, mesh.vertices, scene_points, cfg.K, cfg.weights, cfg.evaluator);
  const auto& best = select_best(scored, cfg.evaluator.min_visible);
  return cands[std::size_t(&best - scored.data())];
}

bool footprint_blocked(const Scene& scene, const Vector3& base_xy) {
  return std::any_of(scene.occluders.begin(), scene.occluders.end(),
                     [&](const Box& b) { return b.footprint_contains(base_xy.x(), base_xy.y()); });
}

}  // namespace

CandidateView ground_project(const CandidateView& cand, const Scene& scene, const Vector3& centroid,
                             const RobotModel& robot) {
  const Vector3 b = cand.base.translation();
  const Vector3 ground(b.x(), b.y(), scene.terrain.height_at(b.x(), b.y()) + robot.standing_height);
  const double yaw = std::atan2(centroid.y() - ground.y(), centroid.x() - ground.x());
  CandidateView out = cand;
  out.base = base_pose(ground, yaw);
  const Vector3 cam = out.base * robot.mount.translation();
  const double pitch = std::atan2(cam.z() - centroid.z(), std::hypot(centroid.x() - cam.x(), centroid.y() - cam.y()));
  out.pitch = std::clamp(pitch, robot.pitch_min, robot.pitch_max);
  out.cam = camera_from_base(out.base, out.pitch, robot.mount, robot.pitch_min, robot.pitch_max);
  return out;
}

TrialRecord run_trial(const Scene& scene, Method method, const PipelineConfig& cfg, std::uint64_t trial_seed) {
  TrialRecord rec;
  rec.seed = scene.seed;
  rec.family = scene.family;
  rec.method = method;
  const RayCaster caster(scene);

  Pose3d base = scene.spawn_base;
  Pose3d cam_body = scene.spawn_camera(cfg.robot);
  std::optional<LabeledMesh> hypothesis;
  std::optional<OccupancyGrid> grid;
  if (method == Method::volumetric) grid = OccupancyGrid::covering(scene, cfg.voxel_size);
  std::vector<Vector3> predicted, observed_target;
  if (method == Method::pred) {
    predicted = oracle_completion(scene.target, cfg.pred_fraction, cfg.pred_jitter, trial_seed);
  }

  for (int it = 0; it <= cfg.iterations; ++it) {
    IterationRecord ir;
    ir.iteration = it;
    const Pose3d cam = optical_pose(cam_body);
    ir.cam = cam;
    const Observation obs = render_observation(caster, cam, cfg.K, cfg.stride);
    const Perception seen = perceive(obs, caster, cfg);
    ir.detected = seen.detected;
    ir.area = seen.area;
    ir.r_vis = seen.r_vis;
    if (it == cfg.iterations) {
      rec.iterations.push_back(ir);
      break;
    }

    const std::uint64_t it_seed = mix_seed(trial_seed, std::uint64_t(it));
    if (seen.detected) {
      Hypothesis h = estimate_target(scene, caster, obs, cfg, it_seed);
      ir.mpvpe = h.mpvpe;
      ir.alignment_skipped = h.skipped;
      ir.icp_degenerate = h.degenerate;
      hypothesis = std::move(h.mesh);
      observed_target.insert(observed_target.end(), h.target_points.begin(), h.target_points.end());
    } else {
      ir.stale_hypothesis = hypothesis.has_value();
    }
    if (grid) integrate_observation(*grid, obs);

    // Without any hypothesis yet, aim at a point straight ahead.
    const Vector3 centroid = hypothesis ? hypothesis->centroid()
                                        : Vector3(cam_body * Vector3(3.0, 0.0, 0.0));
    const std::uint64_t sampler_seed = mix_seed(it_seed, 0x5a);
    std::vector<CandidateView> cands;
    try {
      cands = method == Method::shell_oa ? shell_candidates(centroid, cfg, sampler_seed)
                                         : elevation_candidates(caster, base, cam, centroid, cfg, sampler_seed);
    } catch (const std::exception&) {
      cands.clear();
    }
    ir.candidates = int(cands.size());
    if (cands.empty()) {
      rec.iterations.push_back(ir);
      continue;  // nowhere to go; observe again from here
    }

    const std::vector<Vector3> scene_points = world_points(obs);
    CandidateView next;
    switch (method) {
      case Method::oa_nbv:
      case Method::shell_oa: {
        next = hypothesis ? select_oa(cands, *hypothesis, scene_points, cfg) : cands.front();
        if (method == Method::shell_oa) next = ground_project(next, scene, centroid, cfg.robot);
        break;
      }
      case Method::volumetric: {
        std::vector<double> gains(cands.size());
        for (std::size_t c = 0; c < cands.size(); ++c) {
          gains[c] = double(volumetric_gain(cands[c], *grid, cfg.K, cfg.volumetric_rays));
        }
        next = cands[select_max_gain(cands, gains)];
        break;
      }
      case Method::pred: {
        const auto novel = novel_points(predicted, observed_target, cfg.pred_novelty);
        const PointChunks chunks(scene_points);
        std::vector<double> gains(cands.size());
        for (std::size_t c = 0; c < cands.size(); ++c) {
          gains[c] = double(pred_gain_novel(cands[c], novel, chunks, cfg.K, cfg.evaluator));
        }
        next = cands[select_max_gain(cands, gains)];
        break;
      }
    }
    base = next.base;
    cam_body = next.cam;
    rec.iterations.push_back(ir);
  }
  return rec;
}

CandidateTable score_spawn_candidates(const Scene& scene, const PipelineConfig& cfg, std::uint64_t trial_seed) {
  const RayCaster caster(scene);
  const Pose3d cam = optical_pose(scene.spawn_camera(cfg.robot));
  const Observation obs = render_observation(caster, cam, cfg.K, cfg.stride);
  const std::uint64_t it_seed = mix_seed(trial_seed, 0);
  const Hypothesis h = estimate_target(scene, caster, obs, cfg, it_seed);
  const auto cands =
      elevation_candidates(caster, scene.spawn_base, cam, h.mesh.centroid(), cfg, mix_seed(it_seed, 0x5a));
  const std::vector<Vector3> points = world_points(obs);

  CandidateTable t;
  t.scored = evaluate_candidates(cands, h.mesh.vertices, points, cfg.K, cfg.weights, cfg.evaluator);
  OccupancyGrid grid = OccupancyGrid::covering(scene, cfg.voxel_size);
  integrate_observation(grid, obs);
  const auto predicted = oracle_completion(scene.target, cfg.pred_fraction, cfg.pred_jitter, trial_seed);
  const auto novel = novel_points(predicted, h.target_points, cfg.pred_novelty);
  const PointChunks chunks(points);
  for (const auto& c : cands) {
    t.volumetric_gain.push_back(volumetric_gain(c, grid, cfg.K, cfg.volumetric_rays));
    t.pred_gain.push_back(pred_gain_novel(c, novel, chunks, cfg.K, cfg.evaluator));
  }
  return t;
}

// --- Aggregation ------------------------------------------------------------

AggregateTable aggregate(const std::vector<TrialRecord>& records) {
  std::map<std::pair<int, int>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) {
    if (!r.error.empty() || r.iterations.empty()) continue;
    groups[{int(r.family), int(r.method)}].push_back(&r);
  }
  AggregateTable table;
  for (const auto& [key, recs] : groups) {
    const auto family = ScenarioFamily(key.first);
    const auto method = Method(key.second);
    std::size_t n_iter = 0;
    for (const auto* r : recs) n_iter = std::max(n_iter, r->iterations.size());
    PeakSummary peak{method, family, long(recs.size()), 0.0, 0.0, 0.0};
    for (std::size_t it = 0; it < n_iter; ++it) {
      long n = 0, success = 0, n_mp = 0;
      double area = 0.0, rvis = 0.0, mp = 0.0;
      for (const auto* r : recs) {
        if (it >= r->iterations.size()) continue;
        const auto& ir = r->iterations[it];
        ++n;
        success += ir.detected;
        area += ir.area;
        rvis += ir.r_vis;
        if (ir.mpvpe) {
          mp += *ir.mpvpe;
          ++n_mp;
        }
      }
      IterationSummary s{method, family, int(it), n, 0.0, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN()};
      if (n > 0) {
        s.success_rate = double(success) / double(n);
        s.mean_area = area / double(n);
        s.mean_rvis = rvis / double(n);
      }
      if (n_mp > 0) s.mean_mpvpe = mp / double(n_mp);
      table.per_iteration.push_back(s);
      if (it >= 1) {
        peak.peak_success = std::max(peak.peak_success, s.success_rate);
        peak.peak_area = std::max(peak.peak_area, s.mean_area);
        peak.peak_rvis = std::max(peak.peak_rvis, s.mean_rvis);
      }
    }
    table.peaks.push_back(peak);
  }
  return table;
}

// --- Comparison -------------------------------------------------------------

std::vector<TrialRecord> run_comparison(const ComparisonConfig& cmp, const PipelineConfig& cfg) {
  const std::size_t per_family = std::size_t(std::max(0, cmp.scenes));
  const std::size_t n_tasks = cmp.families.size() * per_family;
  const std::size_t n_methods = cmp.methods.size();
  std::vector<TrialRecord> out(n_tasks * n_methods);
  const SceneGenConfig gen = cfg.scene_config();
  parallel_for(n_tasks, cmp.workers, [&](std::size_t task) {
    const ScenarioFamily family = cmp.families[task / per_family];
    const int index = int(task % per_family);
    const std::uint64_t scene_seed = suite_scene_seed(cmp.seed, family, index);
    const std::uint64_t trial_seed = mix_seed(scene_seed, 0x7);
    std::optional<Scene> scene;
    std::string error;
    try {
      scene = generate_scene(family, scene_seed, gen);
    } catch (const GenerationError& e) {
      error = e.what();
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      TrialRecord& rec = out[task * n_methods + m];
      if (scene) {
        rec = run_trial(*scene, cmp.methods[m], cfg, trial_seed);
      } else {
        rec.seed = scene_seed;
        rec.family = family;
        rec.method = cmp.methods[m];
        rec.error = error;
      }
    }
  });
  return out;
}

// --- Weight sweep -----------------------------------------------------------

SweepTrial prepare_sweep_trial(const Scene& scene, const PipelineConfig& cfg, std::uint64_t trial_seed) {
  SweepTrial t;
  t.seed = scene.seed;
  t.family = scene.family;
  const RayCaster caster(scene);
  const Pose3d cam = optical_pose(scene.spawn_camera(cfg.robot));
  const Observation obs = render_observation(caster, cam, cfg.K, cfg.stride);
  const std::uint64_t it_seed = mix_seed(trial_seed, 0);
  const Hypothesis h = estimate_target(scene, caster, obs, cfg, it_seed);
  const auto cands =
      elevation_candidates(caster, scene.spawn_base, cam, h.mesh.centroid(), cfg, mix_seed(it_seed, 0x5a));
  const PointChunks scene_points(world_points(obs));
  t.n_m = long(h.mesh.vertex_count());
  t.n_I = cfg.K.pixel_count();
  for (const auto& c : cands) {
    const auto counts = count_visibility(c.optical(), h.mesh.vertices, scene_points, cfg.K, cfg.evaluator);
    t.n_in.push_back(counts.n_in);
    t.n_occ.push_back(counts.n_occ);
    t.r_vis.push_back(oracle_keypoint_visibility(caster, c.optical(), cfg.K).ratio());
    t.ids.push_back(c.id);
  }
  return t;
}

std::vector<Weights> sweep_grid(double step) {
  if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("sweep grid step must lie in (0, 1]");
  const int n = int(std::lround(1.0 / step));
  std::vector<Weights> out;
  for (int a = 0; a <= n; ++a) {
    for (int o = 0; o + a <= n; ++o) {
      Weights w;
      w.w_a = a * step;
      w.w_o = o * step;
      w.w_v = std::max(0.0, 1.0 - w.w_a - w.w_o);
      out.push_back(w);
    }
  }
  return out;
}

int sweep_select(const SweepTrial& t, const Weights& w, double min_visible) {
  const auto framed = [&](std::size_t c) { return double(t.n_in[c]) >= min_visible * double(t.n_m); };
  bool gated = false;
  for (std::size_t c = 0; c < t.n_in.size(); ++c) gated = gated || (t.n_in[c] > 0 && framed(c));
  int best = -1;
  double best_score = -1.0;
  for (std::size_t c = 0; c < t.n_in.size(); ++c) {
    if (t.n_in[c] <= 0 || (gated && !framed(c))) continue;
    const double s = score_counts(CandidateView{}, t.n_m, t.n_in[c], t.n_occ[c], t.n_I, w).s_total;
    if (s > best_score || (s == best_score && t.ids[c] < t.ids[std::size_t(best)])) {
      best_score = s;
      best = int(c);
    }
  }
  return best;
}

std::vector<SweepCell> evaluate_sweep(const std::vector<SweepTrial>& trials, double step, double min_visible) {
  std::vector<SweepCell> cells;
  for (const Weights& w : sweep_grid(step)) {
    SweepCell cell;
    cell.w_o = w.w_o;
    cell.w_a = w.w_a;
    cell.w_v = w.w_v;
    std::vector<double> achieved;
    for (const auto& t : trials) {
      if (!t.error.empty()) continue;
      const int c = sweep_select(t, w, min_visible);
      if (c >= 0) achieved.push_back(t.r_vis[std::size_t(c)]);
    }
    cell.trials = long(achieved.size());
    if (!achieved.empty()) {
      double sum = 0.0;
      for (double v : achieved) sum += v;
      cell.mean_rvis = sum / double(achieved.size());
      double ss = 0.0;
      for (double v : achieved) ss += (v - cell.mean_rvis) * (v - cell.mean_rvis);
      cell.std_rvis = std::sqrt(ss / double(achieved.size()));
      if (cell.std_rvis > 0.0) {
        cell.snr = cell.mean_rvis / cell.std_rvis;
      } else {
        cell.snr = kSnrSentinel;
        cell.zero_std = true;
      }
    }
    cells.push_back(cell);
  }
  return cells;
}

SweepResult weight_sweep(const SweepConfig& sweep, const PipelineConfig& cfg) {
  if (sweep.trials <= 0) throw std::invalid_argument("sweep needs at least one trial");
  SweepResult res;
  res.trials.resize(std::size_t(sweep.trials));
  const SceneGenConfig gen = cfg.scene_config();
  parallel_for(res.trials.size(), sweep.workers, [&](std::size_t i) {
    const ScenarioFamily family = i % 2 == 0 ? ScenarioFamily::indoor : ScenarioFamily::outdoor;
    const std::uint64_t scene_seed = suite_scene_seed(sweep.seed, family, int(i / 2));
    try {
      const Scene scene = generate_scene(family, scene_seed, gen);
      res.trials[i] = prepare_sweep_trial(scene, cfg, mix_seed(scene_seed, 0x7));
    } catch (const std::exception& e) {
      res.trials[i].seed = scene_seed;
      res.trials[i].family = family;
      res.trials[i].error = e.what();
    }
  });
  res.cells = evaluate_sweep(res.trials, sweep.grid_step, cfg.evaluator.min_visible);
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    const auto& cell = res.cells[c];
    if (cell.trials == 0) continue;
    if (res.best < 0) {
      res.best = int(c);
      continue;
    }
    const auto& b = res.cells[std::size_t(res.best)];
    if (cell.snr > b.snr || (cell.snr == b.snr && cell.mean_rvis > b.mean_rvis)) res.best = int(c);
  }
  return res;
}

// --- Ablations --------------------------------------------------------------

std::vector<AlignmentAblationRow> ablation_alignment(const AlignmentAblationConfig& abl, const PipelineConfig& cfg) {
  if (abl.seeds <= 0 || abl.families.empty()) throw std::invalid_argument("alignment ablation needs seeds");
  std::vector<AlignmentAblationRow> rows(std::size_t(abl.seeds));
  const SceneGenConfig gen = cfg.scene_config();
  parallel_for(rows.size(), abl.workers, [&](std::size_t i) {
    AlignmentAblationRow& row = rows[i];
    row.family = abl.families[i % abl.families.size()];
    row.seed = suite_scene_seed(abl.seed, row.family, int(i));
    try {
      const Scene scene = generate_scene(row.family, row.seed, gen);
      const RayCaster caster(scene);
      const Pose3d cam = optical_pose(scene.spawn_camera(cfg.robot));
      const Observation obs = render_observation(caster, cam, cfg.K, cfg.stride);
      const std::uint64_t s = mix_seed(row.seed, 0xab);
      PartVisibilityConfig pv = cfg.parts;
      pv.seed = mix_seed(s, 0x9a);
      const PartSet parts = visible_parts(caster, cam, cfg.K, pv);
      const Pose3d to_cam = cam.inverse();
      const LabeledMesh gt_cam = scene.target.transformed(to_cam);
      const LabeledMesh init = perturb_initial_mesh(scene.target, cam, mix_seed(s, 0x9b), cfg.perturb).transformed(to_cam);
      AlignConfig ac = cfg.align;
      ac.seed = mix_seed(s, 0x9c);
      const auto part = align_target(obs, init, parts, ac);
      const auto full = align_target(obs, init, PartSet{}, ac);
      row.visible_parts = parts.size();
      row.mpvpe_init = mpvpe(init, gt_cam);
      row.mpvpe_part = mpvpe(part.aligned, gt_cam);
      row.mpvpe_full = mpvpe(full.aligned, gt_cam);
      row.part_degenerate = part.degenerate;
      row.full_degenerate = full.degenerate;
      row.skipped = part.skipped || full.skipped;
    } catch (const GenerationError& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::vector<ViewpointAblationRow> ablation_viewpoint_gen(const ViewpointAblationConfig& abl,
                                                         const PipelineConfig& cfg) {
  if (abl.trials <= 0 || abl.families.empty()) throw std::invalid_argument("viewpoint ablation needs trials");
  const std::size_t per_family = std::size_t(abl.trials);
  const std::size_t n_tasks = abl.families.size() * per_family;
  std::vector<ViewpointAblationRow> rows(n_tasks * 2);
  const SceneGenConfig gen = cfg.scene_config();
  parallel_for(n_tasks, abl.workers, [&](std::size_t task) {
    const ScenarioFamily family = abl.families[task / per_family];
    const std::uint64_t scene_seed = suite_scene_seed(abl.seed, family, int(task % per_family));
    for (int s = 0; s < 2; ++s) {
      rows[task * 2 + s].seed = scene_seed;
      rows[task * 2 + s].family = family;
      rows[task * 2 + s].sampler = Sampler(s);
    }
    try {
      const Scene scene = generate_scene(family, scene_seed, gen);
      const RayCaster caster(scene);
      const Pose3d cam = optical_pose(scene.spawn_camera(cfg.robot));
      const Observation obs = render_observation(caster, cam, cfg.K, cfg.stride);
      const std::uint64_t it_seed = mix_seed(mix_seed(scene_seed, 0x7), 0);
      const Hypothesis h = estimate_target(scene, caster, obs, cfg, it_seed);
      const Vector3 centroid = h.mesh.centroid();
      const auto scene_points = world_points(obs);
      const Vector3 gt_centroid = scene.target.centroid();
      for (int s = 0; s < 2; ++s) {
        ViewpointAblationRow& row = rows[task * 2 + s];
        const auto cands = Sampler(s) == Sampler::elevation
                               ? elevation_candidates(caster, scene.spawn_base, cam, centroid, cfg,
                                                      mix_seed(it_seed, 0x5a))
                               : shell_candidates(centroid, cfg, mix_seed(it_seed, 0x5a));
        if (cands.empty()) {
          row.error = "no candidates";
          continue;
        }
        const CandidateView chosen = select_oa(cands, h.mesh, scene_points, cfg);
        const CandidateView reached =
            Sampler(s) == Sampler::shell ? ground_project(chosen, scene, centroid, cfg.robot) : chosen;
        row.selected = chosen.cam.translation();
        row.reached = reached.cam.translation();
        row.inside_obstacle = scene.inside_occluder(row.selected) || scene.inside_occluder(row.reached) ||
                              footprint_blocked(scene, reached.base.translation());
        row.los_lost = !row.inside_obstacle &&
                       caster.segment_blocked(row.reached, gt_centroid, 0.0, RayFilter{true, true, false, {}});
        const Pose3d view = reached.optical();
        const Observation next = render_observation(caster, view, cfg.K, cfg.stride);
        const Perception p = perceive(next, caster, cfg);
        row.success = p.detected;
        row.area = p.area;
        row.r_vis = p.r_vis;
      }
    } catch (const GenerationError& e) {
      for (int s = 0; s < 2; ++s) rows[task * 2 + s].error = e.what();
    }
  });
  return rows;
}

}  // namespace oanbv
