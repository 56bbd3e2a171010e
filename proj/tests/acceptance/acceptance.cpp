// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion names
// (C1 .. C10) to run a subset.
#include "oanbv/cli.hpp"
#include "oanbv/config.hpp"
#include "oanbv/experiments.hpp"
#include "oanbv/kdtree.hpp"
#include "oanbv/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

using namespace oanbv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename T>
std::vector<T> every_nth(const std::vector<T>& v, std::size_t limit) {
  if (v.size() <= limit) return v;
  std::vector<T> out;
  for (std::size_t k = 0; k < limit; ++k) out.push_back(v[k * v.size() / limit]);
  return out;
}

// --- C1 ----------------------------------------------------------------------

// Casts the ray from the camera through each vertex and asks whether any
// scene point's splat footprint (a (2r+1)^2 pixel square at the point's
// depth) is crossed by that ray in front of the vertex.
VisibilityCounts raycast_oracle(const Pose3d& cam, std::span<const Vector3> mesh, std::span<const Vector3> scene,
                                const CameraIntrinsics& K, const EvaluatorConfig& cfg) {
  const Pose3d inv = cam.inverse();
  std::vector<Vector3> local;
  for (const auto& s : scene) local.push_back(inv * s);
  VisibilityCounts out;
  for (const auto& v : mesh) {
    const Vector3 pv = inv * v;
    if (!(pv.z() > 0.0)) continue;
    const Vector3 dir = pv / pv.z();
    const double u = K.fx * dir.x() + K.cx, w = K.fy * dir.y() + K.cy;
    if (!in_frame(K, u, w)) continue;
    ++out.n_in;
    for (const auto& ps : local) {
      if (!(ps.z() > 0.0) || !(ps.z() < pv.z() * (1.0 - cfg.margin))) continue;
      // The ray meets the footprint's plane at dir * ps.z(); compare pixel cells.
      const double su = K.fx * ps.x() / ps.z() + K.cx, sv = K.fy * ps.y() / ps.z() + K.cy;
      if (std::abs(pixel_index(su) - pixel_index(u)) <= cfg.splat_radius &&
          std::abs(pixel_index(sv) - pixel_index(w)) <= cfg.splat_radius) {
        ++out.n_occ;
        break;
      }
    }
  }
  return out;
}

Outcome c1_scoring_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg;
  const SceneGenConfig gen = cfg.scene_config();
  int exact_in = 0, within = 0, instances = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const ScenarioFamily fam = i % 2 ? ScenarioFamily::outdoor : ScenarioFamily::indoor;
    const Scene scene = generate_scene(fam, suite_scene_seed(0xc1, fam, i / 2), gen);
    const RayCaster caster(scene);
    const Pose3d cam = optical_pose(scene.spawn_camera(gen.robot));
    const Observation obs = render_observation(caster, cam, gen.K, 4);
    const auto scene_pts = every_nth(obs.world_cloud().points, 500);
    const auto mesh = every_nth(scene.target.vertices, 300);

    // Spawn view plus a view from a random side of the target.
    Rng rng(mix_seed(i, 0xc1));
    const Vector3 c = scene.target.centroid();
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    std::vector<CandidateView> views(2);
    views[0].cam = scene.spawn_camera(gen.robot);
    views[1].cam = look_at(c + Vector3(3.0 * std::cos(a), 3.0 * std::sin(a), rng.uniform(-0.4, 0.8)), c);
    for (const auto& v : views) {
      const auto s = evaluate_viewpoint(v, mesh, scene_pts, gen.K, cfg.weights, cfg.evaluator);
      const auto o = raycast_oracle(v.optical(), mesh, scene_pts, gen.K, cfg.evaluator);
      ++instances;
      exact_in += s.n_in == o.n_in;
      const double tol = 0.03 * double(o.n_in);
      const double diff = std::abs(double(s.n_occ - o.n_occ));
      within += diff <= tol;
      if (o.n_in > 0) worst = std::max(worst, diff / double(o.n_in));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {exact_in == instances && within == instances && secs < 60.0,
          fmt("%d views on 50 scenes: n_in exact %d/%d, n_occ within 3%% %d/%d (worst %.4f), %.1f s", instances,
              exact_in, instances, within, instances, worst, secs)};
}

// --- C2 ----------------------------------------------------------------------

Outcome c2_score_algebra() {
  Rng rng(0xc2);
  int ok = 0, basis_ok = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const long n_m = 1 + long(rng.index(20000));
    const long n_in = 1 + long(rng.index(std::uint64_t(n_m)));
    const long n_occ = long(rng.index(std::uint64_t(n_in) + 1));
    const long n_I = 1 + long(rng.index(1000000));
    Weights w;
    w.w_v = rng.uniform();
    w.w_a = rng.uniform() * (1.0 - w.w_v);
    w.w_o = 1.0 - w.w_v - w.w_a;
    const auto s = score_counts(CandidateView{}, n_m, n_in, n_occ, n_I, w);
    const double expect = w.w_v * double(n_in) / double(n_m) + w.w_a * double(n_in) / double(n_I) +
                          w.w_o * (1.0 - double(n_occ) / double(n_in));
    const double err = std::abs(s.s_total - expect);
    worst = std::max(worst, err);
    ok += err <= 1e-12;
    const auto v = score_counts(CandidateView{}, n_m, n_in, n_occ, n_I, {1, 0, 0});
    const auto a = score_counts(CandidateView{}, n_m, n_in, n_occ, n_I, {0, 1, 0});
    const auto o = score_counts(CandidateView{}, n_m, n_in, n_occ, n_I, {0, 0, 1});
    basis_ok += v.s_total == v.s_v && a.s_total == a.s_a && o.s_total == o.s_o &&
                v.s_v == double(n_in) / double(n_m) && a.s_a == double(n_in) / double(n_I) &&
                o.s_o == 1.0 - double(n_occ) / double(n_in);
  }
  return {ok == 1000 && basis_ok == 1000,
          fmt("affine form %d/1000 (max err %.2e), basis weights exact %d/1000", ok, worst, basis_ok)};
}

// --- C3 ----------------------------------------------------------------------

Outcome c3_weight_sweep(int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig sw;
  sw.trials = 500;
  sw.grid_step = 0.1;
  sw.seed = 0;
  sw.workers = workers;
  const SweepResult r = weight_sweep(sw, PipelineConfig{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  long failed = 0;
  for (const auto& t : r.trials) failed += !t.error.empty();
  if (r.best < 0) return {false, "no cell had any trial"};
  const SweepCell& b = r.cells[std::size_t(r.best)];
  const bool dominant = b.w_o > std::max(b.w_v, b.w_a);
  return {dominant && secs < 1800.0,
          fmt("argmax SNR %.3f at (w_v %.2f, w_a %.2f, w_o %.2f), mean R_vis %.3f; %ld/500 trials failed; %.0f s",
              b.snr, b.w_v, b.w_a, b.w_o, b.mean_rvis, failed, secs)};
}

// --- C4 / C5 -----------------------------------------------------------------

const IterationSummary* find_iter(const AggregateTable& t, ScenarioFamily f, Method m, int it) {
  for (const auto& s : t.per_iteration)
    if (s.family == f && s.method == m && s.iteration == it) return &s;
  return nullptr;
}

const PeakSummary* find_peak(const AggregateTable& t, ScenarioFamily f, Method m) {
  for (const auto& s : t.peaks)
    if (s.family == f && s.method == m) return &s;
  return nullptr;
}

Outcome c4_iteration_jump(const AggregateTable& t) {
  const auto* i0 = find_iter(t, ScenarioFamily::indoor, Method::oa_nbv, 0);
  const auto* i1 = find_iter(t, ScenarioFamily::indoor, Method::oa_nbv, 1);
  if (!i0 || !i1) return {false, "missing indoor OA-NBV iterations"};
  const bool pass = i0->trials >= 200 && i1->mean_rvis > i0->mean_rvis && i1->mean_area > i0->mean_area &&
                    i1->mean_rvis >= 1.5 * i0->mean_rvis;
  return {pass, fmt("%ld indoor scenes: R_vis %.3f -> %.3f (x%.2f), A %.4f -> %.4f", i0->trials, i0->mean_rvis,
                    i1->mean_rvis, i1->mean_rvis / i0->mean_rvis, i0->mean_area, i1->mean_area)};
}

Outcome c5_method_ordering(const AggregateTable& t) {
  bool pass = true;
  std::string detail;
  for (ScenarioFamily f : {ScenarioFamily::indoor, ScenarioFamily::outdoor}) {
    const auto* oa = find_peak(t, f, Method::oa_nbv);
    const auto* vol = find_peak(t, f, Method::volumetric);
    const auto* pred = find_peak(t, f, Method::pred);
    if (!oa || !vol || !pred) return {false, "missing method peaks"};
    const bool ok = oa->trials >= 200 && oa->peak_success >= 0.90 &&
                    oa->peak_success >= std::max(vol->peak_success, pred->peak_success) &&
                    oa->peak_rvis >= std::max(vol->peak_rvis, pred->peak_rvis) &&
                    oa->peak_area >= std::max(vol->peak_area, pred->peak_area);
    pass = pass && ok;
    detail += fmt("%s%s n=%ld succ oa/vol/pred %.3f/%.3f/%.3f, R_vis %.3f/%.3f/%.3f, A %.4f/%.4f/%.4f",
                  detail.empty() ? "" : "; ", std::string(family_name(f)).c_str(), oa->trials, oa->peak_success,
                  vol->peak_success, pred->peak_success, oa->peak_rvis, vol->peak_rvis, pred->peak_rvis,
                  oa->peak_area, vol->peak_area, pred->peak_area);
  }
  return {pass, detail};
}

// --- C6 ----------------------------------------------------------------------

Outcome c6_alignment_ablation(int workers) {
  AlignmentAblationConfig abl;
  abl.seeds = 100;
  abl.workers = workers;
  const auto rows = ablation_alignment(abl, PipelineConfig{});
  std::vector<double> part, full;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    part.push_back(r.mpvpe_part);
    full.push_back(r.mpvpe_full);
  }
  const double mp = median(part), mf = median(full);
  const double reduction = 1.0 - mp / mf;
  return {part.size() >= 100 && mp < mf && reduction >= 0.20,
          fmt("%zu seeds: median MPVPE part %.4f m vs full %.4f m, reduction %.1f%%", part.size(), mp, mf,
              100.0 * reduction)};
}

// --- C7 ----------------------------------------------------------------------

Outcome c7_viewpoint_ablation(int workers) {
  ViewpointAblationConfig abl;
  abl.trials = 10;
  abl.families = {ScenarioFamily::outdoor};
  abl.workers = workers;
  const auto rows = ablation_viewpoint_gen(abl, PipelineConfig{});
  int elev_infeasible = 0, elev_success = 0, shell_success = 0, shell_failures = 0, elev_los = 0, errors = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++errors;
      continue;
    }
    if (r.sampler == Sampler::elevation) {
      elev_infeasible += r.inside_obstacle;
      elev_los += r.los_lost;
      elev_success += r.success;
    } else {
      shell_success += r.success;
      shell_failures += r.inside_obstacle || r.los_lost;
    }
  }
  return {errors == 0 && elev_infeasible == 0 && elev_success >= shell_success && shell_failures >= 1,
          fmt("elevation: %d/10 success, %d infeasible, %d lost sight; shell: %d/10 success, %d inside-obstacle or "
              "line-of-sight failures",
              elev_success, elev_infeasible, elev_los, shell_success, shell_failures)};
}

// --- C8 ----------------------------------------------------------------------

Outcome c8_icp() {
  LabeledMesh m = make_humanoid({}, 1.7);
  m = m.transformed(Pose3d::from_translation(-m.centroid()));
  PointCloud target;
  target.points = m.vertices;
  target.normals = vertex_normals(m);
  target.normal_valid.assign(target.size(), 1);
  IcpConfig cfg;
  cfg.max_corr = 1.0;
  cfg.max_iter = 100;
  cfg.tol = 1e-12;
  int recovered = 0, monotone = 0;
  double worst_rot = 0, worst_t = 0;
  for (int s = 0; s < 100; ++s) {
    Rng rng(mix_seed(s, 0xc8));
    const Vector3 axis = Vector3(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Vector3 dir = Vector3(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Pose3d truth(Eigen::AngleAxisd(rng.uniform(0.0, 15.0 * M_PI / 180.0), axis).toRotationMatrix(),
                       rng.uniform(0.0, 0.3) * dir);
    const Pose3d inv = truth.inverse();
    std::vector<Vector3> src, nrm;
    for (std::size_t i = 0; i < target.size(); ++i) {
      src.push_back(inv * target.points[i]);
      nrm.push_back(inv.transform_direction(target.normals[i]));
    }
    try {
      const IcpResult r = point_to_plane_icp(src, nrm, target, Pose3d::identity(), cfg);
      const double dr = rotation_angle(Matrix3(r.transform.rotation().transpose() * truth.rotation()));
      const double dt = (r.transform.translation() - truth.translation()).norm();
      worst_rot = std::max(worst_rot, dr);
      worst_t = std::max(worst_t, dt);
      recovered += dr <= 1e-3 && dt <= 1e-3;
      monotone += r.residual_history.back() <= r.residual_history.front();
    } catch (const std::exception&) {
    }
  }
  return {recovered >= 95 && monotone == 100,
          fmt("recovered %d/100 (worst %.2e rad, %.2e m), final residual <= first in %d/100", recovered, worst_rot,
              worst_t, monotone)};
}

// --- C9 ----------------------------------------------------------------------

Outcome c9_geometry() {
  Rng rng(0xc9);
  const CameraIntrinsics K;
  int proj_bad = 0, group_bad = 0, nn_bad = 0, lift_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(0, K.width), v = rng.uniform(0, K.height), z = rng.uniform(0.05, 50);
    const auto px = project(K, unproject(K, u, v, z));
    proj_bad += !px || std::abs(px->u - u) > 1e-6 || std::abs(px->v - v) > 1e-6 || std::abs(px->depth - z) > 1e-6;
  }
  const auto random_pose = [&] {
    const Vector3 axis = Vector3(rng.normal(), rng.normal(), rng.normal()).normalized();
    return Pose3d(Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), axis).toRotationMatrix(),
                  Vector3(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)));
  };
  for (int i = 0; i < 1000; ++i) {
    const Pose3d a = random_pose(), b = random_pose(), c = random_pose();
    group_bad += pose_distance((a * b) * c, a * (b * c)) > 1e-9 || pose_distance(a * a.inverse(), Pose3d()) > 1e-9 ||
                 pose_distance(a.inverse() * a, Pose3d()) > 1e-9 || pose_distance(a * Pose3d(), a) > 1e-9 ||
                 pose_distance(Pose3d() * a, a) > 1e-9;
  }
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<Vector3> pts(1 + rng.index(2000));
    for (auto& p : pts) p = Vector3(rng.uniform_int(-20, 20), rng.uniform_int(-20, 20), rng.uniform_int(-5, 5)) * 0.1;
    const KdTree tree(pts);
    bool ok = true;
    for (int q = 0; q < 50; ++q) {
      const Vector3 query(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
      const Neighbor a = tree.nearest(query), b = brute_force_nearest(pts, query);
      ok = ok && a.index == b.index && a.distance == b.distance;
    }
    nn_bad += !ok;
  }
  for (int inst = 0; inst < 100; ++inst) {
    CameraIntrinsics k;
    k.width = 64;
    k.height = 48;
    k.cx = 32;
    k.cy = 24;
    k.fx = k.fy = 50;
    std::vector<std::uint8_t> mask(std::size_t(k.pixel_count()));
    for (auto& m : mask) m = rng.bernoulli(0.4);
    PointCloud cloud;
    for (int i = 0; i < 500; ++i) cloud.points.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 5));
    const LiftedMask lm = lift_mask(cloud, k, mask);
    bool ok = lm.p_tgt.size() + lm.p_bg.size() == cloud.size();
    std::multiset<std::tuple<double, double, double>> in, out;
    for (const auto& p : cloud.points) in.insert({p.x(), p.y(), p.z()});
    for (const auto* part : {&lm.p_tgt, &lm.p_bg})
      for (const auto& p : part->points) out.insert({p.x(), p.y(), p.z()});
    ok = ok && in == out;
    for (const auto& p : lm.p_tgt.points) {
      const auto pr = project(k, p);
      ok = ok && pr && in_frame(k, pr->u, pr->v) && mask[std::size_t(pixel_index(pr->v)) * k.width + pixel_index(pr->u)];
    }
    lift_bad += !ok;
  }
  return {proj_bad == 0 && group_bad == 0 && nn_bad == 0 && lift_bad == 0,
          fmt("failures: projection %d/1000, SE(3) laws %d/1000, NN index %d/100, lift_mask partition %d/100", proj_bad,
              group_bad, nn_bad, lift_bad)};
}

// --- C10 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c10_determinism() {
  const fs::path root = fs::temp_directory_path() / "oanbv_acceptance_c10";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "small.json";
  std::ofstream(cfg) << R"({"scenes": 2, "iterations": 2, "sweep": {"trials": 6, "grid_step": 0.25},
                            "ablation": {"seeds": 4, "trials": 2},
                            "sampler": {"M": 20, "pitch_samples": 4}})";
  struct Command {
    std::vector<std::string> args;
    std::vector<std::string> files;
  };
  const std::vector<Command> commands = {
      {{"run"}, {"trials.csv", "aggregate.csv", "peaks.csv"}},
      {{"sweep"}, {"sweep_grid.csv", "sweep_cells.csv"}},
      {{"ablate", "alignment"}, {"ablation_alignment.csv"}},
      {{"ablate", "viewpoints"}, {"ablation_viewpoints.csv"}},
  };
  int identical = 0, total = 0;
  std::string bad;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<fs::path> outs;
    for (const char* workers : {"1", "1", "3"}) {
      const fs::path out = root / (std::to_string(c) + "_" + std::to_string(outs.size()));
      std::vector<std::string> args = {"--config", cfg.string(), "--seed", "11", "--workers", workers,
                                       "--out", out.string()};
      args.insert(args.end(), commands[c].args.begin(), commands[c].args.end());
      std::ostringstream o, e;
      if (run_cli(args, o, e) != kExitOk) return {false, "command failed: " + e.str()};
      outs.push_back(out);
    }
    for (const auto& f : commands[c].files) {
      ++total;
      const std::string ref = slurp(outs[0] / f);
      const bool same = !ref.empty() && ref == slurp(outs[1] / f) && ref == slurp(outs[2] / f);
      identical += same;
      if (!same) bad += " " + f;
    }
  }
  fs::remove_all(root);
  return {identical == total, fmt("%d/%d CSVs byte-identical across repeat and --workers 1 vs 3%s", identical, total,
                                  bad.empty() ? "" : (" (differ:" + bad + ")").c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> wanted(argv + 1, argv + argc);
  const auto want = [&](const std::string& c) { return wanted.empty() || wanted.count(c); };
  const int workers = default_workers();
  int failures = 0;
  const auto report = [&](const std::string& id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << name << ": " << o.detail << " [" << fmt("%.0f", secs)
              << " s]" << std::endl;
  };

  if (want("C1")) report("C1", "scoring oracle equivalence", c1_scoring_oracle);
  if (want("C2")) report("C2", "score algebra", c2_score_algebra);
  if (want("C8")) report("C8", "ICP correctness", c8_icp);
  if (want("C9")) report("C9", "geometry invariants", c9_geometry);
  if (want("C10")) report("C10", "determinism", c10_determinism);
  if (want("C6")) report("C6", "alignment ablation", [&] { return c6_alignment_ablation(workers); });
  if (want("C7")) report("C7", "viewpoint-generator ablation", [&] { return c7_viewpoint_ablation(workers); });
  if (want("C3")) report("C3", "weight-sweep dominance", [&] { return c3_weight_sweep(workers); });
  if (want("C4") || want("C5")) {
    ComparisonConfig cmp;
    cmp.scenes = 200;
    cmp.workers = workers;
    std::optional<AggregateTable> table;
    std::string error;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      table = aggregate(run_comparison(cmp, PipelineConfig{}));
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::cout << "   comparison suite: " << fmt("%.0f", std::chrono::duration<double>(
                                                            std::chrono::steady_clock::now() - t0).count())
              << " s" << std::endl;
    if (want("C4")) report("C4", "iteration-1 jump", [&] { return table ? c4_iteration_jump(*table) : Outcome{false, error}; });
    if (want("C5")) report("C5", "method ordering", [&] { return table ? c5_method_ordering(*table) : Outcome{false, error}; });
  }
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed" : "acceptance: all passed")
            << std::endl;
  return failures ? 1 : 0;
}
