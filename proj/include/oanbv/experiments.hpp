#pragma once

#include "oanbv/alignment.hpp"
#include "oanbv/occupancy.hpp"
#include "oanbv/scoring.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oanbv {

enum class Method : std::uint8_t { oa_nbv, volumetric, pred, shell_oa };

std::string_view method_name(Method m);
/// Throws std::invalid_argument listing the valid names.
Method parse_method(std::string_view name);

/// Every knob the NBV loop reads.
struct PipelineConfig {
  CameraIntrinsics K;
  int stride = 2;
  RobotModel robot;
  DetectionThresholds detection;
  ElevationConfig elevation;
  double h_step = 0.15;
  ElevationSamplerConfig sampler;
  ShellSamplerConfig shell;
  Weights weights;
  EvaluatorConfig evaluator;
  PerturbConfig perturb;
  AlignConfig align;
  PartVisibilityConfig parts;
  int iterations = 5;
  int volumetric_rays = 96;
  double voxel_size = 0.1;
  /// Oracle completion for the prediction baseline.
  double pred_fraction = 0.3;
  double pred_jitter = 0.03;
  double pred_novelty = 0.05;

  SceneGenConfig scene_config() const;
};

struct IterationRecord {
  int iteration = 0;
  /// Optical camera pose in world.
  Pose3d cam;
  bool detected = false;
  double area = 0.0;
  double r_vis = 0.0;
  std::optional<double> mpvpe;
  /// Planning from an earlier hypothesis because this view lost the target.
  bool stale_hypothesis = false;
  bool alignment_skipped = false;
  bool icp_degenerate = false;
  int candidates = 0;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  ScenarioFamily family = ScenarioFamily::indoor;
  Method method = Method::oa_nbv;
  std::vector<IterationRecord> iterations;
  /// Empty on success; otherwise why the trial stopped early.
  std::string error;
};

/// (A, R_vis) for a view; both 0 when not detected.
std::pair<double, double> compute_metrics(const Observation& obs, const RayCaster& caster, bool detected);

/// Observe, align, sample, score and move, `config.iterations` times.
/// Iteration 0 is the spawn view; entry i holds the view reached after i moves.
TrialRecord run_trial(const Scene& scene, Method method, const PipelineConfig& config, std::uint64_t trial_seed);

/// Runs fn(i) for i in [0, n) on `workers` threads. Each index runs exactly
/// once; the caller stores results by index, so output order never depends
/// on scheduling. The first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
int default_workers();

/// Every spawn-view candidate with its OA-NBV counts and both baseline gains,
/// using the same seeds as iteration 0 of run_trial.
struct CandidateTable {
  std::vector<ScoredCandidate> scored;
  std::vector<long> volumetric_gain;
  std::vector<long> pred_gain;
};

CandidateTable score_spawn_candidates(const Scene& scene, const PipelineConfig& config, std::uint64_t trial_seed);

// --- Aggregation ------------------------------------------------------------

struct IterationSummary {
  Method method;
  ScenarioFamily family;
  int iteration;
  long trials;
  double success_rate;
  double mean_area;
  double mean_rvis;
  /// Mean MPVPE over iterations where alignment ran; NaN when none did.
  double mean_mpvpe;
};

struct PeakSummary {
  Method method;
  ScenarioFamily family;
  long trials;
  double peak_success;
  double peak_area;
  double peak_rvis;
};

struct AggregateTable {
  std::vector<IterationSummary> per_iteration;
  /// Peak over iterations 1..N of each per-iteration mean.
  std::vector<PeakSummary> peaks;
};

/// Groups by (method, family) in first-appearance order of the sorted
/// (family, method) pairs.
AggregateTable aggregate(const std::vector<TrialRecord>& records);

// --- Comparison suite ------------------------------------------------------

struct ComparisonConfig {
  std::vector<ScenarioFamily> families = {ScenarioFamily::indoor, ScenarioFamily::outdoor};
  std::vector<Method> methods = {Method::oa_nbv, Method::volumetric, Method::pred};
  int scenes = 200;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Records ordered by (family, scene index, method). A scene that cannot be
/// generated yields records carrying the error.
std::vector<TrialRecord> run_comparison(const ComparisonConfig& cmp, const PipelineConfig& config);

/// Scene seed used for scene `index` of a suite.
std::uint64_t suite_scene_seed(std::uint64_t seed, ScenarioFamily family, int index);

// --- Weight sweep -----------------------------------------------------------

struct SweepCell {
  double w_o = 0.0;
  double w_a = 0.0;
  double w_v = 0.0;
  double snr = 0.0;
  double mean_rvis = 0.0;
  double std_rvis = 0.0;
  long trials = 0;
  /// std was zero; snr holds kSnrSentinel.
  bool zero_std = false;
};

inline constexpr double kSnrSentinel = 1e6;

/// Counts and keypoint visibility of every candidate of one sweep trial.
struct SweepTrial {
  std::uint64_t seed = 0;
  ScenarioFamily family = ScenarioFamily::indoor;
  long n_m = 0;
  long n_I = 0;
  std::vector<long> n_in;
  std::vector<long> n_occ;
  std::vector<double> r_vis;
  std::vector<int> ids;
  std::string error;
};

struct SweepConfig {
  double grid_step = 0.1;
  int trials = 500;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Samples candidates once from a spawn view and scores all of them.
SweepTrial prepare_sweep_trial(const Scene& scene, const PipelineConfig& config, std::uint64_t trial_seed);

/// Weight cells of the simplex grid, ordered by w_a then w_o.
std::vector<Weights> sweep_grid(double step);

/// Candidate picked under `w` with the same gate as select_best (n_in = 0
/// candidates always excluded), or -1.
int sweep_select(const SweepTrial& trial, const Weights& w, double min_visible = 0.0);

std::vector<SweepCell> evaluate_sweep(const std::vector<SweepTrial>& trials, double step, double min_visible = 0.0);

struct SweepResult {
  std::vector<SweepTrial> trials;
  std::vector<SweepCell> cells;
  /// Index into cells of the highest SNR (ties: higher mean R_vis, then order).
  int best = -1;
};

/// Trials alternate indoor and outdoor scenes.
SweepResult weight_sweep(const SweepConfig& sweep, const PipelineConfig& config);

// --- Ablations --------------------------------------------------------------

struct AlignmentAblationRow {
  std::uint64_t seed = 0;
  ScenarioFamily family = ScenarioFamily::indoor;
  double mpvpe_init = 0.0;
  double mpvpe_part = 0.0;
  double mpvpe_full = 0.0;
  int visible_parts = 0;
  bool part_degenerate = false;
  bool full_degenerate = false;
  bool skipped = false;
  std::string error;
};

struct AlignmentAblationConfig {
  int seeds = 100;
  std::uint64_t seed = 0;
  std::vector<ScenarioFamily> families = {ScenarioFamily::indoor, ScenarioFamily::outdoor};
  int workers = 1;
};

std::vector<AlignmentAblationRow> ablation_alignment(const AlignmentAblationConfig& abl, const PipelineConfig& config);

enum class Sampler : std::uint8_t { elevation, shell };
std::string_view sampler_name(Sampler s);

struct ViewpointAblationRow {
  std::uint64_t seed = 0;
  ScenarioFamily family = ScenarioFamily::indoor;
  Sampler sampler = Sampler::elevation;
  bool success = false;
  bool inside_obstacle = false;
  bool los_lost = false;
  double r_vis = 0.0;
  double area = 0.0;
  /// Selected camera before ground projection.
  Vector3 selected = Vector3::Zero();
  /// Camera the robot actually reaches.
  Vector3 reached = Vector3::Zero();
  std::string error;
};

struct ViewpointAblationConfig {
  int trials = 10;
  std::uint64_t seed = 0;
  /// Outdoor scenes are the cluttered setting, indoor the open one.
  std::vector<ScenarioFamily> families = {ScenarioFamily::outdoor, ScenarioFamily::indoor};
  int workers = 1;
};

/// Robot pose that realizes a shell viewpoint on the ground: base on the
/// terrain under it, yawed at `centroid`, pitch clamped to the working range.
CandidateView ground_project(const CandidateView& cand, const Scene& scene, const Vector3& centroid,
                             const RobotModel& robot);

std::vector<ViewpointAblationRow> ablation_viewpoint_gen(const ViewpointAblationConfig& abl,
                                                         const PipelineConfig& config);

}  // namespace oanbv
