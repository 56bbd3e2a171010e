#include <doctest.h>

#include "oanbv/occupancy.hpp"
#include "oanbv/random.hpp"
#include "oanbv/scoring.hpp"

#include <cmath>

using namespace oanbv;

namespace {

CandidateView candidate_at(const Pose3d& optical, int id = 0) {
  CandidateView c;
  c.cam = optical * Pose3d(body_from_optical<double>(), Vector3::Zero()).inverse();
  c.id = id;
  return c;
}

// Each vertex is occluded when some scene point in front of it (beyond the
// margin) has a footprint covering the vertex's pixel.
VisibilityCounts brute_counts(const Pose3d& cam, std::span<const Vector3> mesh, std::span<const Vector3> scene,
                              const CameraIntrinsics& K, const EvaluatorConfig& cfg) {
  const Pose3d inv = cam.inverse();
  VisibilityCounts out;
  for (const auto& v : mesh) {
    const auto pv = project(K, Vector3(inv * v));
    if (!pv || !in_frame(K, pv->u, pv->v)) continue;
    ++out.n_in;
    const long u = pixel_index(pv->u), w = pixel_index(pv->v);
    for (const auto& s : scene) {
      const auto ps = project(K, Vector3(inv * s));
      if (!ps) continue;
      if (std::abs(pixel_index(ps->u) - u) > cfg.splat_radius || std::abs(pixel_index(ps->v) - w) > cfg.splat_radius)
        continue;
      if (ps->depth < pv->depth * (1.0 - cfg.margin)) {
        ++out.n_occ;
        break;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("score terms follow the count algebra") {
  const Weights w{0.2, 0.3, 0.5};
  const auto s = score_counts(CandidateView{}, 200, 150, 30, 1000, w);
  CHECK(s.s_v == doctest::Approx(0.75));
  CHECK(s.s_a == doctest::Approx(0.15));
  CHECK(s.s_o == doctest::Approx(0.8));
  CHECK(s.s_total == doctest::Approx(0.2 * 0.75 + 0.3 * 0.15 + 0.5 * 0.8));
  CHECK(score_counts(CandidateView{}, 200, 0, 0, 1000, w).s_total == 0.0);
}

TEST_CASE("basis weights isolate each term") {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const long n_m = 1 + long(rng.index(5000));
    const long n_in = 1 + long(rng.index(std::uint64_t(n_m)));
    const long n_occ = long(rng.index(std::uint64_t(n_in + 1)));
    const long n_I = 307200;
    const auto v = score_counts(CandidateView{}, n_m, n_in, n_occ, n_I, Weights{1, 0, 0});
    const auto a = score_counts(CandidateView{}, n_m, n_in, n_occ, n_I, Weights{0, 1, 0});
    const auto o = score_counts(CandidateView{}, n_m, n_in, n_occ, n_I, Weights{0, 0, 1});
    CHECK(v.s_total == v.s_v);
    CHECK(a.s_total == a.s_a);
    CHECK(o.s_total == o.s_o);
  }
}

TEST_CASE("weights must be a convex combination") {
  CHECK_NOTHROW(Weights{}.validate());
  CHECK_THROWS_AS((Weights{0.5, 0.6, 0.2}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Weights{-0.1, 0.6, 0.5}.validate()), std::invalid_argument);
}

TEST_CASE("a wall of points occludes the vertices behind it") {
  const CameraIntrinsics K;
  std::vector<Vector3> mesh, wall;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) mesh.emplace_back(0.05 * i, 0.05 * j, 4.0);
  for (int i = -40; i <= 0; ++i)
    for (int j = -40; j <= 40; ++j) wall.emplace_back(0.005 * i, 0.005 * j, 2.0);
  const auto c = count_visibility(Pose3d::identity(), mesh, wall, K);
  CHECK(c.n_in == 121);
  // Columns i <= 0 are behind the wall.
  CHECK(c.n_occ == 66);
  // Points behind the mesh do not occlude it.
  std::vector<Vector3> far;
  for (const auto& p : wall) far.push_back(p + Vector3(0, 0, 5));
  CHECK(count_visibility(Pose3d::identity(), mesh, far, K).n_occ == 0);
}

TEST_CASE("scoring matches a brute-force occlusion oracle") {
  const CameraIntrinsics K;
  for (int inst = 0; inst < 30; ++inst) {
    Rng rng(mix_seed(inst, 17));
    std::vector<Vector3> mesh(300), scene(500);
    for (auto& p : mesh) p = Vector3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(3, 4));
    for (auto& p : scene) p = Vector3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 6));
    const Pose3d cam(rot_y(rng.uniform(-0.3, 0.3)), Vector3(rng.normal(0, 0.2), rng.normal(0, 0.2), 0));
    EvaluatorConfig cfg;
    cfg.splat_radius = int(rng.index(3));
    const auto fast = count_visibility(cam, mesh, scene, K, cfg);
    const auto slow = brute_counts(cam, mesh, scene, K, cfg);
    CHECK(fast.n_in == slow.n_in);
    CHECK(fast.n_occ == slow.n_occ);
    const PointChunks chunks(scene, 0.3);
    const auto chunked = count_visibility(cam, mesh, chunks, K, cfg);
    CHECK(chunked.n_in == fast.n_in);
    CHECK(chunked.n_occ == fast.n_occ);
  }
}

TEST_CASE("point chunks keep every point once") {
  Rng rng(6);
  std::vector<Vector3> pts(1000);
  for (auto& p : pts) p = Vector3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2));
  const PointChunks chunks(pts, 0.5);
  CHECK(chunks.points().size() == pts.size());
  std::uint32_t next = 0;
  for (const auto& c : chunks.chunks()) {
    CHECK(c.begin == next);
    next = c.end;
    for (auto n = c.begin; n < c.end; ++n) CHECK((chunks.points()[n] - c.center).norm() <= c.radius + 1e-12);
  }
  CHECK(next == pts.size());
  CHECK_THROWS_AS(PointChunks(pts, 0.0), std::invalid_argument);
}

TEST_CASE("evaluate_candidates equals evaluate_viewpoint") {
  const CameraIntrinsics K;
  Rng rng(8);
  std::vector<Vector3> mesh(200), scene(2000);
  for (auto& p : mesh) p = Vector3(rng.uniform(3, 4), rng.uniform(-0.5, 0.5), rng.uniform(0, 1.7));
  for (auto& p : scene) p = Vector3(rng.uniform(0, 6), rng.uniform(-3, 3), rng.uniform(0, 1.5));
  std::vector<CandidateView> cands;
  for (int k = 0; k < 20; ++k) {
    CandidateView c;
    c.cam = look_at(Vector3(rng.uniform(0, 2), rng.uniform(-2, 2), 0.5), Vector3(3.5, 0, 0.8));
    c.id = k;
    cands.push_back(c);
  }
  const auto all = evaluate_candidates(cands, mesh, scene, K, Weights{});
  REQUIRE(all.size() == cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k) {
    const auto one = evaluate_viewpoint(cands[k], mesh, scene, K, Weights{});
    CHECK(all[k].n_in == one.n_in);
    CHECK(all[k].n_occ == one.n_occ);
    CHECK(all[k].s_total == one.s_total);
  }
}

TEST_CASE("selection gate and tie breaking") {
  std::vector<ScoredCandidate> s(3);
  s[0].candidate.id = 5;
  s[0].s_v = 0.5;
  s[0].s_total = 0.9;
  s[1].candidate.id = 2;
  s[1].s_v = 1.0;
  s[1].s_total = 0.7;
  s[2].candidate.id = 1;
  s[2].s_v = 1.0;
  s[2].s_total = 0.7;
  CHECK(select_best(s, 0.0).candidate.id == 5);
  CHECK(select_best(s, 0.98).candidate.id == 1);
  s[1].s_v = s[2].s_v = 0.1;
  CHECK(select_best(s, 0.98).candidate.id == 5);
  CHECK_THROWS_AS(select_best(std::span<const ScoredCandidate>{}), std::invalid_argument);

  std::vector<CandidateView> c(3);
  c[0].id = 4;
  c[1].id = 3;
  c[2].id = 9;
  const std::vector<double> g = {2.0, 2.0, 1.0};
  CHECK(select_max_gain(c, g) == 1);
}

TEST_CASE("novel points and prediction gain") {
  const CameraIntrinsics K;
  std::vector<Vector3> observed = {Vector3(3, 0, 0)};
  std::vector<Vector3> predicted = {Vector3(3, 0, 0.01), Vector3(3, 0, 1.0), Vector3(3, 0, -1.0)};
  const auto novel = novel_points(predicted, observed, 0.05);
  CHECK(novel.size() == 2);
  const CandidateView c = candidate_at(optical_pose(Pose3d::identity()));
  CHECK(pred_gain(c, predicted, observed, {}, K) == 2);
  const std::vector<Vector3> blocker = {Vector3(1.5, 0, 0.5)};
  CHECK(pred_gain(c, predicted, observed, blocker, K) == 1);
  CHECK(pred_gain_novel(c, novel, PointChunks(blocker), K) == 1);
}

TEST_CASE("voxel traversal visits a straight line in order") {
  const OccupancyGrid g(Vector3::Zero(), 1.0, 10, 10, 10);
  std::vector<int> xs;
  traverse_voxels(g, Vector3(0.5, 0.5, 0.5), Vector3(5.5, 0.5, 0.5), [&](int i, int j, int k) {
    CHECK(j == 0);
    CHECK(k == 0);
    xs.push_back(i);
    return true;
  });
  CHECK(xs == std::vector<int>{0, 1, 2, 3, 4, 5});
  int visits = 0;
  traverse_voxels(g, Vector3(-5, 0.5, 0.5), Vector3(20, 0.5, 0.5), [&](int, int, int) { return ++visits < 3; });
  CHECK(visits == 3);
  int diag = 0;
  traverse_voxels(g, Vector3(0.5, 0.5, 0.5), Vector3(3.5, 3.5, 3.5), [&](int, int, int) { return ++diag, true; });
  CHECK(diag >= 4);
  CHECK(diag <= 10);
}

TEST_CASE("occupancy integration and volumetric gain") {
  Scene s;
  s.terrain.heights.assign(std::size_t(s.terrain.cells_x + 1) * (s.terrain.cells_y + 1), 0.0);
  s.target_spec.pose = Pose3d(rot_z(M_PI), Vector3(3.0, 0.0, 0.0));
  rebuild_target(s);
  const RayCaster rc(s);
  const CameraIntrinsics K;
  const Pose3d body = look_at(Vector3(0, 0, 0.5), Vector3(3, 0, 0.8));
  const Observation obs = render_observation(rc, optical_pose(body), K, 4);

  OccupancyGrid grid = OccupancyGrid::covering(s, 0.1);
  CandidateView c;
  c.cam = body;
  const long before = volumetric_gain(c, grid, K, 64);
  integrate_observation(grid, obs);
  CHECK(grid.count(VoxelState::occupied) > 0);
  CHECK(grid.count(VoxelState::free) > grid.count(VoxelState::occupied));
  const long after = volumetric_gain(c, grid, K, 64);
  CHECK(before > 0);
  CHECK(after < before);

  // Occupied never reverts.
  const auto states = grid.states();
  integrate_observation(grid, obs);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == std::uint8_t(VoxelState::occupied)) CHECK(grid.states()[i] == states[i]);
  }
}

TEST_CASE("more occluders never raise s_o") {
  const CameraIntrinsics K;
  Rng rng(30);
  std::vector<Vector3> mesh(150), scene;
  for (auto& p : mesh) p = Vector3(rng.uniform(-0.5, 0.5), rng.uniform(-0.8, 0.8), rng.uniform(3, 3.5));
  CandidateView c = candidate_at(Pose3d::identity());
  double last = 2.0;
  for (int round = 0; round < 10; ++round) {
    for (int k = 0; k < 40; ++k) scene.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 5));
    const auto s = evaluate_viewpoint(c, mesh, scene, K, Weights{});
    CHECK(s.s_o <= last);
    CHECK(s.n_occ <= s.n_in);
    CHECK(s.n_in <= s.n_m);
    last = s.s_o;
  }
}

TEST_CASE("selection is invariant under increasing score transforms") {
  Rng rng(31);
  std::vector<ScoredCandidate> s(50);
  for (int i = 0; i < 50; ++i) {
    s[i].candidate.id = i;
    s[i].s_v = 1.0;
    s[i].s_total = double(rng.index(10)) / 10.0;
  }
  const int before = select_best(s).candidate.id;
  for (auto& c : s) c.s_total = std::exp(3.0 * c.s_total) + 1.0;
  CHECK(select_best(s).candidate.id == before);
}
