#include "oanbv/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace oanbv {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::string b(bool v) { return v ? "1" : "0"; }

// Appends comma-separated cells and a newline.
struct Row {
  std::string& out;
  bool first = true;
  Row& operator<<(const std::string& cell) {
    if (!first) out += ',';
    out += cell;
    first = false;
    return *this;
  }
  Row& operator<<(double v) { return *this << format_double(v); }
  Row& operator<<(long v) { return *this << std::to_string(v); }
  Row& operator<<(int v) { return *this << std::to_string(v); }
  Row& operator<<(std::uint64_t v) { return *this << std::to_string(v); }
  Row& operator<<(std::string_view v) { return *this << std::string(v); }
  ~Row() { out += '\n'; }
};

json vec3(const Vector3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vector3 vec3(const json& j) { return Vector3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

json pose_json(const Pose3d& p) {
  json rows = json::array();
  const Matrix4 m = p.matrix();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
  return rows;
}

Pose3d pose_from_json(const json& j) {
  Matrix4 m = Matrix4::Identity();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return Pose3d::from_matrix(m);
}

}  // namespace

// --- Geometry files ---------------------------------------------------------

void write_ply(const fs::path& path, const PointCloud& cloud) {
  cloud.validate();
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) out << "property double nx\nproperty double ny\nproperty double nz\n";
  if (cloud.has_labels()) out << "property uchar label\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vector3& p = cloud.points[i];
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z());
    if (cloud.has_normals()) {
      const Vector3& n = cloud.normals[i];
      out << ' ' << format_double(n.x()) << ' ' << format_double(n.y()) << ' ' << format_double(n.z());
    }
    if (cloud.has_labels()) out << ' ' << int(cloud.labels[i]);
    out << '\n';
  }
}

PointCloud read_ply(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t n = 0;
  std::vector<std::string> props;
  if (!std::getline(in, line) || line != "ply") throw IoError(path.string() + ": not a PLY file");
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw IoError(path.string() + ": only ASCII PLY is supported");
    } else if (word == "element") {
      std::string what;
      ls >> what >> n;
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    }
  }
  const auto has = [&](const char* name) { return std::find(props.begin(), props.end(), name) != props.end(); };
  const bool normals = has("nx"), labels = has("label");
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw IoError(path.string() + ": truncated vertex list");
    std::istringstream ls(line);
    std::vector<double> v(props.size());
    for (auto& x : v) {
      if (!(ls >> x)) throw IoError(path.string() + ": malformed vertex line " + std::to_string(i));
    }
    std::size_t k = 0;
    cloud.points.emplace_back(v[k], v[k + 1], v[k + 2]);
    k += 3;
    if (normals) {
      cloud.normals.emplace_back(v[k], v[k + 1], v[k + 2]);
      k += 3;
    }
    if (labels) cloud.labels.push_back(v[k] != 0.0 ? PointLabel::target : PointLabel::background);
  }
  return cloud;
}

void write_obj(const fs::path& path, const LabeledMesh& mesh) {
  auto out = open_out(path);
  for (const auto& v : mesh.vertices) {
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  auto labels = open_out(fs::path(path.string() + ".labels"));
  for (auto p : mesh.part_of) labels << int(p) << '\n';
}

LabeledMesh read_obj(const fs::path& path) {
  LabeledMesh mesh;
  auto in = open_in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw IoError(path.string() + ": malformed vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::array<std::uint32_t, 3> f{};
      for (auto& idx : f) {
        std::string tok;
        if (!(ls >> tok)) throw IoError(path.string() + ": malformed face");
        idx = std::uint32_t(std::stoul(tok.substr(0, tok.find('/'))) - 1);
      }
      mesh.faces.push_back(f);
    }
  }
  auto labels = open_in(fs::path(path.string() + ".labels"));
  int label;
  while (labels >> label) {
    if (label < 0 || label >= kPartCount) throw IoError(path.string() + ".labels: bad part label");
    mesh.part_of.push_back(PartLabel(label));
  }
  if (mesh.part_of.size() != mesh.vertices.size()) {
    throw IoError(path.string() + ".labels: label count differs from vertex count");
  }
  return mesh;
}

void write_pgm(const fs::path& path, const std::vector<std::uint8_t>& mask, int width, int height) {
  if (mask.size() != std::size_t(width) * std::size_t(height)) throw IoError("write_pgm: mask size mismatch");
  auto out = open_out(path);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (auto m : mask) out.put(m ? char(255) : char(0));
}

// --- Scenes -----------------------------------------------------------------

json scene_to_json(const Scene& scene) {
  json j;
  j["family"] = std::string(family_name(scene.family));
  j["seed"] = scene.seed;
  const Terrain& t = scene.terrain;
  j["terrain"] = {{"origin", {t.origin_x, t.origin_y}},
                  {"resolution", t.resolution},
                  {"cells", {t.cells_x, t.cells_y}},
                  {"heights", t.heights}};
  json boxes = json::array();
  for (const auto& bx : scene.occluders) {
    boxes.push_back({{"center", vec3(bx.center)}, {"half_extents", vec3(bx.half_extents)}, {"yaw", bx.yaw}});
  }
  j["occluders"] = boxes;
  const auto a = scene.target_spec.angles.as_array();
  j["target"] = {{"angles", a}, {"height", scene.target_spec.height}, {"pose", pose_json(scene.target_spec.pose)}};
  j["spawn"] = {{"base", pose_json(scene.spawn_base)}, {"pitch", scene.spawn_pitch}};
  return j;
}

Scene scene_from_json(const json& j) {
  try {
    Scene s;
    s.family = parse_family(j.at("family").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    const json& t = j.at("terrain");
    s.terrain.origin_x = t.at("origin").at(0).get<double>();
    s.terrain.origin_y = t.at("origin").at(1).get<double>();
    s.terrain.resolution = t.at("resolution").get<double>();
    s.terrain.cells_x = t.at("cells").at(0).get<int>();
    s.terrain.cells_y = t.at("cells").at(1).get<int>();
    s.terrain.heights = t.at("heights").get<std::vector<double>>();
    if (s.terrain.heights.size() != std::size_t(s.terrain.cells_x + 1) * std::size_t(s.terrain.cells_y + 1)) {
      throw IoError("scene: terrain height count does not match its grid");
    }
    for (const auto& bj : j.at("occluders")) {
      Box bx;
      bx.center = vec3(bj.at("center"));
      bx.half_extents = vec3(bj.at("half_extents"));
      bx.yaw = bj.at("yaw").get<double>();
      s.occluders.push_back(bx);
    }
    const json& tj = j.at("target");
    s.target_spec.angles = JointAngles::from_array(tj.at("angles").get<std::array<double, 8>>());
    s.target_spec.height = tj.at("height").get<double>();
    s.target_spec.pose = pose_from_json(tj.at("pose"));
    s.spawn_base = pose_from_json(j.at("spawn").at("base"));
    s.spawn_pitch = j.at("spawn").at("pitch").get<double>();
    rebuild_target(s);
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("scene: ") + e.what());
  }
}

// --- CSV tables -------------------------------------------------------------

std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::string out =
      "seed,family,method,iteration,detected,area,r_vis,mpvpe,stale_hypothesis,alignment_skipped,icp_degenerate,"
      "candidates,cam_x,cam_y,cam_z,cam_qw,cam_qx,cam_qy,cam_qz,error\n";
  for (const auto& r : records) {
    if (r.iterations.empty()) {
      Row row{out};
      row << r.seed << family_name(r.family) << method_name(r.method);
      for (int k = 0; k < 16; ++k) row << std::string();
      row << r.error;
      continue;
    }
    for (const auto& it : r.iterations) {
      const Vector3 t = it.cam.translation();
      const Eigen::Quaterniond q(it.cam.rotation());
      Row row{out};
      row << r.seed << family_name(r.family) << method_name(r.method) << it.iteration << b(it.detected) << it.area
          << it.r_vis << (it.mpvpe ? format_double(*it.mpvpe) : std::string()) << b(it.stale_hypothesis)
          << b(it.alignment_skipped) << b(it.icp_degenerate) << it.candidates << t.x() << t.y() << t.z() << q.w()
          << q.x() << q.y() << q.z() << r.error;
    }
  }
  return out;
}

std::string aggregate_csv(const AggregateTable& table) {
  std::string out = "family,method,iteration,trials,success_rate,mean_area,mean_rvis,mean_mpvpe\n";
  for (const auto& s : table.per_iteration) {
    Row row{out};
    row << family_name(s.family) << method_name(s.method) << s.iteration << s.trials << s.success_rate << s.mean_area
        << s.mean_rvis << s.mean_mpvpe;
  }
  return out;
}

std::string peaks_csv(const AggregateTable& table) {
  std::string out = "family,method,trials,peak_success,peak_area,peak_rvis\n";
  for (const auto& p : table.peaks) {
    Row row{out};
    row << family_name(p.family) << method_name(p.method) << p.trials << p.peak_success << p.peak_area << p.peak_rvis;
  }
  return out;
}

std::string sweep_grid_csv(const std::vector<SweepCell>& cells, double step) {
  const int n = int(std::lround(1.0 / step));
  std::vector<std::vector<std::string>> grid(std::size_t(n + 1), std::vector<std::string>(std::size_t(n + 1)));
  for (const auto& c : cells) {
    const int a = int(std::lround(c.w_a / step)), o = int(std::lround(c.w_o / step));
    if (a < 0 || o < 0 || a > n || o > n) continue;
    grid[std::size_t(a)][std::size_t(o)] = c.trials > 0 ? format_double(c.snr) : std::string();
  }
  std::string out;
  {
    Row header{out};
    header << std::string("w_a\\w_o");
    for (int o = 0; o <= n; ++o) header << format_double(o * step);
  }
  for (int a = 0; a <= n; ++a) {
    Row row{out};
    row << format_double(a * step);
    for (int o = 0; o <= n; ++o) row << grid[std::size_t(a)][std::size_t(o)];
  }
  return out;
}

std::string sweep_cells_csv(const std::vector<SweepCell>& cells) {
  std::string out = "w_v,w_a,w_o,trials,mean_rvis,std_rvis,snr,zero_std\n";
  for (const auto& c : cells) {
    Row row{out};
    row << c.w_v << c.w_a << c.w_o << c.trials << c.mean_rvis << c.std_rvis << c.snr << b(c.zero_std);
  }
  return out;
}

std::string candidate_scores_csv(const CandidateTable& t) {
  std::string out = "id,position_index,pitch_index,pitch,n_m,n_in,n_occ,s_v,s_a,s_o,s_total,volumetric_gain,pred_gain\n";
  for (std::size_t k = 0; k < t.scored.size(); ++k) {
    const auto& s = t.scored[k];
    Row row{out};
    row << s.candidate.id << s.candidate.position_index << s.candidate.pitch_index << s.candidate.pitch << s.n_m
        << s.n_in << s.n_occ << s.s_v << s.s_a << s.s_o << s.s_total;
    row << (k < t.volumetric_gain.size() ? std::to_string(t.volumetric_gain[k]) : std::string());
    row << (k < t.pred_gain.size() ? std::to_string(t.pred_gain[k]) : std::string());
  }
  return out;
}

std::string alignment_ablation_csv(const std::vector<AlignmentAblationRow>& rows) {
  std::string out =
      "seed,family,mpvpe_init,mpvpe_part,mpvpe_full,visible_parts,part_degenerate,full_degenerate,skipped,error\n";
  for (const auto& r : rows) {
    Row row{out};
    row << r.seed << family_name(r.family);
    if (r.error.empty()) {
      row << r.mpvpe_init << r.mpvpe_part << r.mpvpe_full << r.visible_parts << b(r.part_degenerate)
          << b(r.full_degenerate) << b(r.skipped);
    } else {
      for (int k = 0; k < 7; ++k) row << std::string();
    }
    row << r.error;
  }
  return out;
}

std::string viewpoint_ablation_csv(const std::vector<ViewpointAblationRow>& rows) {
  std::string out =
      "seed,family,sampler,success,inside_obstacle,los_lost,r_vis,area,selected_x,selected_y,selected_z,reached_x,"
      "reached_y,reached_z,error\n";
  for (const auto& r : rows) {
    Row row{out};
    row << r.seed << family_name(r.family) << sampler_name(r.sampler) << b(r.success) << b(r.inside_obstacle)
        << b(r.los_lost) << r.r_vis << r.area << r.selected.x() << r.selected.y() << r.selected.z() << r.reached.x()
        << r.reached.y() << r.reached.z() << r.error;
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    auto out = open_out(tmp);
    out << content;
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace oanbv
