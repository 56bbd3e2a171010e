#include "oanbv/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace oanbv {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

// One schema drives both directions: `Binder` either writes fields into a
// JSON object or reads them back, rejecting keys the schema does not name.
class Binder {
 public:
  Binder(json& node, bool reading, std::string path) : node_(node), reading_(reading), path_(std::move(path)) {}

  template <typename T>
  void operator()(const char* key, T& value) {
    known_.insert(key);
    if (!reading_) {
      node_[key] = to_json(value);
      return;
    }
    if (!node_.contains(key)) return;
    try {
      from_json(node_.at(key), value);
    } catch (const json::exception&) {
      throw ConfigError("config key '" + where(key) + "' has the wrong type");
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config key '" + where(key) + "': " + e.what());
    }
  }

  template <typename Fn>
  void section(const char* key, Fn&& fn) {
    known_.insert(key);
    if (!reading_) {
      json child = json::object();
      Binder b(child, false, where(key));
      fn(b);
      node_[key] = std::move(child);
      return;
    }
    if (!node_.contains(key)) return;
    json& child = node_.at(key);
    if (!child.is_object()) throw ConfigError("config key '" + where(key) + "' must be an object");
    Binder b(child, true, where(key));
    fn(b);
    b.finish();
  }

  void finish() const {
    if (!reading_) return;
    for (const auto& [key, _] : node_.items()) {
      if (!known_.count(key)) throw ConfigError("unknown config key '" + where(key.c_str()) + "'");
    }
  }

 private:
  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  static json to_json(const T& v) {
    return v;
  }
  static json to_json(const Vector3& v) { return json::array({v.x(), v.y(), v.z()}); }
  static json to_json(const std::vector<ScenarioFamily>& v) {
    json a = json::array();
    for (auto f : v) a.push_back(std::string(family_name(f)));
    return a;
  }
  static json to_json(const std::vector<Method>& v) {
    json a = json::array();
    for (auto m : v) a.push_back(std::string(method_name(m)));
    return a;
  }

  template <typename T>
  static void from_json(const json& j, T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw json::type_error::create(302, "expected boolean", &j);
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer()) throw json::type_error::create(302, "expected integer", &j);
      if constexpr (std::is_unsigned_v<T>) {
        if (j.is_number_integer() && !j.is_number_unsigned()) throw std::invalid_argument("must be non-negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw json::type_error::create(302, "expected number", &j);
    }
    v = j.get<T>();
  }
  static void from_json(const json& j, Vector3& v) {
    const auto a = j.get<std::array<double, 3>>();
    v = Vector3(a[0], a[1], a[2]);
  }
  static void from_json(const json& j, std::vector<ScenarioFamily>& v) {
    v.clear();
    for (const auto& e : j) v.push_back(parse_family(e.get<std::string>()));
  }
  static void from_json(const json& j, std::vector<Method>& v) {
    v.clear();
    for (const auto& e : j) v.push_back(parse_method(e.get<std::string>()));
  }

  json& node_;
  bool reading_;
  std::string path_;
  std::set<std::string> known_;
};

void bind(Binder& b, RunConfig& c) {
  PipelineConfig& p = c.pipeline;
  b("seed", c.seed);
  b("workers", c.workers);
  b("out", c.out);
  b("families", c.families);
  b("methods", c.methods);
  b("scenes", c.scenes);
  b("iterations", p.iterations);
  b.section("sweep", [&](Binder& s) {
    s("trials", c.sweep_trials);
    s("grid_step", c.grid_step);
  });
  b.section("ablation", [&](Binder& s) {
    s("seeds", c.ablation_seeds);
    s("trials", c.ablation_trials);
  });
  b.section("camera", [&](Binder& s) {
    s("fx", p.K.fx);
    s("fy", p.K.fy);
    s("cx", p.K.cx);
    s("cy", p.K.cy);
    s("width", p.K.width);
    s("height", p.K.height);
    s("stride", p.stride);
  });
  b.section("robot", [&](Binder& s) {
    Vector3 mount = p.robot.mount.translation();
    s("mount_offset", mount);
    p.robot.mount = Pose3d::from_translation(mount);
    s("standing_height", p.robot.standing_height);
    s("pitch_min", p.robot.pitch_min);
    s("pitch_max", p.robot.pitch_max);
  });
  b.section("detection", [&](Binder& s) {
    s("tau_area", p.detection.tau_area);
    s("tau_kp", p.detection.tau_kp);
  });
  b.section("elevation", [&](Binder& s) {
    s("size", p.elevation.size);
    s("resolution", p.elevation.resolution);
    s("samples_per_axis", p.elevation.samples_per_axis);
    s("footprint_radius", p.elevation.footprint_radius);
    s("visibility_tolerance", p.elevation.visibility_tolerance);
    s("h_step", p.h_step);
  });
  b.section("sampler", [&](Binder& s) {
    s("M", p.sampler.M);
    s("pitch_samples", p.sampler.pitch_samples);
    s("min_target_distance", p.sampler.min_target_distance);
    s("camera_clearance", p.sampler.camera_clearance);
  });
  b.section("shell", [&](Binder& s) {
    s("radii", p.shell.radii);
    s("per_shell", p.shell.per_shell);
  });
  b.section("weights", [&](Binder& s) {
    s("w_v", p.weights.w_v);
    s("w_a", p.weights.w_a);
    s("w_o", p.weights.w_o);
  });
  b.section("evaluator", [&](Binder& s) {
    s("margin", p.evaluator.margin);
    s("splat_radius", p.evaluator.splat_radius);
    s("min_visible", p.evaluator.min_visible);
  });
  b.section("perturbation", [&](Binder& s) {
    s("depth_sigma", p.perturb.depth_sigma);
    s("lateral_sigma", p.perturb.lateral_sigma);
    s("rot_sigma", p.perturb.rot_sigma);
  });
  b.section("alignment", [&](Binder& s) {
    s("icp_max_iter", p.align.icp.max_iter);
    s("icp_max_corr", p.align.icp.max_corr);
    s("icp_tol", p.align.icp.tol);
    s("icp_min_normal_cos", p.align.icp.min_normal_cos);
    s("normal_k", p.align.normal_k);
    s("boundary_noise", p.align.boundary_noise);
    s("center_init", p.align.center_init);
    s("min_target_points", p.align.min_target_points);
  });
  b.section("parts", [&](Binder& s) {
    s("frac_threshold", p.parts.frac_threshold);
    s("flip_probability", p.parts.flip_probability);
    s("surface_tolerance", p.parts.surface_tolerance);
  });
  b.section("baselines", [&](Binder& s) {
    s("volumetric_rays", p.volumetric_rays);
    s("voxel_size", p.voxel_size);
    s("pred_fraction", p.pred_fraction);
    s("pred_jitter", p.pred_jitter);
    s("pred_novelty", p.pred_novelty);
  });
  p.sampler.robot = p.robot;
  p.shell.robot = p.robot;
}

}  // namespace

json config_to_json(const RunConfig& config) {
  RunConfig copy = config;
  json j = json::object();
  Binder b(j, false, "");
  bind(b, copy);
  return j;
}

RunConfig config_from_json(const json& j, RunConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  json node = j;
  Binder b(node, true, "");
  bind(b, base);
  b.finish();
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  const PipelineConfig& p = c.pipeline;
  try {
    p.weights.validate();
    p.K.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (c.workers < 1) fail("workers must be at least 1");
  if (c.families.empty()) fail("at least one scenario family is required");
  if (c.methods.empty()) fail("at least one method is required");
  if (c.scenes < 1) fail("scenes must be at least 1");
  if (c.sweep_trials < 1) fail("sweep trials must be at least 1");
  if (!(c.grid_step > 0.0 && c.grid_step <= 1.0)) fail("grid_step must lie in (0, 1]");
  if (std::abs(1.0 / c.grid_step - std::round(1.0 / c.grid_step)) > 1e-9) fail("grid_step must divide 1 evenly");
  if (c.ablation_seeds < 1) fail("ablation seeds must be at least 1");
  if (c.ablation_trials < 1) fail("ablation trials must be at least 1");
  if (p.iterations < 1) fail("iterations must be at least 1");
  if (p.stride < 1) fail("camera stride must be at least 1");
  if (!(p.robot.pitch_min < p.robot.pitch_max)) fail("pitch_min must be below pitch_max");
  if (p.detection.tau_kp < 0 || p.detection.tau_kp > kKeypointCount) fail("tau_kp must lie in [0, 17]");
  if (p.elevation.size < 1 || !(p.elevation.resolution > 0.0)) fail("elevation map size and resolution must be positive");
  if (p.elevation.samples_per_axis < 1) fail("elevation samples_per_axis must be at least 1");
  if (!(p.h_step > 0.0)) fail("h_step must be positive");
  if (p.sampler.M < 1 || p.sampler.pitch_samples < 1) fail("sampler M and pitch_samples must be at least 1");
  if (p.shell.radii.empty() || p.shell.per_shell < 1) fail("shell sampler needs radii and per_shell >= 1");
  for (double r : p.shell.radii) {
    if (!(r > 0.0)) fail("shell radii must be positive");
  }
  if (!(p.evaluator.margin >= 0.0 && p.evaluator.margin < 1.0)) fail("evaluator margin must lie in [0, 1)");
  if (p.evaluator.splat_radius < 0) fail("splat_radius must be non-negative");
  if (!(p.evaluator.min_visible >= 0.0 && p.evaluator.min_visible <= 1.0)) fail("min_visible must lie in [0, 1]");
  if (p.perturb.depth_sigma < 0 || p.perturb.lateral_sigma < 0 || p.perturb.rot_sigma < 0) {
    fail("perturbation sigmas must be non-negative");
  }
  if (p.align.icp.max_iter < 1 || !(p.align.icp.max_corr > 0.0)) fail("ICP needs max_iter >= 1 and max_corr > 0");
  if (p.align.normal_k < 3) fail("normal_k must be at least 3");
  if (!(p.parts.frac_threshold >= 0.0 && p.parts.frac_threshold <= 1.0)) fail("frac_threshold must lie in [0, 1]");
  if (!(p.parts.flip_probability >= 0.0 && p.parts.flip_probability <= 1.0)) {
    fail("flip_probability must lie in [0, 1]");
  }
  if (p.volumetric_rays < 1 || !(p.voxel_size > 0.0)) fail("volumetric baseline needs rays >= 1 and voxel_size > 0");
  if (!(p.pred_fraction > 0.0 && p.pred_fraction <= 1.0)) fail("pred_fraction must lie in (0, 1]");
  if (p.pred_jitter < 0.0 || p.pred_novelty < 0.0) fail("pred jitter and novelty must be non-negative");
}

std::vector<ScenarioFamily> parse_families(const std::string& list) {
  std::vector<ScenarioFamily> out;
  try {
    for (const auto& name : split(list)) out.push_back(parse_family(name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (out.empty()) throw ConfigError("empty family list");
  return out;
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  try {
    for (const auto& name : split(list)) out.push_back(parse_method(name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

Weights parse_weights(const std::string& list) {
  const auto parts = split(list);
  if (parts.size() != 3) throw ConfigError("weights take three values: w_v,w_a,w_o");
  Weights w;
  try {
    w.w_v = std::stod(parts[0]);
    w.w_a = std::stod(parts[1]);
    w.w_o = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("weights must be numbers: " + list);
  }
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return w;
}

}  // namespace oanbv
