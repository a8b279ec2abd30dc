#include "pointnav/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace pointnav {

namespace fs = std::filesystem;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) {
      throw ConfigError(context_ + ": expected an object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      j_.at(key).get_to(out);
    } catch (const Json::exception&) {
      throw ConfigError(context_ + "." + key + ": wrong type");
    }
  }

  const Json* object(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return context_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError(context_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

Json action_noise_json(const ActionNoise& n) {
  return Json{{"sigma_along", n.sigma_along},
              {"sigma_cross", n.sigma_cross},
              {"sigma_yaw", n.sigma_yaw},
              {"bias_along", n.bias_along},
              {"bias_yaw", n.bias_yaw}};
}

ActionNoise action_noise_from(const Json& j, const std::string& context, ActionNoise n) {
  Fields f(j, context);
  f.get("sigma_along", n.sigma_along);
  f.get("sigma_cross", n.sigma_cross);
  f.get("sigma_yaw", n.sigma_yaw);
  f.get("bias_along", n.bias_along);
  f.get("bias_yaw", n.bias_yaw);
  f.finish();
  return n;
}

Json icp_json(const IcpParams& p) {
  return Json{{"max_iterations", p.max_iterations},
              {"eps_translation", p.eps_translation},
              {"eps_rotation", p.eps_rotation},
              {"max_correspondence_dist", p.max_correspondence_dist},
              {"initial_correspondence_dist", p.initial_correspondence_dist},
              {"min_inliers", p.min_inliers},
              {"trim_fraction", p.trim_fraction},
              {"prior_sigma_forward", p.prior_sigma_forward},
              {"prior_sigma_turn", p.prior_sigma_turn},
              {"prior_sigma_rotation", p.prior_sigma_rotation},
              {"normal_half_window", p.normal_half_window},
              {"min_residual_sigma", p.min_residual_sigma},
              {"residual_inflation", p.residual_inflation},
              {"median_window", p.median_window},
              {"max_deviation_translation", p.max_deviation_translation},
              {"max_deviation_rotation", p.max_deviation_rotation}};
}

IcpParams icp_from(const Json& j, const std::string& context) {
  IcpParams p;
  Fields f(j, context);
  f.get("max_iterations", p.max_iterations);
  f.get("eps_translation", p.eps_translation);
  f.get("eps_rotation", p.eps_rotation);
  f.get("max_correspondence_dist", p.max_correspondence_dist);
  f.get("initial_correspondence_dist", p.initial_correspondence_dist);
  f.get("min_inliers", p.min_inliers);
  f.get("trim_fraction", p.trim_fraction);
  f.get("prior_sigma_forward", p.prior_sigma_forward);
  f.get("prior_sigma_turn", p.prior_sigma_turn);
  f.get("prior_sigma_rotation", p.prior_sigma_rotation);
  f.get("normal_half_window", p.normal_half_window);
  f.get("min_residual_sigma", p.min_residual_sigma);
  f.get("residual_inflation", p.residual_inflation);
  f.get("median_window", p.median_window);
  f.get("max_deviation_translation", p.max_deviation_translation);
  f.get("max_deviation_rotation", p.max_deviation_rotation);
  f.finish();
  return p;
}

fs::path resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

Json to_json(const ActuationNoiseConfig& c) {
  return Json{{"forward", action_noise_json(c.forward)},
              {"turn_left", action_noise_json(c.turn_left)},
              {"turn_right", action_noise_json(c.turn_right)}};
}

ActuationNoiseConfig actuation_from_json(const Json& j) {
  ActuationNoiseConfig c;
  Fields f(j, "actuation");
  if (const Json* v = f.object("forward")) c.forward = action_noise_from(*v, f.path("forward"), c.forward);
  if (const Json* v = f.object("turn_left")) {
    c.turn_left = action_noise_from(*v, f.path("turn_left"), c.turn_left);
  }
  if (const Json* v = f.object("turn_right")) {
    c.turn_right = action_noise_from(*v, f.path("turn_right"), c.turn_right);
  }
  f.finish();
  return c;
}

Json to_json(const SensorNoiseConfig& c) {
  return Json{{"mult_sigma", c.mult_sigma}, {"dropout_prob", c.dropout_prob}};
}

SensorNoiseConfig sensor_from_json(const Json& j) {
  SensorNoiseConfig c;
  Fields f(j, "sensor");
  f.get("mult_sigma", c.mult_sigma);
  f.get("dropout_prob", c.dropout_prob);
  f.finish();
  return c;
}

Json to_json(const PolicyParams& p) {
  return Json{{"stop_distance", p.stop_distance},
              {"turn_threshold", p.turn_threshold},
              {"max_steps", p.max_steps},
              {"waypoint_lookahead", p.waypoint_lookahead},
              {"clearance_margin", p.clearance_margin}};
}

PolicyParams policy_from_json(const Json& j) {
  PolicyParams p;
  Fields f(j, "policy");
  f.get("stop_distance", p.stop_distance);
  f.get("turn_threshold", p.turn_threshold);
  f.get("max_steps", p.max_steps);
  f.get("waypoint_lookahead", p.waypoint_lookahead);
  f.get("clearance_margin", p.clearance_margin);
  f.finish();
  return p;
}

Json to_json(const EstimatorKind& k) {
  return Json{{"type", std::string(to_string(k.type))},
              {"sigma_translation", k.sigma_translation},
              {"sigma_rotation", k.sigma_rotation},
              {"flip_average", k.flip_average},
              {"icp", icp_json(k.icp)}};
}

EstimatorKind estimator_from_json(const Json& j) {
  EstimatorKind k;
  Fields f(j, "estimator");
  std::string type = std::string(to_string(k.type));
  f.get("type", type);
  const auto parsed = parse_estimator_type(type);
  if (!parsed) {
    throw ConfigError("estimator.type: unknown estimator '" + type + "'");
  }
  k.type = *parsed;
  f.get("sigma_translation", k.sigma_translation);
  f.get("sigma_rotation", k.sigma_rotation);
  f.get("flip_average", k.flip_average);
  if (const Json* v = f.object("icp")) k.icp = icp_from(*v, f.path("icp"));
  f.finish();
  return k;
}

RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
  RunConfig c;
  Fields f(j, "config");
  std::string map, episodes, output;
  f.get("map", map);
  f.get("episodes", episodes);
  f.get("output_dir", output);
  c.map_path = resolve(map, base_dir);
  c.episodes_path = resolve(episodes, base_dir);
  c.output_dir = resolve(output, base_dir);
  if (const Json* v = f.object("seed")) {
    if (!v->is_number_integer() || (v->is_number_unsigned() ? false : v->get<std::int64_t>() < 0)) {
      throw ConfigError("config.seed: expected a non-negative integer");
    }
    c.seed = v->get<std::uint64_t>();
  }
  if (const Json* v = f.object("estimator")) c.estimator = estimator_from_json(*v);
  if (const Json* v = f.object("actuation")) c.sim.actuation = actuation_from_json(*v);
  if (const Json* v = f.object("sensor")) c.sim.sensor = sensor_from_json(*v);
  if (const Json* v = f.object("scan")) {
    Fields s(*v, "config.scan");
    s.get("fov", c.sim.scan.fov);
    s.get("n_rays", c.sim.scan.n_rays);
    s.get("max_range", c.sim.scan.max_range);
    s.finish();
  }
  f.get("agent_radius", c.sim.agent_radius);
  if (const Json* v = f.object("policy")) c.policy = policy_from_json(*v);
  f.get("store_scans", c.store_scans);
  f.get("use_map", c.use_map);
  f.get("workers", c.workers);
  f.get("thresholds", c.thresholds);
  f.get("bin_edges", c.bin_edges);
  f.finish();
  return c;
}

Json to_json(const RunConfig& c) {
  Json j{{"map", c.map_path.string()},
         {"episodes", c.episodes_path.string()},
         {"output_dir", c.output_dir.string()},
         {"estimator", to_json(c.estimator)},
         {"actuation", to_json(c.sim.actuation)},
         {"sensor", to_json(c.sim.sensor)},
         {"scan",
          {{"fov", c.sim.scan.fov}, {"n_rays", c.sim.scan.n_rays}, {"max_range", c.sim.scan.max_range}}},
         {"agent_radius", c.sim.agent_radius},
         {"policy", to_json(c.policy)},
         {"store_scans", c.store_scans},
         {"use_map", c.use_map},
         {"workers", c.workers},
         {"thresholds", c.thresholds},
         {"bin_edges", c.bin_edges}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  return j;
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ConfigError("NAV_SEED: expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

RunConfig load_run_config(const fs::path& path, const char* nav_seed) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  RunConfig c = run_config_from_json(j, path.parent_path());
  if (nav_seed != nullptr) {
    c.seed = parse_seed(nav_seed);
  }
  return c;
}

void validate(const RunConfig& c, bool check_paths) {
  if (!c.seed) {
    throw ConfigError("config: seed is required (set it in the file or via NAV_SEED)");
  }
  try {
    c.estimator.validate();
    c.sim.validate();
    c.policy.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.workers < 1) {
    throw ConfigError("config.workers must be >= 1");
  }
  if (c.thresholds.empty()) {
    throw ConfigError("config.thresholds must not be empty");
  }
  for (double t : c.thresholds) {
    if (!(t > 0.0)) throw ConfigError("config.thresholds must be > 0");
  }
  for (std::size_t k = 1; k < c.bin_edges.size(); ++k) {
    if (!(c.bin_edges[k] > c.bin_edges[k - 1])) {
      throw ConfigError("config.bin_edges must be strictly increasing");
    }
  }
  if (c.bin_edges.empty()) {
    throw ConfigError("config.bin_edges must not be empty");
  }
  if (check_paths) {
    std::error_code ec;
    if (c.map_path.empty() || !fs::is_regular_file(c.map_path, ec)) {
      throw ConfigError("config.map: file not found: '" + c.map_path.string() + "'");
    }
    if (c.episodes_path.empty() || !fs::is_regular_file(c.episodes_path, ec)) {
      throw ConfigError("config.episodes: file not found: '" + c.episodes_path.string() + "'");
    }
    if (c.output_dir.empty()) {
      throw ConfigError("config.output_dir is required");
    }
  }
}

std::string digest(const Json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

std::string config_digest(const RunConfig& c) {
  // Where outputs go does not change what they contain.
  Json j = to_json(c);
  j.erase("output_dir");
  j.erase("workers");
  return digest(j);
}

std::vector<double> closed_bin_edges(const std::vector<double>& edges) {
  std::vector<double> out = edges;
  out.push_back(std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace pointnav
