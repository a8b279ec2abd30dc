// pointnav: map and episode generation, batch runs, the oracle ceiling study,
// metrics, VO tuple export and SVG rendering.
//
// Exit status: 0 ok, 2 bad configuration or arguments, 3 failure while running.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pointnav/config.hpp"
#include "pointnav/experiment.hpp"
#include "pointnav/io.hpp"
#include "pointnav/render.hpp"

namespace fs = std::filesystem;
using namespace pointnav;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Seed from NAV_SEED if set, else the flag; a command that needs one and has
// neither is a configuration error.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (const char* env = std::getenv("NAV_SEED")) return parse_seed(env);
  if (flag) return *flag;
  throw ConfigError("a seed is required (--seed or NAV_SEED)");
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) {
    throw ConfigError(what + ": file not found: '" + p.string() + "'");
  }
}

void require_dir(const fs::path& p, const std::string& what) {
  if (!fs::is_directory(p)) {
    throw ConfigError(what + ": directory not found: '" + p.string() + "'");
  }
}

OccupancyGrid read_map(const fs::path& p) {
  try {
    return load_map(read_file(p));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

// Writes to `out` atomically, or to stdout when `out` is empty.
void emit(const fs::path& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

struct GenMapArgs {
  fs::path out;
  MapSpec spec;
  std::optional<std::uint64_t> seed;
};

void gen_map(const GenMapArgs& a) {
  MapSpec spec = a.spec;
  spec.seed = resolve_seed(a.seed);
  if (spec.width < 3 || spec.height < 3) throw ConfigError("map must be at least 3x3 cells");
  if (!(spec.cell_size > 0.0)) throw ConfigError("--cell-size must be > 0");
  if (spec.room_count < 1) throw ConfigError("--rooms must be >= 1");
  if (spec.clutter < 0) throw ConfigError("--clutter must be >= 0");
  write_file_atomic(a.out, save_map(generate_map(spec)));
}

struct GenEpisodesArgs {
  fs::path map;
  fs::path out;
  int count = 500;
  std::optional<std::uint64_t> seed;
  EpisodeConstraints constraints;
  std::string map_id;
  double radius = kDefaultAgentRadius;
};

void gen_episodes(const GenEpisodesArgs& a) {
  require_file(a.map, "--map");
  const std::uint64_t seed = resolve_seed(a.seed);
  if (a.count < 1) throw ConfigError("--count must be >= 1");
  if (!(a.constraints.min_geo > 0.0) || !(a.constraints.max_geo >= a.constraints.min_geo)) {
    throw ConfigError("geodesic band must satisfy 0 < min-geo <= max-geo");
  }
  if (!(a.constraints.min_ratio >= 1.0)) throw ConfigError("--min-ratio must be >= 1");
  const OccupancyGrid grid = read_map(a.map);
  const std::string map_id = a.map_id.empty() ? a.map.stem().string() : a.map_id;
  RngStream rng(seed, "episodes", map_id);
  save_episodes(a.out, generate_episodes(grid, a.count, a.constraints, rng, map_id, a.radius));
}

struct RunArgs {
  fs::path config;
  std::optional<fs::path> output_dir;
  std::optional<int> workers;
};

void run(const RunArgs& a) {
  require_file(a.config, "--config");
  RunConfig c = load_run_config(a.config, std::getenv("NAV_SEED"));
  if (a.output_dir) c.output_dir = *a.output_dir;
  if (a.workers) c.workers = *a.workers;
  validate(c, true);

  const OccupancyGrid grid = read_map(c.map_path);
  const std::vector<Episode> episodes = load_episodes(c.episodes_path);
  if (episodes.empty()) throw ConfigError("config.episodes: no episodes");

  EpisodeRunOptions options;
  options.store_scans = c.store_scans;
  options.use_map = c.use_map;
  options.config_digest = config_digest(c);
  const std::vector<TrajectoryLog> logs = run_batch(grid, episodes, c.estimator, c.sim,
                                                    c.policy, *c.seed, options, c.workers);

  const fs::path traj_dir = c.output_dir / "trajectories";
  fs::create_directories(traj_dir);
  for (const TrajectoryLog& log : logs) {
    save_trajectory(traj_dir / trajectory_file_name(log.episode), log);
  }
  const MetricsReport report = evaluate_logs(logs, c.thresholds, closed_bin_edges(c.bin_edges));
  Json doc = report;
  doc["config_digest"] = options.config_digest;
  doc["seed"] = *c.seed;
  write_file_atomic(c.output_dir / "metrics.json", pretty(doc));
}

struct CeilingArgs {
  fs::path map;
  fs::path episodes;
  std::optional<fs::path> actuation;
  bool zero_noise = false;
  int trials = 3;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  double radius = kDefaultAgentRadius;
  fs::path out;
};

void ceiling(const CeilingArgs& a) {
  require_file(a.map, "--map");
  require_file(a.episodes, "--episodes");
  const std::uint64_t seed = resolve_seed(a.seed);
  ActuationNoiseConfig actuation;
  if (a.zero_noise) {
    actuation = ActuationNoiseConfig::none();
  } else if (a.actuation) {
    require_file(*a.actuation, "--actuation");
    try {
      actuation = actuation_from_json(Json::parse(read_file(*a.actuation)));
    } catch (const Json::exception& e) {
      throw ConfigError(a.actuation->string() + ": " + e.what());
    }
  }
  try {
    actuation.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (a.trials < 1) throw ConfigError("--trials must be >= 1");
  if (a.workers < 1) throw ConfigError("--workers must be >= 1");

  const OccupancyGrid grid = read_map(a.map);
  const std::vector<Episode> episodes = load_episodes(a.episodes);
  if (episodes.empty()) throw ConfigError("--episodes: no episodes");
  const CeilingReport report =
      run_ceiling(grid, episodes, actuation, PolicyParams{}, a.trials, seed, a.workers, a.radius);
  Json doc = to_json(report);
  doc["seed"] = seed;
  emit(a.out, pretty(doc));
}

struct MetricsArgs {
  fs::path trajectories;
  std::vector<double> thresholds{0.36, 0.395, 0.45, 0.70};
  std::vector<double> bins{0.0, 3.0, 8.0};
  fs::path out;
};

void metrics(const MetricsArgs& a) {
  require_dir(a.trajectories, "--trajectories");
  RunConfig check;
  check.seed = 0;
  check.thresholds = a.thresholds;
  check.bin_edges = a.bins;
  validate(check, false);
  const std::vector<TrajectoryLog> logs = load_trajectories(a.trajectories);
  if (logs.empty()) throw ConfigError("--trajectories: no *.jsonl logs");
  const MetricsReport report = evaluate_logs(logs, a.thresholds, closed_bin_edges(a.bins));
  emit(a.out, pretty(Json(report)));
}

struct ExportArgs {
  fs::path trajectories;
  ExportOptions options;
  fs::path out;
};

void export_vo(const ExportArgs& a) {
  require_dir(a.trajectories, "--trajectories");
  const std::vector<TrajectoryLog> logs = load_trajectories(a.trajectories);
  std::ostringstream sink;
  export_tuples(logs, a.options, sink);
  emit(a.out, sink.str());
}

struct RenderArgs {
  fs::path trajectory;
  fs::path map;
  RenderOptions options;
  bool hide_estimate = false;
  fs::path out;
};

void render(const RenderArgs& a) {
  require_file(a.trajectory, "--trajectory");
  require_file(a.map, "--map");
  if (!(a.options.pixels_per_metre > 0.0)) throw ConfigError("--scale must be > 0");
  RenderOptions options = a.options;
  options.show_estimate = !a.hide_estimate;
  const OccupancyGrid grid = read_map(a.map);
  const TrajectoryLog log = load_trajectory(a.trajectory);
  emit(a.out, render_svg(grid, log, options));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PointGoal navigation on occupancy grids"};
  app.require_subcommand(1);

  GenMapArgs gm;
  auto* gen_map_cmd = app.add_subcommand("gen-map", "Generate a multi-room map");
  gen_map_cmd->add_option("--out", gm.out, "Output map file")->required();
  gen_map_cmd->add_option("--width", gm.spec.width, "Cells");
  gen_map_cmd->add_option("--height", gm.spec.height, "Cells");
  gen_map_cmd->add_option("--cell-size", gm.spec.cell_size, "Metres per cell");
  gen_map_cmd->add_option("--rooms", gm.spec.room_count);
  gen_map_cmd->add_option("--clutter", gm.spec.clutter, "Free-standing pillars");
  gen_map_cmd->add_option("--seed", gm.seed);

  GenEpisodesArgs ge;
  auto* gen_ep_cmd = app.add_subcommand("gen-episodes", "Sample episodes on a map");
  gen_ep_cmd->add_option("--map", ge.map)->required();
  gen_ep_cmd->add_option("--out", ge.out, "Output JSONL")->required();
  gen_ep_cmd->add_option("--count", ge.count);
  gen_ep_cmd->add_option("--seed", ge.seed);
  gen_ep_cmd->add_option("--min-geo", ge.constraints.min_geo, "Metres");
  gen_ep_cmd->add_option("--max-geo", ge.constraints.max_geo, "Metres");
  gen_ep_cmd->add_option("--min-ratio", ge.constraints.min_ratio, "Geodesic / euclidean");
  gen_ep_cmd->add_option("--map-id", ge.map_id, "Defaults to the map file stem");
  gen_ep_cmd->add_option("--radius", ge.radius, "Agent radius, metres");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run every episode of a config");
  run_cmd->add_option("--config", ra.config, "Run config (JSON)")->required();
  run_cmd->add_option("--output-dir", ra.output_dir, "Overrides output_dir");
  run_cmd->add_option("--workers", ra.workers, "Overrides workers");

  CeilingArgs ca;
  auto* ceiling_cmd = app.add_subcommand("ceiling", "Oracle follower SPL ceiling");
  ceiling_cmd->add_option("--map", ca.map)->required();
  ceiling_cmd->add_option("--episodes", ca.episodes)->required();
  auto* act_opt = ceiling_cmd->add_option("--actuation", ca.actuation, "Actuation noise (JSON)");
  ceiling_cmd->add_flag("--zero-noise", ca.zero_noise)->excludes(act_opt);
  ceiling_cmd->add_option("--trials", ca.trials);
  ceiling_cmd->add_option("--seed", ca.seed);
  ceiling_cmd->add_option("--workers", ca.workers);
  ceiling_cmd->add_option("--radius", ca.radius, "Agent radius, metres");
  ceiling_cmd->add_option("--out", ca.out, "Report file (stdout if omitted)");

  MetricsArgs ma;
  auto* metrics_cmd = app.add_subcommand("metrics", "Metrics over a trajectory directory");
  metrics_cmd->add_option("--trajectories", ma.trajectories)->required();
  metrics_cmd->add_option("--thresholds", ma.thresholds)->delimiter(',');
  metrics_cmd->add_option("--bins", ma.bins, "Bin edges; the last bin is open")->delimiter(',');
  metrics_cmd->add_option("--out", ma.out, "Report file (stdout if omitted)");

  ExportArgs ea;
  auto* export_cmd = app.add_subcommand("export-vo", "Write VO training tuples");
  export_cmd->add_option("--trajectories", ea.trajectories)->required();
  export_cmd->add_flag("--flip", ea.options.flip);
  export_cmd->add_flag("--swap", ea.options.swap);
  export_cmd->add_flag("--swap-forward-unlabeled", ea.options.swap_forward_unlabeled);
  export_cmd->add_option("--out", ea.out, "Tuples JSONL (stdout if omitted)");

  RenderArgs rd;
  auto* render_cmd = app.add_subcommand("render", "Top-down SVG of one trajectory");
  render_cmd->add_option("--trajectory", rd.trajectory)->required();
  render_cmd->add_option("--map", rd.map)->required();
  render_cmd->add_option("--scale", rd.options.pixels_per_metre, "Pixels per metre");
  render_cmd->add_flag("--no-estimate", rd.hide_estimate);
  render_cmd->add_option("--out", rd.out, "SVG file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen_map_cmd) gen_map(gm);
    if (*gen_ep_cmd) gen_episodes(ge);
    if (*run_cmd) run(ra);
    if (*ceiling_cmd) ceiling(ca);
    if (*metrics_cmd) metrics(ma);
    if (*export_cmd) export_vo(ea);
    if (*render_cmd) render(rd);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
