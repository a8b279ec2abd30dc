#include "pointnav/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pointnav {

namespace fs = std::filesystem;

void to_json(Json& j, const Vec2& v) { j = Json{{"x", v.x}, {"y", v.y}}; }
void from_json(const Json& j, Vec2& v) {
  j.at("x").get_to(v.x);
  j.at("y").get_to(v.y);
}

void to_json(Json& j, const Pose& p) { j = Json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }
void from_json(const Json& j, Pose& p) {
  j.at("x").get_to(p.x);
  j.at("y").get_to(p.y);
  j.at("theta").get_to(p.theta);
}

void to_json(Json& j, const Egomotion& e) {
  j = Json{{"ex", e.ex}, {"ey", e.ey}, {"etheta", e.etheta}};
}
void from_json(const Json& j, Egomotion& e) {
  j.at("ex").get_to(e.ex);
  j.at("ey").get_to(e.ey);
  j.at("etheta").get_to(e.etheta);
}

void to_json(Json& j, const GoalVector& g) { j = Json{{"gx", g.gx}, {"gy", g.gy}}; }
void from_json(const Json& j, GoalVector& g) {
  j.at("gx").get_to(g.gx);
  j.at("gy").get_to(g.gy);
}

void to_json(Json& j, const Episode& e) {
  j = Json{{"id", e.id},
           {"map_id", e.map_id},
           {"start", e.start},
           {"goal", e.goal},
           {"geodesic_start", e.geodesic_start},
           {"euclidean_start", e.euclidean_start}};
}
void from_json(const Json& j, Episode& e) {
  j.at("id").get_to(e.id);
  j.at("map_id").get_to(e.map_id);
  j.at("start").get_to(e.start);
  j.at("goal").get_to(e.goal);
  j.at("geodesic_start").get_to(e.geodesic_start);
  j.at("euclidean_start").get_to(e.euclidean_start);
}

void to_json(Json& j, const DepthScan& s) {
  j = Json{{"fov", s.fov}, {"max_range", s.max_range}, {"ranges", s.ranges}};
}
void from_json(const Json& j, DepthScan& s) {
  j.at("fov").get_to(s.fov);
  j.at("max_range").get_to(s.max_range);
  j.at("ranges").get_to(s.ranges);
}

void to_json(Json& j, const StepRecord& r) {
  j = Json{{"type", "step"},
           {"step", r.step},
           {"action", std::string(to_string(r.action))},
           {"egomotion_true", r.egomotion_true},
           {"egomotion_est", r.egomotion_est},
           {"pose_true", r.pose_true},
           {"pose_est", r.pose_est},
           {"goal_est", r.goal_est},
           {"collided", r.collided},
           {"fallback", r.fallback}};
  if (r.scan) {
    j["scan"] = *r.scan;
  }
}
void from_json(const Json& j, StepRecord& r) {
  j.at("step").get_to(r.step);
  const auto name = j.at("action").get<std::string>();
  const auto action = parse_action(name);
  if (!action) {
    throw IoError("unknown action '" + name + "'");
  }
  r.action = *action;
  j.at("egomotion_true").get_to(r.egomotion_true);
  j.at("egomotion_est").get_to(r.egomotion_est);
  j.at("pose_true").get_to(r.pose_true);
  j.at("pose_est").get_to(r.pose_est);
  j.at("goal_est").get_to(r.goal_est);
  j.at("collided").get_to(r.collided);
  j.at("fallback").get_to(r.fallback);
  r.scan.reset();
  if (j.contains("scan")) {
    r.scan = j.at("scan").get<DepthScan>();
  }
}

void to_json(Json& j, const EpisodeResult& r) {
  j = Json{{"episode_id", r.episode_id},
           {"stopped", r.stopped},
           {"success", r.success},
           {"d_goal_final", r.d_goal_final},
           {"geodesic_start", r.geodesic_start},
           {"path_length", r.path_length},
           {"steps", r.steps},
           {"termination", std::string(to_string(r.termination))}};
}

namespace {

Json breakdown_json(const MaeBreakdown& b) {
  return Json{{"total", b.total}, {"forward", b.forward}, {"left", b.left}, {"right", b.right}};
}

// JSON has no infinity; an open upper bin edge is written as null.
Json edge_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void to_json(Json& j, const MaeReport& m) {
  j = Json{{"translation_cm", breakdown_json(m.translation_cm)},
           {"rotation_crad", breakdown_json(m.rotation_crad)},
           {"counts",
            {{"total", m.counts.total},
             {"forward", m.counts.forward},
             {"left", m.counts.left},
             {"right", m.counts.right}}}};
}

void to_json(Json& j, const MetricsReport& m) {
  Json at = Json::array();
  for (const ThresholdRate& t : m.success_at) {
    at.push_back({{"threshold", t.threshold}, {"rate", t.rate}});
  }
  Json bins = Json::array();
  for (const BinRate& b : m.success_by_geo_bin) {
    bins.push_back(
        {{"lo", edge_json(b.lo)}, {"hi", edge_json(b.hi)}, {"rate", b.rate}, {"count", b.count}});
  }
  j = Json{{"episode_count", m.episode_count},
           {"success_rate", m.success_rate},
           {"spl", m.spl},
           {"soft_success_mean", m.soft_success_mean},
           {"softspl_ratio_mean", m.softspl_ratio_mean},
           {"softspl_habitat_mean", m.softspl_habitat_mean},
           {"d_goal_mean", m.d_goal_mean},
           {"success_at", at},
           {"success_by_geo_bin", bins},
           {"mae", m.mae}};
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError(tmp.string() + ": cannot open for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw IoError(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path.string() + ": cannot rename into place");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(path.string() + ": cannot open for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

// Splits JSONL text into parsed objects, skipping blank lines. Errors carry
// source:line.
template <typename F>
void for_each_json_line(std::string_view text, std::string_view source, F&& f) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      f(Json::parse(line), line_no);
    } catch (const Json::exception& e) {
      throw IoError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::string episodes_to_jsonl(const std::vector<Episode>& episodes) {
  std::string out;
  for (const Episode& e : episodes) {
    out += Json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<Episode> parse_episodes_jsonl(std::string_view text, std::string_view source) {
  std::vector<Episode> episodes;
  for_each_json_line(text, source, [&](const Json& j, std::size_t) {
    episodes.push_back(j.get<Episode>());
  });
  return episodes;
}

void save_episodes(const fs::path& path, const std::vector<Episode>& episodes) {
  write_file_atomic(path, episodes_to_jsonl(episodes));
}

std::vector<Episode> load_episodes(const fs::path& path) {
  return parse_episodes_jsonl(read_file(path), path.string());
}

std::string trajectory_to_jsonl(const TrajectoryLog& log) {
  Json header{{"type", "header"},
              {"episode", log.episode},
              {"config_digest", log.config_digest},
              {"seed", log.seed},
              {"termination", std::string(to_string(log.termination))}};
  if (log.initial_scan) {
    header["scan0"] = *log.initial_scan;
  }
  std::string out = header.dump();
  out += '\n';
  for (const StepRecord& r : log.records) {
    out += Json(r).dump();
    out += '\n';
  }
  return out;
}

TrajectoryLog parse_trajectory_jsonl(std::string_view text, std::string_view source) {
  TrajectoryLog log;
  bool have_header = false;
  for_each_json_line(text, source, [&](const Json& j, std::size_t) {
    const auto type = j.at("type").get<std::string>();
    if (type == "header") {
      if (have_header) throw IoError("duplicate header record");
      have_header = true;
      j.at("episode").get_to(log.episode);
      j.at("config_digest").get_to(log.config_digest);
      j.at("seed").get_to(log.seed);
      const auto term = j.at("termination").get<std::string>();
      if (term == "stop") {
        log.termination = Termination::Stop;
      } else if (term == "max_steps") {
        log.termination = Termination::MaxSteps;
      } else {
        throw IoError("unknown termination '" + term + "'");
      }
      if (j.contains("scan0")) {
        log.initial_scan = j.at("scan0").get<DepthScan>();
      }
    } else if (type == "step") {
      if (!have_header) throw IoError("step record before header");
      log.records.push_back(j.get<StepRecord>());
    } else {
      throw IoError("unknown record type '" + type + "'");
    }
  });
  if (!have_header) {
    throw IoError(std::string(source) + ": missing header record");
  }
  return log;
}

void save_trajectory(const fs::path& path, const TrajectoryLog& log) {
  write_file_atomic(path, trajectory_to_jsonl(log));
}

TrajectoryLog load_trajectory(const fs::path& path) {
  return parse_trajectory_jsonl(read_file(path), path.string());
}

std::string trajectory_file_name(const Episode& episode) { return episode.id + ".jsonl"; }

std::vector<TrajectoryLog> load_trajectories(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError(dir.string() + ": not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<TrajectoryLog> logs;
  logs.reserve(files.size());
  for (const fs::path& f : files) {
    logs.push_back(load_trajectory(f));
  }
  return logs;
}

namespace {

void write_tuple(std::ostream& sink, const std::string& episode_id, int step,
                 const VOTuple& t, bool labeled, std::string_view augmentation) {
  Json j{{"episode_id", episode_id},
         {"step", step},
         {"action", labeled ? Json(std::string(to_string(t.action))) : Json(nullptr)},
         {"ranges_prev", t.scan_prev.ranges},
         {"ranges_cur", t.scan_cur.ranges},
         {"ego", t.egomotion_gt},
         {"augmentation", augmentation}};
  sink << j.dump() << '\n';
}

}  // namespace

std::size_t export_tuples(const std::vector<TrajectoryLog>& logs, const ExportOptions& options,
                          std::ostream& sink) {
  std::size_t count = 0;
  for (const TrajectoryLog& log : logs) {
    if (!log.initial_scan) {
      throw IoError("episode " + log.episode.id + ": log has no scans (run with store_scans)");
    }
    const DepthScan* prev = &*log.initial_scan;
    for (const StepRecord& r : log.records) {
      if (r.action == Action::Stop) continue;
      if (!r.scan) {
        throw IoError("episode " + log.episode.id + " step " + std::to_string(r.step) +
                      ": record has no scan");
      }
      const VOTuple t{*prev, *r.scan, r.action, r.egomotion_true};
      prev = &*r.scan;
      const bool turn = r.action != Action::MoveForward;
      const bool do_swap = options.swap && (turn || options.swap_forward_unlabeled);
      auto swapped = [&](const VOTuple& x) {
        // Forward steps have no reversed action; only the label is dropped.
        return turn ? swap_tuple(x)
                    : VOTuple{x.scan_cur, x.scan_prev, x.action, inverse(x.egomotion_gt)};
      };
      write_tuple(sink, log.episode.id, r.step, t, true, "none");
      ++count;
      if (options.flip) {
        write_tuple(sink, log.episode.id, r.step, flip_tuple(t), true, "flip");
        ++count;
      }
      if (do_swap) {
        write_tuple(sink, log.episode.id, r.step, swapped(t), turn, "swap");
        ++count;
        if (options.flip) {
          write_tuple(sink, log.episode.id, r.step, swapped(flip_tuple(t)), turn, "flip_swap");
          ++count;
        }
      }
    }
  }
  if (!sink) {
    throw IoError("tuple sink: write failed");
  }
  return count;
}

}  // namespace pointnav
