#pragma once

// JSON and JSONL serialization of episodes, trajectory logs, reports and VO
// tuples, plus atomic file output.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pointnav/agent.hpp"
#include "pointnav/metrics.hpp"
#include "pointnav/odometry.hpp"
#include "pointnav/planner.hpp"

namespace pointnav {

using Json = nlohmann::json;

/// File-system or format failure, with the offending path in the message.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void to_json(Json& j, const Vec2& v);
void from_json(const Json& j, Vec2& v);
void to_json(Json& j, const Pose& p);
void from_json(const Json& j, Pose& p);
void to_json(Json& j, const Egomotion& e);
void from_json(const Json& j, Egomotion& e);
void to_json(Json& j, const GoalVector& g);
void from_json(const Json& j, GoalVector& g);
void to_json(Json& j, const Episode& e);
void from_json(const Json& j, Episode& e);
void to_json(Json& j, const DepthScan& s);
void from_json(const Json& j, DepthScan& s);
void to_json(Json& j, const StepRecord& r);
void from_json(const Json& j, StepRecord& r);
void to_json(Json& j, const EpisodeResult& r);
void to_json(Json& j, const MaeReport& m);
void to_json(Json& j, const MetricsReport& m);

/// Writes `content` to a temporary sibling of `path` and renames it into
/// place, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string episodes_to_jsonl(const std::vector<Episode>& episodes);
/// `source` names the input in error messages.
std::vector<Episode> parse_episodes_jsonl(std::string_view text, std::string_view source);
void save_episodes(const std::filesystem::path& path, const std::vector<Episode>& episodes);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

/// Header line (episode, config digest, seed, termination, optional initial
/// scan) followed by one line per step record.
std::string trajectory_to_jsonl(const TrajectoryLog& log);
TrajectoryLog parse_trajectory_jsonl(std::string_view text, std::string_view source);
void save_trajectory(const std::filesystem::path& path, const TrajectoryLog& log);
TrajectoryLog load_trajectory(const std::filesystem::path& path);
/// File name used for an episode's log inside an output directory.
std::string trajectory_file_name(const Episode& episode);
/// Every `*.jsonl` log in `dir`, in file-name order.
std::vector<TrajectoryLog> load_trajectories(const std::filesystem::path& dir);

struct ExportOptions {
  bool flip = false;
  bool swap = false;
  /// Also swap forward steps, writing them with a null action label.
  bool swap_forward_unlabeled = false;
};

/// Writes one VO tuple per motion step, plus flipped and swapped variants as
/// requested. Logs must carry scans (initial and per step). Returns the
/// number of records written.
std::size_t export_tuples(const std::vector<TrajectoryLog>& logs, const ExportOptions& options,
                          std::ostream& sink);

}  // namespace pointnav
