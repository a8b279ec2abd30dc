#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace pointnav {

enum class Action { Stop, MoveForward, TurnLeft, TurnRight };

inline constexpr std::array<Action, 3> kMotionActions = {
    Action::MoveForward, Action::TurnLeft, Action::TurnRight};

constexpr std::string_view to_string(Action a) {
  switch (a) {
    case Action::Stop: return "STOP";
    case Action::MoveForward: return "MOVE_FORWARD";
    case Action::TurnLeft: return "TURN_LEFT";
    case Action::TurnRight: return "TURN_RIGHT";
  }
  return "STOP";
}

constexpr std::optional<Action> parse_action(std::string_view s) {
  for (Action a : {Action::Stop, Action::MoveForward, Action::TurnLeft,
                   Action::TurnRight}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

/// Mirror image of an action: left and right turns swap.
constexpr Action mirrored(Action a) {
  switch (a) {
    case Action::TurnLeft: return Action::TurnRight;
    case Action::TurnRight: return Action::TurnLeft;
    default: return a;
  }
}

}  // namespace pointnav
