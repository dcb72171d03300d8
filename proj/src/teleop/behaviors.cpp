#include "jenny5/teleop/behaviors.hpp"

#include <cmath>

namespace jenny5::teleop {

namespace {

std::optional<std::int32_t> axis(const BehaviorConfig& config, double offset) {
  if (std::abs(offset) < config.deadband) return std::nullopt;
  auto steps = static_cast<std::int32_t>(std::lround(-config.kp * offset));
  if (steps == 0) return std::nullopt;
  return steps;
}

}  // namespace

HeadCorrection center_head_step(const BehaviorConfig& config, double offset_x, double offset_y) {
  return {axis(config, offset_x), axis(config, offset_y)};
}

FollowAction follow_person_step(const BehaviorConfig& config, double apparent_size) {
  if (apparent_size > config.near_size) return FollowAction::Backward;
  if (apparent_size < config.far_size) return FollowAction::Forward;
  return FollowAction::Stop;
}

}  // namespace jenny5::teleop
