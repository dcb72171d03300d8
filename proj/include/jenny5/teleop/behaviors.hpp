#pragma once

// Vision-driven behaviors. Detections arrive as normalized image offsets
// (-1..1 from the image centre) and an apparent size (0..1).

#include <cstdint>
#include <optional>

namespace jenny5::teleop {

struct BehaviorConfig {
  double kp = 200;          // steps per unit of offset
  double deadband = 0.05;   // per axis
  double near_size = 0.6;   // above: too close
  double far_size = 0.4;    // below: too far
  int follow_duty = 8000;
  int head_pan_motor = 0;
  int head_tilt_motor = 1;
};

struct HeadCorrection {
  std::optional<std::int32_t> pan_steps;
  std::optional<std::int32_t> tilt_steps;
  bool centered() const { return !pan_steps && !tilt_steps; }
};

/// Proportional control: steps = round(-kp · offset) on each axis outside the deadband.
HeadCorrection center_head_step(const BehaviorConfig& config, double offset_x, double offset_y);

enum class FollowAction { Forward, Backward, Stop };

FollowAction follow_person_step(const BehaviorConfig& config, double apparent_size);

}  // namespace jenny5::teleop
