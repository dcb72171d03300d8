#include "jenny5/teleop/tilt.hpp"

#include <algorithm>
#include <cmath>

namespace jenny5::teleop {

std::optional<std::int32_t> tilt_to_steps(double angle_deg, double steps_per_degree) {
  auto steps = static_cast<std::int32_t>(std::lround(angle_deg * steps_per_degree));
  if (steps == 0) return std::nullopt;
  return steps;
}

DutyPair tilt_to_duty(double pitch_deg, double roll_deg, double duty_per_degree, double turn_per_degree) {
  auto clamp = [](double v) { return static_cast<int>(std::lround(std::clamp(v, -32767.0, 32767.0))); };
  return {clamp(pitch_deg * duty_per_degree + roll_deg * turn_per_degree),
          clamp(pitch_deg * duty_per_degree - roll_deg * turn_per_degree)};
}

}  // namespace jenny5::teleop
