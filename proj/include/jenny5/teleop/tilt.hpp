#pragma once

#include <cstdint>
#include <optional>

namespace jenny5::teleop {

/// Relative step command for a joint; nullopt when it rounds to zero.
std::optional<std::int32_t> tilt_to_steps(double angle_deg, double steps_per_degree);

struct DutyPair {
  int m1 = 0;
  int m2 = 0;
  bool operator==(const DutyPair&) const = default;
};

/// Differential drive: m1 = pitch·gain + roll·turn_gain, m2 = pitch·gain − roll·turn_gain,
/// each rounded and clamped to ±32767.
DutyPair tilt_to_duty(double pitch_deg, double roll_deg, double duty_per_degree, double turn_per_degree);

}  // namespace jenny5::teleop
