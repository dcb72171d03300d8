#pragma once

// Raw register values and the engineering units they stand for.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace jenny5::roboclaw::units {

inline constexpr int kMaxDuty = 32767;
inline constexpr int kMinDuty = -32768;
inline constexpr std::uint32_t kMaxAcceleration = 655359;
inline constexpr int kMaxSpeed = 127;
inline constexpr double kDutyPerPercent = 327.67;

/// Tenths of a degree Celsius.
inline double temperature_c(std::int16_t raw) { return raw / 10.0; }
inline std::int16_t temperature_raw(double celsius) { return static_cast<std::int16_t>(std::lround(celsius * 10)); }

/// Tenths of a volt.
inline double battery_volts(std::uint16_t raw) { return raw / 10.0; }
inline std::uint16_t battery_raw(double volts) { return static_cast<std::uint16_t>(std::lround(volts * 10)); }

/// 10 mA units.
inline double current_amps(std::uint32_t raw) { return raw / 100.0; }
inline std::uint32_t current_raw(double amps) {
  if (!(amps >= 0)) throw std::invalid_argument("current must be non-negative");
  return static_cast<std::uint32_t>(std::lround(amps * 100));
}

/// PWM register to duty cycle percent.
inline double duty_percent(int raw) { return raw / kDutyPerPercent; }
inline int duty_raw(double percent) { return static_cast<int>(std::lround(percent * kDutyPerPercent)); }

/// Speed-mode command (0..127) to the equivalent duty magnitude.
inline int speed_to_duty(int speed) { return static_cast<int>(std::lround(speed * double(kMaxDuty) / kMaxSpeed)); }

}  // namespace jenny5::roboclaw::units
