#pragma once

// Drivetrain arithmetic for the Jenny 5 joints. Ratios are kept as exact
// rationals; conversion to floating point happens only at presentation.

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jenny5::model {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

/// Parses "47/14", "50", "0.73" or "-1.8" into an exact rational.
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& r);

struct DrivetrainSpec {
  Rational motor_holding_torque{52};  // N·cm
  Rational gearbox_ratio{50};
  Rational gearbox_efficiency{73, 100};
  Rational external_reduction{47, 14};  // pulley teeth out / in
  Rational step_angle{9, 5};            // degrees per full step
  Rational max_step_rate{1500};         // steps/s
  Rational gearbox_torque_limit{600};   // N·cm

  /// Throws std::invalid_argument if a field is non-positive or efficiency > 1.
  void validate() const;
};

struct JointSpec {
  DrivetrainSpec drivetrain;
  Rational arm_radius_cm{70};
  std::int64_t sensor_counts_per_rev = 360;
};

struct LinearActuatorSpec {
  double force_n = 750.0;
  double stroke_mm = 100.0;
  double full_travel_s = 7.0;
  double min_height_cm = 35.0;
  double max_height_cm = 95.0;
};

struct PlatformSpec {
  double top_speed_kmh = 3.0;  // upper bound, not a measured value
  int motor_count = 2;
};

inline constexpr double kStandardGravity = 9.81;

/// The shoulder/elbow drivetrain: 52 N·cm stepper, 50:1 planetary gearbox at
/// 73% efficiency, 47:14 pulley stage, 1.8° steps, 1500 steps/s ceiling.
DrivetrainSpec arm_shoulder_drivetrain();
JointSpec arm_shoulder_joint();

/// Torque at the joint: motor torque × gearbox ratio × efficiency × reduction.
Rational output_torque(const DrivetrainSpec& spec);
/// Torque after the gearbox but before the external reduction.
Rational gearbox_output_torque(const DrivetrainSpec& spec);
/// Joint torque if the gearbox output is capped at its damage limit.
Rational torque_limited_output(const DrivetrainSpec& spec);

struct Payload {
  double force_n = 0.0;
  double mass_kg = 0.0;
};

Payload payload_at_radius(const Rational& torque_ncm, const Rational& radius_cm);

/// Motor revolutions per second at max_step_rate.
Rational motor_rev_per_s(const DrivetrainSpec& spec);
/// Joint revolutions per second after gearbox and external reduction.
Rational joint_rev_per_s(const DrivetrainSpec& spec);
/// Joint speed in degrees per second.
Rational joint_speed(const DrivetrainSpec& spec);
/// Seconds for a constant-speed sweep of `degrees` (ramps ignored).
Rational sweep_time(const DrivetrainSpec& spec, const Rational& degrees);

/// Sensor counts produced by one motor step when the sensor sits on the joint.
Rational binding_units_per_step(const DrivetrainSpec& spec, std::int64_t counts_per_rev);

enum class LegDirection { Extend, Retract };

struct LegState {
  double fraction = 0.0;  // 0 compressed, 1 extended
  double height_cm = 0.0;
};

/// Leg position `t` seconds into a full-speed move starting from the opposite end.
LegState leg_extension(const LinearActuatorSpec& spec, double t, LegDirection direction);
double leg_height(const LinearActuatorSpec& spec, double fraction);

}  // namespace jenny5::model
