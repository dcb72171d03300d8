#include "jenny5/model/drivetrain.hpp"

#include <algorithm>
#include <charconv>

namespace jenny5::model {

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a rational: '" + std::string(whole) + "'");
  }
  return value;
}

Rational parse_decimal(std::string_view text, std::string_view whole) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  Rational value;
  if (dot == std::string_view::npos) {
    value = Rational(parse_int(text, whole));
  } else {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    if (frac_part.size() > 15) throw std::invalid_argument("too many decimals: " + std::string(whole));
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    std::int64_t whole_units = int_part.empty() ? 0 : parse_int(int_part, whole);
    std::int64_t frac_units = frac_part.empty() ? 0 : parse_int(frac_part, whole);
    value = Rational(whole_units) + Rational(frac_units, scale);
  }
  return negative ? -value : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text, text);
  Rational num = parse_decimal(text.substr(0, slash), text);
  Rational den = parse_decimal(text.substr(slash + 1), text);
  if (den.numerator() == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
  return num / den;
}

std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

void DrivetrainSpec::validate() const {
  auto positive = [](const Rational& r, const char* name) {
    if (r <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(motor_holding_torque, "motor_holding_torque");
  positive(gearbox_ratio, "gearbox_ratio");
  positive(gearbox_efficiency, "gearbox_efficiency");
  positive(external_reduction, "external_reduction");
  positive(step_angle, "step_angle");
  positive(max_step_rate, "max_step_rate");
  positive(gearbox_torque_limit, "gearbox_torque_limit");
  if (gearbox_efficiency > 1) throw std::invalid_argument("gearbox_efficiency must be <= 1");
}

DrivetrainSpec arm_shoulder_drivetrain() { return DrivetrainSpec{}; }

JointSpec arm_shoulder_joint() { return JointSpec{}; }

Rational gearbox_output_torque(const DrivetrainSpec& spec) {
  return spec.motor_holding_torque * spec.gearbox_ratio * spec.gearbox_efficiency;
}

Rational output_torque(const DrivetrainSpec& spec) {
  return gearbox_output_torque(spec) * spec.external_reduction;
}

Rational torque_limited_output(const DrivetrainSpec& spec) {
  return std::min(gearbox_output_torque(spec), spec.gearbox_torque_limit) * spec.external_reduction;
}

Payload payload_at_radius(const Rational& torque_ncm, const Rational& radius_cm) {
  if (radius_cm <= 0) throw std::invalid_argument("radius must be positive");
  Payload p;
  p.force_n = to_double(torque_ncm / radius_cm);
  p.mass_kg = p.force_n / kStandardGravity;
  return p;
}

Rational motor_rev_per_s(const DrivetrainSpec& spec) {
  return spec.max_step_rate * spec.step_angle / 360;
}

Rational joint_rev_per_s(const DrivetrainSpec& spec) {
  return motor_rev_per_s(spec) / spec.gearbox_ratio / spec.external_reduction;
}

Rational joint_speed(const DrivetrainSpec& spec) { return joint_rev_per_s(spec) * 360; }

Rational sweep_time(const DrivetrainSpec& spec, const Rational& degrees) {
  return degrees / joint_speed(spec);
}

Rational binding_units_per_step(const DrivetrainSpec& spec, std::int64_t counts_per_rev) {
  if (counts_per_rev <= 0) throw std::invalid_argument("counts_per_rev must be positive");
  return Rational(counts_per_rev) * spec.step_angle / 360 / spec.gearbox_ratio /
         spec.external_reduction;
}

double leg_height(const LinearActuatorSpec& spec, double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  return spec.min_height_cm + (spec.max_height_cm - spec.min_height_cm) * fraction;
}

LegState leg_extension(const LinearActuatorSpec& spec, double t, LegDirection direction) {
  double progress = std::clamp(t / spec.full_travel_s, 0.0, 1.0);
  LegState s;
  s.fraction = direction == LegDirection::Extend ? progress : 1.0 - progress;
  s.height_cm = leg_height(spec, s.fraction);
  return s;
}

}  // namespace jenny5::model
