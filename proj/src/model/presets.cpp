#include "jenny5/model/presets.hpp"

#include <stdexcept>

namespace jenny5::model {

Rational rational_from_json(const nlohmann::json& value) {
  if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
  if (value.is_number()) return parse_rational(value.dump());
  if (value.is_string()) return parse_rational(value.get<std::string>());
  throw std::invalid_argument("expected a number or rational string, got " + value.dump());
}

DrivetrainSpec drivetrain_from_json(const nlohmann::json& object) {
  DrivetrainSpec spec;
  auto field = [&](const char* key, Rational& out) {
    if (auto it = object.find(key); it != object.end()) out = rational_from_json(*it);
  };
  field("motor_holding_torque", spec.motor_holding_torque);
  field("gearbox_ratio", spec.gearbox_ratio);
  field("gearbox_efficiency", spec.gearbox_efficiency);
  field("external_reduction", spec.external_reduction);
  field("step_angle", spec.step_angle);
  field("max_step_rate", spec.max_step_rate);
  field("gearbox_torque_limit", spec.gearbox_torque_limit);
  spec.validate();
  return spec;
}

nlohmann::json drivetrain_to_json(const DrivetrainSpec& spec) {
  return {
      {"motor_holding_torque", format_rational(spec.motor_holding_torque)},
      {"gearbox_ratio", format_rational(spec.gearbox_ratio)},
      {"gearbox_efficiency", format_rational(spec.gearbox_efficiency)},
      {"external_reduction", format_rational(spec.external_reduction)},
      {"step_angle", format_rational(spec.step_angle)},
      {"max_step_rate", format_rational(spec.max_step_rate)},
      {"gearbox_torque_limit", format_rational(spec.gearbox_torque_limit)},
  };
}

const std::map<std::string, DrivetrainSpec>& builtin_drivetrains() {
  static const std::map<std::string, DrivetrainSpec> table = [] {
    std::map<std::string, DrivetrainSpec> t;
    t["arm_shoulder"] = arm_shoulder_drivetrain();

    DrivetrainSpec elbow = arm_shoulder_drivetrain();
    elbow.external_reduction = Rational(1);
    t["arm_elbow"] = elbow;

    DrivetrainSpec wrist;
    wrist.gearbox_ratio = Rational(27);
    wrist.external_reduction = Rational(1);
    t["arm_wrist"] = wrist;

    // Nema 11 with planetary gearbox on each head axis.
    DrivetrainSpec head;
    head.motor_holding_torque = Rational(12);
    head.gearbox_ratio = Rational(27);
    head.external_reduction = Rational(1);
    head.gearbox_torque_limit = Rational(100);
    t["head"] = head;
    return t;
  }();
  return table;
}

std::map<std::string, DrivetrainSpec> load_drivetrains(const nlohmann::json& document) {
  auto table = builtin_drivetrains();
  if (auto it = document.find("drivetrains"); it != document.end()) {
    for (const auto& [name, spec] : it->items()) table[name] = drivetrain_from_json(spec);
  }
  return table;
}

}  // namespace jenny5::model
