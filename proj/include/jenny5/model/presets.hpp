#pragma once

#include "jenny5/model/drivetrain.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace jenny5::model {

/// Accepts a JSON number or a string such as "47/14".
Rational rational_from_json(const nlohmann::json& value);

/// Missing keys keep the shoulder-drivetrain defaults.
DrivetrainSpec drivetrain_from_json(const nlohmann::json& object);
nlohmann::json drivetrain_to_json(const DrivetrainSpec& spec);

/// Built-in presets: "arm_shoulder", "arm_elbow", "arm_wrist", "head".
const std::map<std::string, DrivetrainSpec>& builtin_drivetrains();

/// Reads {"drivetrains": {name: {...}}} and merges over the built-in table.
std::map<std::string, DrivetrainSpec> load_drivetrains(const nlohmann::json& document);

}  // namespace jenny5::model
