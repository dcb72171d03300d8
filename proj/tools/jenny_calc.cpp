// Drivetrain calculator: torque, payload, speed, sweep time and leg travel.

#include "jenny5/model/drivetrain.hpp"
#include "jenny5/model/presets.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <vector>

namespace model = jenny5::model;

namespace {

struct Row {
  std::string quantity;
  double value;
  std::string unit;
};

struct Common {
  std::string preset = "arm_shoulder";
  std::string config;
  std::string format = "table";
  std::optional<std::string> motor_torque, gearbox, efficiency, reduction, step_angle, max_rate, torque_limit;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--preset", preset, "Drivetrain preset")->capture_default_str();
    cmd.add_option("--config", config, "JSON file with a \"drivetrains\" table")->check(CLI::ExistingFile);
    cmd.add_option("--format", format, "table or csv")->check(CLI::IsMember({"table", "csv"}))->capture_default_str();
    cmd.add_option("--motor-torque", motor_torque, "Motor holding torque, N·cm");
    cmd.add_option("--gearbox", gearbox, "Gearbox ratio, e.g. 50 or 27/1");
    cmd.add_option("--efficiency", efficiency, "Gearbox efficiency, e.g. 0.73");
    cmd.add_option("--reduction", reduction, "External reduction, e.g. 47/14");
    cmd.add_option("--step-angle", step_angle, "Degrees per step");
    cmd.add_option("--max-rate", max_rate, "Steps per second");
    cmd.add_option("--torque-limit", torque_limit, "Gearbox output limit, N·cm");
  }

  model::DrivetrainSpec spec() const {
    std::map<std::string, model::DrivetrainSpec> table = model::builtin_drivetrains();
    if (!config.empty()) {
      std::ifstream in(config);
      table = model::load_drivetrains(nlohmann::json::parse(in));
    }
    auto it = table.find(preset);
    if (it == table.end()) throw std::invalid_argument("unknown preset: " + preset);
    auto s = it->second;
    auto set = [](model::Rational& field, const std::optional<std::string>& text) {
      if (text) field = model::parse_rational(*text);
    };
    set(s.motor_holding_torque, motor_torque);
    set(s.gearbox_ratio, gearbox);
    set(s.gearbox_efficiency, efficiency);
    set(s.external_reduction, reduction);
    set(s.step_angle, step_angle);
    set(s.max_step_rate, max_rate);
    set(s.gearbox_torque_limit, torque_limit);
    s.validate();
    return s;
  }
};

void print(const std::vector<Row>& rows, const std::string& format) {
  if (format == "csv") {
    std::cout << "quantity,value,unit\n";
    for (const auto& r : rows) std::cout << r.quantity << ',' << std::setprecision(10) << r.value << ',' << r.unit << '\n';
    return;
  }
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.quantity.size());
  for (const auto& r : rows) {
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << r.quantity << std::right << std::fixed
              << std::setprecision(4) << std::setw(14) << r.value << "  " << r.unit << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jenny 5 drivetrain calculator"};
  app.require_subcommand(1);

  Common torque_opts, payload_opts, speed_opts, sweep_opts;
  double radius = 70;
  double degrees = 180;

  auto* torque = app.add_subcommand("torque", "Joint torque through the drivetrain");
  torque_opts.add_to(*torque);
  auto* payload = app.add_subcommand("payload", "Force and mass a joint can hold at a radius");
  payload_opts.add_to(*payload);
  payload->add_option("--radius", radius, "Lever arm, cm")->check(CLI::PositiveNumber)->capture_default_str();
  auto* speed = app.add_subcommand("speed", "Motor and joint speed at the maximum step rate");
  speed_opts.add_to(*speed);
  auto* sweep = app.add_subcommand("sweep", "Constant-speed time for a joint sweep");
  sweep_opts.add_to(*sweep);
  sweep->add_option("--degrees", degrees, "Sweep angle")->check(CLI::PositiveNumber)->capture_default_str();

  auto* leg = app.add_subcommand("leg", "Leg height during a full-speed move");
  model::LinearActuatorSpec leg_spec;
  double leg_time = -1;
  double leg_step = 1;
  std::string leg_dir = "extend";
  std::string leg_format = "table";
  leg->add_option("--time", leg_time, "Single instant, s (default: a table over the full travel)");
  leg->add_option("--step", leg_step, "Table step, s")->check(CLI::PositiveNumber)->capture_default_str();
  leg->add_option("--direction", leg_dir, "extend or retract")
      ->check(CLI::IsMember({"extend", "retract"}))
      ->capture_default_str();
  leg->add_option("--travel-time", leg_spec.full_travel_s, "Full travel time, s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  leg->add_option("--format", leg_format, "table or csv")->check(CLI::IsMember({"table", "csv"}))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (torque->parsed()) {
      auto s = torque_opts.spec();
      print({{"motor_torque", model::to_double(s.motor_holding_torque), "N·cm"},
             {"gearbox_output", model::to_double(model::gearbox_output_torque(s)), "N·cm"},
             {"joint_torque", model::to_double(model::output_torque(s)), "N·cm"},
             {"joint_torque_at_gearbox_limit", model::to_double(model::torque_limited_output(s)), "N·cm"}},
            torque_opts.format);
    } else if (payload->parsed()) {
      auto s = payload_opts.spec();
      auto r = model::parse_rational(std::to_string(radius));
      auto full = model::payload_at_radius(model::output_torque(s), r);
      auto safe = model::payload_at_radius(model::torque_limited_output(s), r);
      print({{"radius", radius, "cm"},
             {"force", full.force_n, "N"},
             {"mass", full.mass_kg, "kg"},
             {"force_at_gearbox_limit", safe.force_n, "N"},
             {"mass_at_gearbox_limit", safe.mass_kg, "kg"}},
            payload_opts.format);
    } else if (speed->parsed()) {
      auto s = speed_opts.spec();
      print({{"motor_speed", model::to_double(model::motor_rev_per_s(s)), "rev/s"},
             {"gearbox_output_speed", model::to_double(model::motor_rev_per_s(s) / s.gearbox_ratio), "rev/s"},
             {"joint_speed", model::to_double(model::joint_rev_per_s(s)), "rev/s"},
             {"joint_angular_speed", model::to_double(model::joint_speed(s)), "deg/s"}},
            speed_opts.format);
    } else if (sweep->parsed()) {
      auto s = sweep_opts.spec();
      auto d = model::parse_rational(std::to_string(degrees));
      print({{"sweep", degrees, "deg"},
             {"time", model::to_double(model::sweep_time(s, d)), "s"},
             {"motor_steps", model::to_double(d * s.gearbox_ratio * s.external_reduction / s.step_angle), "steps"}},
            sweep_opts.format);
    } else if (leg->parsed()) {
      auto dir = leg_dir == "extend" ? model::LegDirection::Extend : model::LegDirection::Retract;
      std::vector<double> times;
      if (leg_time >= 0) {
        times.push_back(leg_time);
      } else {
        for (double t = 0; t < leg_spec.full_travel_s + 1e-9; t += leg_step) times.push_back(t);
        if (times.back() < leg_spec.full_travel_s - 1e-9) times.push_back(leg_spec.full_travel_s);
      }
      if (leg_format == "csv") std::cout << "time_s,fraction,height_cm\n";
      for (double t : times) {
        auto st = model::leg_extension(leg_spec, t, dir);
        if (leg_format == "csv") {
          std::cout << t << ',' << st.fraction << ',' << st.height_cm << '\n';
        } else {
          std::cout << std::fixed << std::setprecision(2) << "t=" << std::setw(6) << t << " s  fraction "
                    << std::setprecision(4) << st.fraction << "  height " << std::setprecision(2) << st.height_cm
                    << " cm\n";
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "jenny-calc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
