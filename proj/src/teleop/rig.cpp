#include "jenny5/teleop/rig.hpp"

#include "jenny5/roboclaw/units.hpp"

#include <fstream>

namespace jenny5::teleop {

using nlohmann::json;
using host::EventType;
using host::MotorState;

const JointConfig* ScufySubsystemConfig::joint(int motor) const {
  for (const auto& j : joints) {
    if (j.motor == motor) return &j;
  }
  return nullptr;
}

namespace {

std::chrono::milliseconds ms_field(const json& doc, const char* key, std::chrono::milliseconds fallback) {
  if (!doc.contains(key)) return fallback;
  auto v = doc.at(key).get<std::int64_t>();
  if (v < 0) throw std::invalid_argument(std::string(key) + " must be non-negative");
  return std::chrono::milliseconds(v);
}

ScufySubsystemConfig scufy_from_json(const json& doc) {
  ScufySubsystemConfig c;
  c.endpoint = doc.at("endpoint").get<std::string>();
  for (const auto& m : doc.at("motors")) {
    c.motors.push_back({m.at("dir").get<int>(), m.at("step").get<int>(), m.at("enable").get<int>()});
  }
  if (c.motors.empty()) throw std::invalid_argument("a Scufy subsystem needs at least one motor");
  c.as5147_pins = doc.value("as5147_pins", std::vector<int>{});
  c.speed = doc.value("speed", c.speed);
  c.acceleration = doc.value("acceleration", c.acceleration);
  c.counts_per_rev = doc.value("counts_per_rev", c.counts_per_rev);
  if (doc.contains("joints")) {
    for (const auto& j : doc.at("joints")) {
      JointConfig jc;
      jc.motor = j.at("motor").get<int>();
      if (jc.motor < 0 || static_cast<std::size_t>(jc.motor) >= c.motors.size()) {
        throw std::invalid_argument("joint names a motor that is not configured");
      }
      if (j.contains("sensor") && !j.at("sensor").is_null()) {
        jc.sensor = j.at("sensor").get<int>();
        if (*jc.sensor < 0 || static_cast<std::size_t>(*jc.sensor) >= c.as5147_pins.size()) {
          throw std::invalid_argument("joint names an AS5147 that is not configured");
        }
      }
      jc.end1 = j.value("end1", 0);
      jc.end2 = j.value("end2", 0);
      jc.home = j.value("home", 0);
      jc.direction = j.value("direction", 1);
      jc.steps_per_degree = j.value("steps_per_degree", jc.steps_per_degree);
      c.joints.push_back(jc);
    }
  }
  return c;
}

DutySubsystemConfig duty_from_json(const json& doc) {
  DutySubsystemConfig c;
  c.endpoint = doc.at("endpoint").get<std::string>();
  c.address = doc.value("address", c.address);
  c.duty_per_degree = doc.value("duty_per_degree", c.duty_per_degree);
  c.turn_per_degree = doc.value("turn_per_degree", c.turn_per_degree);
  c.acceleration = doc.value("acceleration", c.acceleration);
  c.pulse_duty = doc.value("pulse_duty", c.pulse_duty);
  c.pulse = ms_field(doc, "pulse_ms", c.pulse);
  c.min_height_cm = doc.value("min_height_cm", c.min_height_cm);
  c.max_height_cm = doc.value("max_height_cm", c.max_height_cm);
  return c;
}

const char* state_name(MotorState s) {
  switch (s) {
    case MotorState::Idle: return "idle";
    case MotorState::CommandSent: return "moving";
    case MotorState::Done: return "done";
  }
  return "idle";
}

}  // namespace

RigConfig rig_config_from_json(const json& doc) {
  RigConfig c;
  c.rate_limit = ms_field(doc, "rate_limit_ms", c.rate_limit);
  c.reply_timeout = ms_field(doc, "reply_timeout_ms", c.reply_timeout);
  c.init_timeout = ms_field(doc, "init_timeout_ms", c.init_timeout);
  c.reconnect_interval = ms_field(doc, "reconnect_ms", c.reconnect_interval);
  if (doc.contains("subsystems")) {
    for (const auto& [name, sub] : doc.at("subsystems").items()) {
      auto group = group_from_string(name);
      if (!group) throw std::invalid_argument("unknown subsystem: " + name);
      if (is_duty_group(*group)) {
        c.duty[*group] = duty_from_json(sub);
      } else {
        c.scufy[*group] = scufy_from_json(sub);
      }
    }
  }
  if (doc.contains("behaviors")) {
    const auto& b = doc.at("behaviors");
    auto& bc = c.behaviors;
    bc.kp = b.value("kp", bc.kp);
    bc.deadband = b.value("deadband", bc.deadband);
    bc.near_size = b.value("near_size", bc.near_size);
    bc.far_size = b.value("far_size", bc.far_size);
    bc.follow_duty = b.value("follow_duty", bc.follow_duty);
    bc.head_pan_motor = b.value("head_pan_motor", bc.head_pan_motor);
    bc.head_tilt_motor = b.value("head_tilt_motor", bc.head_tilt_motor);
    if (bc.far_size > bc.near_size) throw std::invalid_argument("far_size must not exceed near_size");
  }
  return c;
}

RigConfig load_rig_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return rig_config_from_json(json::parse(in));
}

struct Rig::ScufySub {
  Group group;
  ScufySubsystemConfig cfg;
  mutable std::mutex mutex;
  std::unique_ptr<host::ScufyClient> client;
  bool online = false;
  std::string error;
  Clock::time_point next_retry{};
  std::vector<std::int64_t> commanded;
  std::vector<std::size_t> sent;
  std::vector<std::optional<Clock::time_point>> last_motion;
  std::vector<std::optional<std::int32_t>> pending;
  std::size_t board_errors = 0;
};

struct Rig::DutySub {
  Group group;
  DutySubsystemConfig cfg;
  mutable std::mutex mutex;
  std::unique_ptr<roboclaw::RoboClawClient> client;
  bool online = false;
  std::string error;
  Clock::time_point next_retry{};
  DutyPair duty;
  std::size_t sent = 0;
  std::optional<Clock::time_point> last_motion;
  std::optional<DutyPair> pending;
  std::optional<Clock::time_point> pulse_until;
};

Rig::Rig(RigConfig config, ClockFn clock) : config_(std::move(config)), clock_(std::move(clock)) {
  for (const auto& [group, cfg] : config_.scufy) {
    auto sub = std::make_unique<ScufySub>();
    sub->group = group;
    sub->cfg = cfg;
    sub->error = std::string(to_string(group)) + ": not connected";
    auto n = cfg.motors.size();
    sub->commanded.assign(n, 0);
    sub->sent.assign(n, 0);
    sub->last_motion.assign(n, std::nullopt);
    sub->pending.assign(n, std::nullopt);
    scufy_[group] = std::move(sub);
  }
  for (const auto& [group, cfg] : config_.duty) {
    auto sub = std::make_unique<DutySub>();
    sub->group = group;
    sub->cfg = cfg;
    sub->error = std::string(to_string(group)) + ": not connected";
    duty_[group] = std::move(sub);
  }
}

Rig::~Rig() { stop(); }

Rig::ScufySub* Rig::scufy_sub(Group group) const {
  auto it = scufy_.find(group);
  return it == scufy_.end() ? nullptr : it->second.get();
}

Rig::DutySub* Rig::duty_sub(Group group) const {
  auto it = duty_.find(group);
  return it == duty_.end() ? nullptr : it->second.get();
}

void Rig::mark_dead(ScufySub& sub, const std::string& why) {
  sub.online = false;
  sub.error = std::string(to_string(sub.group)) + ": " + why;
  sub.next_retry = clock_() + config_.reconnect_interval;
  if (sub.client) sub.client->close_connection();
  sub.client.reset();
  for (auto& p : sub.pending) p.reset();
}

void Rig::mark_dead(DutySub& sub, const std::string& why) {
  sub.online = false;
  sub.error = std::string(to_string(sub.group)) + ": " + why;
  sub.next_retry = clock_() + config_.reconnect_interval;
  if (sub.client) sub.client->close_connection();
  sub.client.reset();
  sub.pending.reset();
  sub.pulse_until.reset();
}

void Rig::connect_scufy(ScufySub& sub) {
  const auto& cfg = sub.cfg;
  const auto timeout = config_.init_timeout;
  try {
    sub.client = std::make_unique<host::ScufyClient>(host::ScufyClient::connect(cfg.endpoint));
    auto& c = *sub.client;
    std::vector<int> dir, step, enable;
    for (const auto& p : cfg.motors) {
      dir.push_back(p.dir_pin);
      step.push_back(p.step_pin);
      enable.push_back(p.enable_pin);
    }
    if (auto err = host::create_stepper_motors_controller(c, to_string(sub.group), dir, step, enable, timeout)) {
      mark_dead(sub, *err);
      return;
    }
    if (!cfg.as5147_pins.empty()) {
      c.send_create_as5147s(cfg.as5147_pins);
      if (!c.wait_for_event(EventType::AS5147ControllerCreated, timeout)) {
        mark_dead(sub, "cannot create AS5147 controller");
        return;
      }
    }
    for (const auto& j : cfg.joints) {
      if (!j.sensor) continue;
      host::RangeSensor s{*j.sensor, j.end1, j.end2, j.home, j.direction};
      c.send_attach_sensors_to_stepper_motor(j.motor, {}, std::span(&s, 1), {}, {});
      if (!c.wait_for_event(EventType::SensorsAttached, j.motor, timeout)) {
        mark_dead(sub, "cannot attach sensors to motor " + std::to_string(j.motor));
        return;
      }
    }
    for (std::size_t m = 0; m < cfg.motors.size(); ++m) {
      c.send_set_stepper_motor_speed_and_acceleration(static_cast<int>(m), cfg.speed, cfg.acceleration);
      if (!c.wait_for_event(EventType::SpeedAccelSet, static_cast<int>(m), timeout)) {
        mark_dead(sub, "cannot set speed of motor " + std::to_string(m));
        return;
      }
    }
    c.events().clear();
    sub.online = true;
    sub.error.clear();
  } catch (const std::exception& e) {
    mark_dead(sub, e.what());
  }
}

void Rig::connect_duty(DutySub& sub) {
  auto client = std::make_unique<roboclaw::RoboClawClient>();
  client->set_address(sub.cfg.address);
  client->set_timeout(config_.reply_timeout);
  if (!client->connect(sub.cfg.endpoint)) {
    mark_dead(sub, "cannot connect to " + sub.cfg.endpoint);
    return;
  }
  if (!client->get_firmware_version()) {
    sub.client = std::move(client);
    mark_dead(sub, "board does not answer");
    return;
  }
  sub.client = std::move(client);
  sub.online = true;
  sub.error.clear();
  sub.duty = {};
}

std::vector<std::string> Rig::connect_all() {
  std::vector<std::string> errors;
  for (auto& [group, sub] : scufy_) {
    std::lock_guard lock(sub->mutex);
    connect_scufy(*sub);
    if (!sub->online) errors.push_back(sub->error);
  }
  for (auto& [group, sub] : duty_) {
    std::lock_guard lock(sub->mutex);
    connect_duty(*sub);
    if (!sub->online) errors.push_back(sub->error);
  }
  return errors;
}

void Rig::start_maintenance(std::chrono::milliseconds period) {
  std::lock_guard lock(thread_mutex_);
  if (thread_.joinable()) return;
  stopping_ = false;
  thread_ = std::thread([this, period] {
    std::unique_lock lock(thread_mutex_);
    while (!stopping_) {
      lock.unlock();
      maintenance();
      lock.lock();
      thread_cv_.wait_for(lock, period, [this] { return stopping_; });
    }
  });
}

void Rig::stop() {
  {
    std::lock_guard lock(thread_mutex_);
    stopping_ = true;
  }
  thread_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void Rig::send_move(ScufySub& sub, int motor, std::int32_t steps) {
  sub.client->send_move_stepper_motor(motor, steps);
  auto m = static_cast<std::size_t>(motor);
  sub.commanded[m] += steps;
  sub.sent[m] += 1;
  sub.last_motion[m] = clock_();
}

bool Rig::send_duty(DutySub& sub, DutyPair duty, std::uint32_t acceleration) {
  auto& c = *sub.client;
  bool ok = c.drive_M1_with_signed_duty_and_acceleration(duty.m1, acceleration) &&
            c.drive_M2_with_signed_duty_and_acceleration(duty.m2, acceleration);
  if (!ok) {
    mark_dead(sub, c.is_open() ? "no reply from board" : "connection lost");
    return false;
  }
  sub.duty = duty;
  sub.sent += 1;
  sub.last_motion = clock_();
  return true;
}

void Rig::maintenance() {
  const auto now = clock_();
  for (auto& [group, sub] : scufy_) {
    std::lock_guard lock(sub->mutex);
    if (!sub->online) {
      if (now >= sub->next_retry) connect_scufy(*sub);
      continue;
    }
    try {
      auto& c = *sub->client;
      c.update_commands_from_serial();
      for (const auto& e : c.events().items()) {
        if (e.type == EventType::ErrorReceived) ++sub->board_errors;
      }
      c.events().clear();
      for (std::size_t m = 0; m < sub->pending.size(); ++m) {
        if (!sub->pending[m]) continue;
        if (sub->last_motion[m] && now - *sub->last_motion[m] < config_.rate_limit) continue;
        send_move(*sub, static_cast<int>(m), *sub->pending[m]);
        sub->pending[m].reset();
      }
    } catch (const std::exception& e) {
      mark_dead(*sub, e.what());
    }
  }
  for (auto& [group, sub] : duty_) {
    std::lock_guard lock(sub->mutex);
    if (!sub->online) {
      if (now >= sub->next_retry) connect_duty(*sub);
      continue;
    }
    if (sub->pulse_until && now >= *sub->pulse_until) {
      sub->pulse_until.reset();
      if (!send_duty(*sub, {}, roboclaw::units::kMaxAcceleration)) continue;
    }
    if (sub->pending && !(sub->last_motion && now - *sub->last_motion < config_.rate_limit)) {
      auto d = *sub->pending;
      sub->pending.reset();
      send_duty(*sub, d, sub->cfg.acceleration);
    }
  }
}

bool Rig::online(Group group) const {
  if (auto* s = scufy_sub(group)) {
    std::lock_guard lock(s->mutex);
    return s->online;
  }
  if (auto* d = duty_sub(group)) {
    std::lock_guard lock(d->mutex);
    return d->online;
  }
  return false;
}

std::optional<std::string> Rig::subsystem_error(Group group) const {
  if (auto* s = scufy_sub(group)) {
    std::lock_guard lock(s->mutex);
    if (s->online) return std::nullopt;
    return s->error;
  }
  if (auto* d = duty_sub(group)) {
    std::lock_guard lock(d->mutex);
    if (d->online) return std::nullopt;
    return d->error;
  }
  return std::string(to_string(group)) + ": not configured";
}

Outcome Rig::move_steps(Group group, int motor, std::int32_t steps) {
  auto* sub = scufy_sub(group);
  if (!sub) return Outcome::fail(std::string(to_string(group)) + ": not configured");
  std::lock_guard lock(sub->mutex);
  if (!sub->online) return Outcome::fail(sub->error);
  if (motor < 0 || static_cast<std::size_t>(motor) >= sub->cfg.motors.size()) {
    return Outcome::fail(std::string(to_string(group)) + ": no motor " + std::to_string(motor));
  }
  auto m = static_cast<std::size_t>(motor);
  const auto now = clock_();
  if (sub->last_motion[m] && now - *sub->last_motion[m] < config_.rate_limit) {
    sub->pending[m] = steps;
    return {std::nullopt, true};
  }
  try {
    sub->pending[m].reset();
    send_move(*sub, motor, steps);
  } catch (const std::exception& e) {
    mark_dead(*sub, e.what());
    return Outcome::fail(sub->error);
  }
  return {};
}

Outcome Rig::drive_duty(Group group, DutyPair duty) {
  auto* sub = duty_sub(group);
  if (!sub) return Outcome::fail(std::string(to_string(group)) + ": not configured");
  std::lock_guard lock(sub->mutex);
  if (!sub->online) return Outcome::fail(sub->error);
  sub->pulse_until.reset();
  const auto now = clock_();
  if (sub->last_motion && now - *sub->last_motion < config_.rate_limit) {
    sub->pending = duty;
    return {std::nullopt, true};
  }
  sub->pending.reset();
  if (!send_duty(*sub, duty, sub->cfg.acceleration)) return Outcome::fail(sub->error);
  return {};
}

Outcome Rig::home(Group group) {
  auto* sub = scufy_sub(group);
  if (!sub) return Outcome::fail("home is not available for " + std::string(to_string(group)));
  std::lock_guard lock(sub->mutex);
  if (!sub->online) return Outcome::fail(sub->error);
  try {
    for (std::size_t m = 0; m < sub->cfg.motors.size(); ++m) {
      sub->pending[m].reset();
      sub->client->send_go_home_stepper_motor(static_cast<int>(m));
      sub->sent[m] += 1;
      sub->last_motion[m] = clock_();
    }
  } catch (const std::exception& e) {
    mark_dead(*sub, e.what());
    return Outcome::fail(sub->error);
  }
  return {};
}

Outcome Rig::pulse(Group group, int direction) {
  auto* sub = duty_sub(group);
  if (!sub) return Outcome::fail(std::string(to_string(group)) + ": not configured");
  std::lock_guard lock(sub->mutex);
  if (!sub->online) return Outcome::fail(sub->error);
  int d = direction >= 0 ? sub->cfg.pulse_duty : -sub->cfg.pulse_duty;
  sub->pending.reset();
  if (!send_duty(*sub, {d, d}, sub->cfg.acceleration)) return Outcome::fail(sub->error);
  sub->pulse_until = clock_() + sub->cfg.pulse;
  return {};
}

Outcome Rig::stop_all() {
  std::vector<std::string> errors;
  for (auto& [group, sub] : scufy_) {
    std::lock_guard lock(sub->mutex);
    if (!sub->online) continue;
    try {
      sub->client->update_commands_from_serial();
      for (std::size_t m = 0; m < sub->cfg.motors.size(); ++m) {
        sub->pending[m].reset();
        if (sub->client->get_stepper_motor_state(static_cast<int>(m)) == MotorState::CommandSent) {
          sub->client->send_stop_stepper_motor(static_cast<int>(m));
        }
      }
    } catch (const std::exception& e) {
      mark_dead(*sub, e.what());
      errors.push_back(sub->error);
    }
  }
  for (auto& [group, sub] : duty_) {
    std::lock_guard lock(sub->mutex);
    if (!sub->online) continue;
    sub->pending.reset();
    sub->pulse_until.reset();
    if (!send_duty(*sub, {}, roboclaw::units::kMaxAcceleration)) errors.push_back(sub->error);
  }
  if (errors.empty()) return {};
  std::string text = errors.front();
  for (std::size_t i = 1; i < errors.size(); ++i) text += "; " + errors[i];
  return Outcome::fail(text);
}

std::size_t Rig::commands_sent(Group group, int motor) const {
  if (auto* s = scufy_sub(group)) {
    std::lock_guard lock(s->mutex);
    return s->sent.at(static_cast<std::size_t>(motor));
  }
  if (auto* d = duty_sub(group)) {
    std::lock_guard lock(d->mutex);
    return d->sent;
  }
  return 0;
}

json Rig::snapshot() {
  json errors = json::array();
  json subsystems = json::object();

  for (auto& [group, sub] : scufy_) {
    const std::string name(to_string(group));
    std::lock_guard lock(sub->mutex);
    if (!sub->online) {
      subsystems[name] = nullptr;
      errors.push_back(sub->error);
      continue;
    }
    auto& c = *sub->client;
    std::map<int, std::int64_t> readings;
    try {
      c.update_commands_from_serial();
      for (const auto& j : sub->cfg.joints) {
        if (j.sensor) c.send_get_AS5147_position(*j.sensor);
      }
      const auto deadline = std::chrono::steady_clock::now() + config_.reply_timeout;
      for (const auto& j : sub->cfg.joints) {
        if (!j.sensor) continue;
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (auto e = c.wait_for(EventType::AS5147Read, *j.sensor, std::max(left, std::chrono::milliseconds(0)))) {
          readings[*j.sensor] = e->param2;
        }
      }
    } catch (const std::exception& e) {
      mark_dead(*sub, e.what());
      subsystems[name] = nullptr;
      errors.push_back(sub->error);
      continue;
    }
    json joints = json::array();
    for (std::size_t m = 0; m < sub->cfg.motors.size(); ++m) {
      const int motor = static_cast<int>(m);
      json jj{{"motor", motor},
              {"sensor", nullptr},
              {"raw", nullptr},
              {"angle_deg", nullptr},
              {"commanded_steps", sub->commanded[m]},
              {"state", state_name(c.get_stepper_motor_state(motor))}};
      if (const auto* j = sub->cfg.joint(motor); j && j->sensor) {
        jj["sensor"] = *j->sensor;
        if (auto it = readings.find(*j->sensor); it != readings.end()) {
          jj["raw"] = it->second;
          jj["angle_deg"] = static_cast<double>(it->second) * 360.0 / sub->cfg.counts_per_rev;
        } else {
          errors.push_back(name + ": no reading from sensor " + std::to_string(*j->sensor));
        }
      }
      joints.push_back(jj);
    }
    subsystems[name] = json{{"joints", joints}, {"board_errors", sub->board_errors}};
  }

  json platform_duty = nullptr;
  json battery = nullptr;
  json leg_height = nullptr;
  for (auto& [group, sub] : duty_) {
    const std::string name(to_string(group));
    std::lock_guard lock(sub->mutex);
    if (!sub->online) {
      subsystems[name] = nullptr;
      errors.push_back(sub->error);
      continue;
    }
    auto& c = *sub->client;
    auto pwm = c.read_motor_PWM();
    auto volts = c.get_main_battery_voltage();
    if (!pwm || !volts) {
      mark_dead(*sub, c.is_open() ? "no reply from board" : "connection lost");
      subsystems[name] = nullptr;
      errors.push_back(sub->error);
      continue;
    }
    json entry{{"duty_pct", {pwm->m1, pwm->m2}}, {"battery_v", *volts}};
    if (group == Group::Platform) {
      platform_duty = entry["duty_pct"];
      battery = *volts;
    }
    if (group == Group::Leg) {
      if (auto pos = c.read_actuator_positions()) {
        double fraction = (pos->m1 + pos->m2) / 2;
        double h = sub->cfg.min_height_cm + (sub->cfg.max_height_cm - sub->cfg.min_height_cm) * fraction;
        entry["height_cm"] = h;
        leg_height = h;
      }
      if (battery.is_null()) battery = *volts;
    }
    subsystems[name] = entry;
  }

  auto now_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::system_clock::now().time_since_epoch())
                    .count();
  json snap{{"type", "snapshot"},
            {"timestamp_ms", now_ms},
            {"subsystems", subsystems},
            {"leg_height_cm", leg_height},
            {"platform_duty_pct", platform_duty},
            {"battery_v", battery},
            {"errors", errors}};
  {
    std::lock_guard lock(snapshot_mutex_);
    last_snapshot_ = snap;
  }
  return snap;
}

json Rig::last_snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return last_snapshot_;
}

}  // namespace jenny5::teleop
