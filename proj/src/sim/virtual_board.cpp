#include "jenny5/sim/virtual_board.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jenny5::sim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::int64_t floor_div(const Rational& r) {
  std::int64_t q = r.numerator() / r.denominator();
  if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
  return q;
}

std::int64_t ceil_div(const Rational& r) { return -floor_div(-r); }

// Nearest integer, halves away from zero.
std::int64_t round_nearest(const Rational& r) {
  return r < 0 ? -floor_div(-r + Rational(1, 2)) : floor_div(r + Rational(1, 2));
}

constexpr std::int32_t kServoMin = 0;
constexpr std::int32_t kServoMax = 180;

}  // namespace

VirtualBoard::VirtualBoard(BoardConfig config) : config_(std::move(config)) {
  for (const auto& b : config_.bindings) {
    if (b.units_per_step.numerator() == 0) throw std::invalid_argument("binding units_per_step must be non-zero");
    if (b.direction != 1 && b.direction != -1) throw std::invalid_argument("binding direction must be +1 or -1");
  }
}

void VirtualBoard::submit(std::string_view frame) { inbound_.emplace_back(frame); }

void VirtualBoard::reject() { inbound_.emplace_back(); }

bool VirtualBoard::any_moving() const {
  return std::any_of(steppers_.begin(), steppers_.end(),
                     [](const auto& m) { return m.state == StepperState::Moving; });
}

const JointBinding* VirtualBoard::binding_for(SensorRef sensor) const {
  for (const auto& b : config_.bindings) {
    if (b.sensor == sensor) return &b;
  }
  return nullptr;
}

std::optional<Rational> VirtualBoard::sensor_value(SensorRef sensor) const {
  const JointBinding* b = binding_for(sensor);
  if (!b) return std::nullopt;
  std::int64_t position = 0;
  if (b->motor >= 0 && static_cast<std::size_t>(b->motor) < steppers_.size()) {
    position = steppers_[static_cast<std::size_t>(b->motor)].current_position;
  }
  return b->reading_at(position);
}

std::int32_t VirtualBoard::as5147_reading(int index) const {
  auto value = sensor_value({SensorKind::AS5147, index});
  if (!value) return config_.unbound_sensor_reading;
  return static_cast<std::int32_t>(round_nearest(*value));
}

void VirtualBoard::emit(const scufy::Response& response) {
  outbound_.push_back(scufy::encode_response(response));
}

void VirtualBoard::error() { emit(scufy::rsp::Error{}); }

bool VirtualBoard::valid_stepper(int index) const {
  return steppers_created_ && index >= 0 && static_cast<std::size_t>(index) < steppers_.size();
}

const JointBinding* VirtualBoard::positional_binding(int motor_index, const SensorAttachSpec& spec) const {
  if (!spec.is_positional()) return nullptr;
  const JointBinding* b = binding_for({spec.kind, spec.index});
  if (!b || b->motor != motor_index) return nullptr;
  return b;
}

std::pair<std::optional<std::int64_t>, std::optional<std::int64_t>> VirtualBoard::guard_interval(
    int index) const {
  std::optional<std::int64_t> lo;
  std::optional<std::int64_t> hi;
  for (const auto& spec : steppers_[static_cast<std::size_t>(index)].attached) {
    const JointBinding* b = positional_binding(index, spec);
    if (!b) continue;
    // reading(p) = offset + slope·p is monotone in p, so the readable window
    // maps onto a closed step interval.
    Rational slope = Rational(b->direction) * b->units_per_step;
    Rational a = (Rational(spec.low()) - b->offset) / slope;
    Rational c = (Rational(spec.high()) - b->offset) / slope;
    if (a > c) std::swap(a, c);
    std::int64_t p_lo = ceil_div(a);
    std::int64_t p_hi = floor_div(c);
    lo = lo ? std::max(*lo, p_lo) : p_lo;
    hi = hi ? std::min(*hi, p_hi) : p_hi;
  }
  return {lo, hi};
}

void VirtualBoard::halt(StepperMotorSim& motor) {
  motor.target_position = motor.current_position;
  motor.exact_position = static_cast<double>(motor.current_position);
  motor.velocity = 0.0;
  motor.pending = StepperMotorSim::Completion::None;
}

void VirtualBoard::start_motion(int index, std::int64_t target, StepperMotorSim::Completion completion) {
  auto& m = steppers_[static_cast<std::size_t>(index)];
  m.target_position = target;
  m.pending = completion;
  if (target == m.current_position) {
    m.exact_position = static_cast<double>(target);
    m.velocity = 0.0;
    m.pending = StepperMotorSim::Completion::None;
    m.state = StepperState::Locked;
    if (completion == StepperMotorSim::Completion::Home) {
      emit(scufy::rsp::StepperHomed{index});
    } else {
      emit(scufy::rsp::StepperMoveDone{index, 0});
    }
    return;
  }
  m.state = StepperState::Moving;
}

void VirtualBoard::execute(const scufy::Command& command) {
  using namespace scufy;
  std::visit(
      Overloaded{
          [&](const cmd::TestConnection&) { emit(rsp::Alive{}); },
          [&](const cmd::GetVersion&) { emit(rsp::Version{config_.firmware_version}); },
          [&](const cmd::CreateSteppers& c) {
            // Physical joints do not move when the controller is rebuilt, so
            // fold the old positions into the binding offsets.
            for (auto& b : config_.bindings) {
              if (b.motor >= 0 && static_cast<std::size_t>(b.motor) < steppers_.size()) {
                b.offset = b.reading_at(steppers_[static_cast<std::size_t>(b.motor)].current_position);
              }
            }
            steppers_.clear();
            for (const auto& pins : c.pins) {
              StepperMotorSim m;
              m.pins = pins;
              m.max_speed = config_.default_max_speed;
              m.acceleration = config_.default_acceleration;
              steppers_.push_back(m);
            }
            steppers_created_ = true;
            emit(rsp::SteppersCreated{});
          },
          [&](const cmd::CreateServos& c) {
            servos_.clear();
            for (std::size_t i = 0; i < c.pins.size(); ++i) {
              ServoSim s;
              s.pin = c.pins[i];
              auto it = config_.servo_homes.find(static_cast<int>(i));
              s.home = it != config_.servo_homes.end() ? it->second : config_.default_servo_home;
              s.home = std::clamp(s.home, kServoMin, kServoMax);
              s.position = s.home;
              servos_.push_back(s);
            }
            servos_created_ = true;
            emit(rsp::ServosCreated{});
          },
          [&](const cmd::CreateAS5147s& c) {
            as5147s_.clear();
            for (int pin : c.pins) as5147s_.push_back(AS5147Sim{pin});
            as5147s_created_ = true;
            emit(rsp::AS5147sCreated{});
          },
          [&](const cmd::AttachSensors& c) {
            if (!valid_stepper(c.motor)) return error();
            for (const auto& s : c.sensors) {
              if (s.kind == SensorKind::AS5147 &&
                  (!as5147s_created_ || static_cast<std::size_t>(s.index) >= as5147s_.size())) {
                return error();
              }
            }
            steppers_[static_cast<std::size_t>(c.motor)].attached = c.sensors;
            emit(rsp::SensorsAttached{c.motor});
          },
          [&](const cmd::RemoveAttachedSensors& c) {
            if (!valid_stepper(c.motor)) return error();
            steppers_[static_cast<std::size_t>(c.motor)].attached.clear();
            emit(rsp::SensorsRemoved{c.motor});
          },
          [&](const cmd::MoveStepper& c) {
            if (!valid_stepper(c.motor)) return error();
            const auto& m = steppers_[static_cast<std::size_t>(c.motor)];
            start_motion(c.motor, m.current_position + c.steps, StepperMotorSim::Completion::Move);
          },
          [&](const cmd::GotoSensorPosition& c) {
            if (!valid_stepper(c.motor)) return error();
            const auto& m = steppers_[static_cast<std::size_t>(c.motor)];
            if (m.attached.empty()) return error();
            const JointBinding* b = positional_binding(c.motor, m.attached.front());
            if (!b) return error();
            Rational steps = (Rational(c.position) - b->offset) / (Rational(b->direction) * b->units_per_step);
            start_motion(c.motor, round_nearest(steps), StepperMotorSim::Completion::Move);
          },
          [&](const cmd::GoHomeStepper& c) {
            if (!valid_stepper(c.motor)) return error();
            auto& m = steppers_[static_cast<std::size_t>(c.motor)];
            const JointBinding* b = m.attached.empty() ? nullptr : positional_binding(c.motor, m.attached.front());
            if (!b) {
              // Nothing to home against: acknowledge without moving.
              halt(m);
              if (m.state == StepperState::Moving) m.state = StepperState::Locked;
              emit(rsp::StepperHomed{c.motor});
              return;
            }
            Rational steps = (Rational(m.attached.front().home) - b->offset) /
                             (Rational(b->direction) * b->units_per_step);
            start_motion(c.motor, round_nearest(steps), StepperMotorSim::Completion::Home);
          },
          [&](const cmd::StopStepper& c) {
            if (!valid_stepper(c.motor)) return error();
            auto& m = steppers_[static_cast<std::size_t>(c.motor)];
            halt(m);
            if (m.state == StepperState::Moving) m.state = StepperState::Locked;
            emit(rsp::StepperStopped{c.motor});
          },
          [&](const cmd::LockStepper& c) {
            if (!valid_stepper(c.motor)) return error();
            auto& m = steppers_[static_cast<std::size_t>(c.motor)];
            halt(m);
            m.state = StepperState::Locked;
            emit(rsp::StepperLocked{c.motor});
          },
          [&](const cmd::DisableStepper& c) {
            if (!valid_stepper(c.motor)) return error();
            auto& m = steppers_[static_cast<std::size_t>(c.motor)];
            halt(m);
            m.state = StepperState::Disabled;
            emit(rsp::StepperDisabled{c.motor});
          },
          [&](const cmd::SetSpeedAccel& c) {
            if (!valid_stepper(c.motor) || c.speed == 0) return error();
            auto& m = steppers_[static_cast<std::size_t>(c.motor)];
            m.max_speed = c.speed;
            m.acceleration = c.acceleration;
            double limit = static_cast<double>(c.speed);
            m.velocity = std::clamp(m.velocity, -limit, limit);
            emit(rsp::SpeedAccelSet{c.motor});
          },
          [&](const cmd::MoveServo& c) {
            if (!servos_created_ || c.servo < 0 || static_cast<std::size_t>(c.servo) >= servos_.size()) {
              return error();
            }
            auto& s = servos_[static_cast<std::size_t>(c.servo)];
            s.position = std::clamp(c.position, kServoMin, kServoMax);
            emit(rsp::ServoMoveDone{c.servo, s.position == c.position ? 0 : 1});
          },
          [&](const cmd::HomeServo& c) {
            if (!servos_created_ || c.servo < 0 || static_cast<std::size_t>(c.servo) >= servos_.size()) {
              return error();
            }
            auto& s = servos_[static_cast<std::size_t>(c.servo)];
            s.position = s.home;
            emit(rsp::ServoHomed{c.servo});
          },
          [&](const cmd::ReadAS5147& c) {
            if (!as5147s_created_ || c.sensor < 0 || static_cast<std::size_t>(c.sensor) >= as5147s_.size()) {
              return error();
            }
            emit(rsp::AS5147Reading{c.sensor, as5147_reading(c.sensor)});
          },
          [&](const cmd::ReadUltrasonic& c) {
            auto it = config_.ultrasonic_cm.find(c.sensor);
            emit(rsp::UltrasonicReading{
                c.sensor, it != config_.ultrasonic_cm.end() ? it->second : config_.default_ultrasonic_cm});
          },
      },
      command);
}

void VirtualBoard::integrate(int index, double dt) {
  auto& m = steppers_[static_cast<std::size_t>(index)];
  if (m.state != StepperState::Moving) return;

  const double target = static_cast<double>(m.target_position);
  const double dir = target >= m.exact_position ? 1.0 : -1.0;
  const double vmax = static_cast<double>(m.max_speed);
  const bool unlimited = m.acceleration == 0;
  const double accel = static_cast<double>(m.acceleration);

  // Exact bang-bang trapezoid within the tick, one phase at a time. Work in
  // the frame of travel: d is distance still to go, v speed toward the target.
  double d = std::abs(target - m.exact_position);
  double v = unlimited ? vmax : dir * m.velocity;
  double t_left = dt;
  for (int phase = 0; phase < 8 && t_left > 0 && d > 1e-9; ++phase) {
    if (unlimited) {
      double t = std::min(t_left, d / vmax);
      d -= vmax * t;
      t_left -= t;
      continue;
    }
    double t = 0, a = 0;
    if (v < 0) {
      // heading away from a target that moved behind us
      t = std::min(t_left, -v / accel);
      a = accel;
    } else if (v * v / (2 * accel) >= d) {
      // brake exactly onto the target
      a = v > 0 ? -v * v / (2 * d) : 0;
      t = v > 0 ? std::min(t_left, 2 * d / v) : t_left;
      if (v == 0) break;
    } else if (v > vmax) {
      t = std::min(t_left, (v - vmax) / accel);
      a = -accel;
    } else if (v < vmax) {
      double v_peak = std::min(vmax, std::sqrt(accel * d + v * v / 2));
      t = std::min(t_left, (v_peak - v) / accel);
      a = accel;
      if (t <= 0) {
        t = std::min(t_left, (d - v * v / (2 * accel)) / std::max(v, 1e-9));
        a = 0;
      }
    } else {
      t = std::min(t_left, (d - vmax * vmax / (2 * accel)) / vmax);
      a = 0;
    }
    d -= v * t + 0.5 * a * t * t;
    v += a * t;
    t_left -= t;
  }
  // Anything within a thousandth of a step has arrived.
  if (d < 1e-3) {
    d = 0;
    v = 0;
  }
  double v_new = unlimited ? (d > 0 ? dir * vmax : 0.0) : dir * v;
  double next = target - dir * d;

  bool reached = d == 0;
  bool guarded = false;

  auto [lo, hi] = guard_interval(index);
  double candidate = reached ? target : next;
  if (hi && candidate > static_cast<double>(*hi) && candidate > m.exact_position) {
    candidate = std::max(static_cast<double>(*hi), m.exact_position);
    guarded = true;
  }
  if (lo && candidate < static_cast<double>(*lo) && candidate < m.exact_position) {
    candidate = std::min(static_cast<double>(*lo), m.exact_position);
    guarded = true;
  }

  m.peak_speed = std::max(m.peak_speed, std::abs(v_new));
  if (!reached && !guarded) {
    m.exact_position = next;
    m.velocity = v_new;
    m.current_position = std::llround(next);
    return;
  }

  m.exact_position = guarded ? std::round(candidate) : target;
  m.current_position = std::llround(m.exact_position);
  m.exact_position = static_cast<double>(m.current_position);
  m.velocity = 0.0;
  m.state = StepperState::Locked;
  auto completion = m.pending;
  m.pending = StepperMotorSim::Completion::None;
  std::int64_t left = std::llabs(m.target_position - m.current_position);
  m.target_position = m.current_position;
  if (completion == StepperMotorSim::Completion::Home) {
    emit(scufy::rsp::StepperHomed{index});
  } else {
    emit(scufy::rsp::StepperMoveDone{
        index, static_cast<std::uint32_t>(std::min<std::int64_t>(left, std::numeric_limits<std::uint32_t>::max()))});
  }
}

std::vector<std::string> VirtualBoard::tick(double dt) {
  if (!(dt > 0.0) || dt > 0.1) throw std::invalid_argument("tick dt must be in (0, 0.1]");
  while (!inbound_.empty()) {
    std::string frame = std::move(inbound_.front());
    inbound_.pop_front();
    auto decoded = scufy::decode_command(frame);
    if (!decoded) {
      error();
      continue;
    }
    execute(decoded.value());
  }
  for (std::size_t i = 0; i < steppers_.size(); ++i) integrate(static_cast<int>(i), dt);
  clock_ += dt;
  std::vector<std::string> out;
  out.swap(outbound_);
  return out;
}

}  // namespace jenny5::sim
