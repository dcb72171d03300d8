#include "jenny5/scufy/protocol.hpp"

#include <charconv>
#include <limits>
#include <type_traits>

namespace jenny5::scufy {

std::string_view to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::EmptyFrame: return "empty frame";
    case DecodeErrorKind::MissingTerminator: return "missing terminator";
    case DecodeErrorKind::UnknownOpcode: return "unknown opcode";
    case DecodeErrorKind::ArityMismatch: return "arity mismatch";
    case DecodeErrorKind::NonNumericField: return "non-numeric field";
    case DecodeErrorKind::OutOfRange: return "value out of range";
    case DecodeErrorKind::InvalidValue: return "invalid value";
  }
  return "unknown";
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------- encoding

class Writer {
 public:
  Writer& op(std::string_view opcode) {
    out_ += opcode;
    return *this;
  }
  Writer& op(std::string_view opcode, int index) {
    out_ += opcode;
    out_ += std::to_string(index);
    return *this;
  }
  template <class T>
  Writer& arg(T value) {
    out_ += ' ';
    if constexpr (std::is_convertible_v<T, std::string_view>) {
      out_ += std::string_view(value);
    } else {
      out_ += std::to_string(value);
    }
    return *this;
  }
  std::string finish() {
    out_ += kTerminator;
    return std::move(out_);
  }

 private:
  std::string out_;
};

template <class Range>
std::string encode_create(std::string_view opcode, const Range& pins) {
  Writer w;
  w.op(opcode).arg(pins.size());
  for (int pin : pins) w.arg(pin);
  return w.finish();
}

// ---------------------------------------------------------------- decoding

struct Token {
  std::string_view text;
  std::size_t offset = 0;
};

struct Failure {
  DecodeError error;
};

[[noreturn]] void fail(DecodeErrorKind kind, std::size_t offset) {
  throw Failure{DecodeError{kind, offset}};
}

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Tokenized frame body. The opcode token is split into its letter prefix
// and the juxtaposed remainder ("SM12" -> "SM" + "12").
class Frame {
 public:
  explicit Frame(std::string_view frame) {
    if (frame.empty()) fail(DecodeErrorKind::EmptyFrame, 0);
    if (frame.back() != kTerminator) fail(DecodeErrorKind::MissingTerminator, frame.size());
    body_ = frame.substr(0, frame.size() - 1);
    std::size_t i = 0;
    while (i < body_.size()) {
      if (is_blank(body_[i])) {
        ++i;
        continue;
      }
      std::size_t start = i;
      while (i < body_.size() && !is_blank(body_[i])) ++i;
      tokens_.push_back({body_.substr(start, i - start), start});
    }
    if (tokens_.empty()) fail(DecodeErrorKind::EmptyFrame, 0);

    const Token& head = tokens_.front();
    std::size_t letters = 0;
    while (letters < head.text.size() && letters < 2 && head.text[letters] >= 'A' &&
           head.text[letters] <= 'Z') {
      ++letters;
    }
    if (letters == 0) fail(DecodeErrorKind::UnknownOpcode, head.offset);
    opcode_ = head.text.substr(0, letters);
    suffix_ = Token{head.text.substr(letters), head.offset + letters};
    next_ = 1;
  }

  std::string_view opcode() const { return opcode_; }
  std::size_t opcode_offset() const { return tokens_.front().offset; }
  const Token& suffix() const { return suffix_; }
  std::string_view body() const { return body_; }

  void require_no_suffix() const {
    if (!suffix_.text.empty()) fail(DecodeErrorKind::UnknownOpcode, opcode_offset());
  }

  int index() const {
    if (suffix_.text.empty()) fail(DecodeErrorKind::ArityMismatch, suffix_.offset);
    return static_cast<int>(parse<std::int64_t>(suffix_, 0, kMaxIndex));
  }

  std::size_t remaining() const { return tokens_.size() - next_; }

  const Token& next_token() {
    if (next_ >= tokens_.size()) fail(DecodeErrorKind::ArityMismatch, body_.size());
    return tokens_[next_++];
  }

  template <class T>
  T next(std::int64_t lo = std::numeric_limits<T>::min(),
         std::int64_t hi = std::numeric_limits<T>::max()) {
    return static_cast<T>(parse<std::int64_t>(next_token(), lo, hi));
  }

  void expect_end() const {
    if (next_ != tokens_.size()) fail(DecodeErrorKind::ArityMismatch, tokens_[next_].offset);
  }

  static std::int64_t parse_number(const Token& token, std::int64_t lo, std::int64_t hi) {
    return parse<std::int64_t>(token, lo, hi);
  }

 private:
  template <class T>
  static T parse(const Token& token, std::int64_t lo, std::int64_t hi) {
    std::string_view text = token.text;
    if (text.empty()) fail(DecodeErrorKind::NonNumericField, token.offset);
    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) fail(DecodeErrorKind::OutOfRange, token.offset);
    if (ec != std::errc() || ptr != last) fail(DecodeErrorKind::NonNumericField, token.offset);
    if (value < lo || value > hi) fail(DecodeErrorKind::OutOfRange, token.offset);
    return static_cast<T>(value);
  }

  std::string_view body_;
  std::vector<Token> tokens_;
  std::string_view opcode_;
  Token suffix_;
  std::size_t next_ = 0;
};

std::vector<int> decode_pin_list(Frame& f) {
  f.require_no_suffix();
  auto n = f.next<int>(0, kMaxIndex + 1);
  if (n < 1) fail(DecodeErrorKind::InvalidValue, f.opcode_offset());
  std::vector<int> pins;
  pins.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pins.push_back(f.next<int>(0, kMaxPin));
  f.expect_end();
  return pins;
}

SensorAttachSpec decode_sensor(Frame& f) {
  const Token& tag = f.next_token();
  if (tag.text.empty()) fail(DecodeErrorKind::InvalidValue, tag.offset);
  SensorAttachSpec spec;
  switch (tag.text.front()) {
    case 'A': spec.kind = SensorKind::AS5147; break;
    case 'P': spec.kind = SensorKind::Potentiometer; break;
    case 'B': spec.kind = SensorKind::Button; break;
    case 'I': spec.kind = SensorKind::Infrared; break;
    default: fail(DecodeErrorKind::InvalidValue, tag.offset);
  }
  Token index{tag.text.substr(1), tag.offset + 1};
  if (index.text.empty()) fail(DecodeErrorKind::ArityMismatch, index.offset);
  spec.index = static_cast<int>(Frame::parse_number(index, 0, kMaxIndex));
  if (spec.is_positional()) {
    spec.end1 = f.next<std::int32_t>();
    spec.end2 = f.next<std::int32_t>();
    const Token& home = f.next_token();
    spec.home = static_cast<std::int32_t>(Frame::parse_number(
        home, std::numeric_limits<std::int32_t>::min(), std::numeric_limits<std::int32_t>::max()));
    if (spec.home < spec.low() || spec.home > spec.high()) {
      fail(DecodeErrorKind::InvalidValue, home.offset);
    }
  }
  const Token& dir = f.next_token();
  spec.direction = static_cast<int>(Frame::parse_number(dir, -1, 1));
  if (spec.direction == 0) fail(DecodeErrorKind::InvalidValue, dir.offset);
  return spec;
}

Command decode_command_impl(std::string_view frame) {
  Frame f(frame);
  const std::string_view op = f.opcode();

  auto indexed = [&](auto tag) {
    using T = decltype(tag);
    int index = f.index();
    f.expect_end();
    return Command{T{index}};
  };

  if (op == "T") {
    f.require_no_suffix();
    f.expect_end();
    return cmd::TestConnection{};
  }
  if (op == "V") {
    f.require_no_suffix();
    f.expect_end();
    return cmd::GetVersion{};
  }
  if (op == "CS") {
    f.require_no_suffix();
    auto n = f.next<int>(0, kMaxIndex + 1);
    if (n < 1) fail(DecodeErrorKind::InvalidValue, f.opcode_offset());
    cmd::CreateSteppers c;
    for (int i = 0; i < n; ++i) {
      PinTriple p;
      p.dir_pin = f.next<int>(0, kMaxPin);
      p.step_pin = f.next<int>(0, kMaxPin);
      p.enable_pin = f.next<int>(0, kMaxPin);
      c.pins.push_back(p);
    }
    f.expect_end();
    return c;
  }
  if (op == "CV") return cmd::CreateServos{decode_pin_list(f)};
  if (op == "CA") return cmd::CreateAS5147s{decode_pin_list(f)};
  if (op == "AS") {
    cmd::AttachSensors c;
    c.motor = f.index();
    auto n = f.next<int>(0, kMaxIndex + 1);
    for (int i = 0; i < n; ++i) c.sensors.push_back(decode_sensor(f));
    f.expect_end();
    return c;
  }
  if (op == "SM") {
    cmd::MoveStepper c;
    c.motor = f.index();
    c.steps = f.next<std::int32_t>();
    f.expect_end();
    return c;
  }
  if (op == "SG") {
    cmd::GotoSensorPosition c;
    c.motor = f.index();
    c.position = f.next<std::int32_t>();
    f.expect_end();
    return c;
  }
  if (op == "SS") {
    cmd::SetSpeedAccel c;
    c.motor = f.index();
    c.speed = f.next<std::uint32_t>();
    c.acceleration = f.next<std::uint32_t>();
    f.expect_end();
    return c;
  }
  if (op == "VM") {
    cmd::MoveServo c;
    c.servo = f.index();
    c.position = f.next<std::int32_t>();
    f.expect_end();
    return c;
  }
  if (op == "SH") return indexed(cmd::GoHomeStepper{});
  if (op == "SD") return indexed(cmd::DisableStepper{});
  if (op == "SL") return indexed(cmd::LockStepper{});
  if (op == "ST") return indexed(cmd::StopStepper{});
  if (op == "VH") return indexed(cmd::HomeServo{});
  if (op == "RA") return indexed(cmd::ReadAS5147{});
  if (op == "RU") return indexed(cmd::ReadUltrasonic{});
  if (op == "AD") return indexed(cmd::RemoveAttachedSensors{});
  fail(DecodeErrorKind::UnknownOpcode, f.opcode_offset());
}

// Info frames carry free text, so they bypass tokenization.
std::optional<Response> decode_info(std::string_view frame) {
  std::size_t start = 0;
  while (start < frame.size() && is_blank(frame[start])) ++start;
  if (start >= frame.size() || frame[start] != 'I') return std::nullopt;
  if (frame.back() != kTerminator) return std::nullopt;
  std::string_view rest = frame.substr(start + 1, frame.size() - start - 2);
  if (!rest.empty() && rest.front() != ' ') return std::nullopt;
  if (!rest.empty()) rest.remove_prefix(1);
  while (!rest.empty() && (rest.back() == '\r' || rest.back() == '\n')) rest.remove_suffix(1);
  return rsp::Info{std::string(rest)};
}

Response decode_response_impl(std::string_view frame) {
  if (auto info = decode_info(frame)) return *info;
  Frame f(frame);
  const std::string_view op = f.opcode();

  auto indexed = [&](auto tag) {
    using T = decltype(tag);
    int index = f.index();
    f.expect_end();
    return Response{T{index}};
  };
  auto bare = [&](auto tag) {
    f.require_no_suffix();
    f.expect_end();
    return Response{tag};
  };

  if (op == "T") return bare(rsp::Alive{});
  if (op == "E") return bare(rsp::Error{});
  if (op == "CS") return bare(rsp::SteppersCreated{});
  if (op == "CV") return bare(rsp::ServosCreated{});
  if (op == "CA") return bare(rsp::AS5147sCreated{});
  if (op == "V") {
    const Token& text = f.suffix();
    if (text.text.empty()) fail(DecodeErrorKind::ArityMismatch, text.offset);
    for (char c : text.text) {
      if (!((c >= '0' && c <= '9') || c == '.')) fail(DecodeErrorKind::InvalidValue, text.offset);
    }
    f.expect_end();
    return rsp::Version{std::string(text.text)};
  }
  if (op == "SM") {
    rsp::StepperMoveDone r;
    r.motor = f.index();
    r.distance_to_go = f.next<std::uint32_t>();
    f.expect_end();
    return r;
  }
  if (op == "VM") {
    rsp::ServoMoveDone r;
    r.servo = f.index();
    r.clamped = f.next<int>(0, 1);
    f.expect_end();
    return r;
  }
  if (op == "RA") {
    rsp::AS5147Reading r;
    r.sensor = f.index();
    r.angle = f.next<std::int32_t>();
    f.expect_end();
    return r;
  }
  if (op == "RU") {
    rsp::UltrasonicReading r;
    r.sensor = f.index();
    r.distance_cm = f.next<std::int32_t>();
    f.expect_end();
    return r;
  }
  if (op == "AS") return indexed(rsp::SensorsAttached{});
  if (op == "SH") return indexed(rsp::StepperHomed{});
  if (op == "SD") return indexed(rsp::StepperDisabled{});
  if (op == "SL") return indexed(rsp::StepperLocked{});
  if (op == "SS") return indexed(rsp::SpeedAccelSet{});
  if (op == "ST") return indexed(rsp::StepperStopped{});
  if (op == "VH") return indexed(rsp::ServoHomed{});
  if (op == "AD") return indexed(rsp::SensorsRemoved{});
  fail(DecodeErrorKind::UnknownOpcode, f.opcode_offset());
}

}  // namespace

std::string encode_command(const Command& command) {
  return std::visit(
      Overloaded{
          [](const cmd::TestConnection&) { return Writer().op("T").finish(); },
          [](const cmd::GetVersion&) { return Writer().op("V").finish(); },
          [](const cmd::CreateSteppers& c) {
            Writer w;
            w.op("CS").arg(c.pins.size());
            for (const auto& p : c.pins) w.arg(p.dir_pin).arg(p.step_pin).arg(p.enable_pin);
            return w.finish();
          },
          [](const cmd::CreateServos& c) { return encode_create("CV", c.pins); },
          [](const cmd::CreateAS5147s& c) { return encode_create("CA", c.pins); },
          [](const cmd::AttachSensors& c) {
            Writer w;
            w.op("AS", c.motor).arg(c.sensors.size());
            for (const auto& s : c.sensors) {
              std::string tag(1, static_cast<char>(s.kind));
              tag += std::to_string(s.index);
              w.arg(tag);
              if (s.is_positional()) w.arg(s.end1).arg(s.end2).arg(s.home);
              w.arg(s.direction);
            }
            return w.finish();
          },
          [](const cmd::MoveStepper& c) { return Writer().op("SM", c.motor).arg(c.steps).finish(); },
          [](const cmd::GoHomeStepper& c) { return Writer().op("SH", c.motor).finish(); },
          [](const cmd::DisableStepper& c) { return Writer().op("SD", c.motor).finish(); },
          [](const cmd::LockStepper& c) { return Writer().op("SL", c.motor).finish(); },
          [](const cmd::SetSpeedAccel& c) {
            return Writer().op("SS", c.motor).arg(c.speed).arg(c.acceleration).finish();
          },
          [](const cmd::StopStepper& c) { return Writer().op("ST", c.motor).finish(); },
          [](const cmd::GotoSensorPosition& c) {
            return Writer().op("SG", c.motor).arg(c.position).finish();
          },
          [](const cmd::MoveServo& c) { return Writer().op("VM", c.servo).arg(c.position).finish(); },
          [](const cmd::HomeServo& c) { return Writer().op("VH", c.servo).finish(); },
          [](const cmd::ReadAS5147& c) { return Writer().op("RA", c.sensor).finish(); },
          [](const cmd::ReadUltrasonic& c) { return Writer().op("RU", c.sensor).finish(); },
          [](const cmd::RemoveAttachedSensors& c) { return Writer().op("AD", c.motor).finish(); },
      },
      command);
}

std::string encode_response(const Response& response) {
  return std::visit(
      Overloaded{
          [](const rsp::Alive&) { return Writer().op("T").finish(); },
          [](const rsp::Version& r) { return Writer().op("V").op(r.text).finish(); },
          [](const rsp::SteppersCreated&) { return Writer().op("CS").finish(); },
          [](const rsp::ServosCreated&) { return Writer().op("CV").finish(); },
          [](const rsp::AS5147sCreated&) { return Writer().op("CA").finish(); },
          [](const rsp::SensorsAttached& r) { return Writer().op("AS", r.motor).finish(); },
          [](const rsp::StepperMoveDone& r) {
            return Writer().op("SM", r.motor).arg(r.distance_to_go).finish();
          },
          [](const rsp::StepperHomed& r) { return Writer().op("SH", r.motor).finish(); },
          [](const rsp::StepperDisabled& r) { return Writer().op("SD", r.motor).finish(); },
          [](const rsp::StepperLocked& r) { return Writer().op("SL", r.motor).finish(); },
          [](const rsp::SpeedAccelSet& r) { return Writer().op("SS", r.motor).finish(); },
          [](const rsp::StepperStopped& r) { return Writer().op("ST", r.motor).finish(); },
          [](const rsp::ServoMoveDone& r) {
            return Writer().op("VM", r.servo).arg(r.clamped).finish();
          },
          [](const rsp::ServoHomed& r) { return Writer().op("VH", r.servo).finish(); },
          [](const rsp::AS5147Reading& r) {
            return Writer().op("RA", r.sensor).arg(r.angle).finish();
          },
          [](const rsp::UltrasonicReading& r) {
            return Writer().op("RU", r.sensor).arg(r.distance_cm).finish();
          },
          [](const rsp::SensorsRemoved& r) { return Writer().op("AD", r.motor).finish(); },
          [](const rsp::Error&) { return Writer().op("E").finish(); },
          [](const rsp::Info& r) {
            return r.text.empty() ? Writer().op("I").finish() : Writer().op("I").arg(r.text).finish();
          },
      },
      response);
}

Decoded<Command> decode_command(std::string_view frame) {
  try {
    return decode_command_impl(frame);
  } catch (const Failure& failure) {
    return failure.error;
  }
}

Decoded<Response> decode_response(std::string_view frame) {
  try {
    return decode_response_impl(frame);
  } catch (const Failure& failure) {
    return failure.error;
  }
}

FrameDecoder::FeedResult FrameDecoder::feed(std::string_view chunk) {
  FeedResult result;
  for (char c : chunk) {
    if (discarding_) {
      if (c == kTerminator) discarding_ = false;
      continue;
    }
    buffer_.push_back(c);
    if (c == kTerminator) {
      result.frames.push_back(std::move(buffer_));
      buffer_.clear();
    } else if (buffer_.size() >= max_frame_) {
      // No room left for a terminator: drop everything up to the next '#'.
      buffer_.clear();
      discarding_ = true;
      ++result.overflows;
      result.overflow_positions.push_back(result.frames.size());
    }
  }
  return result;
}

void FrameDecoder::reset() {
  buffer_.clear();
  discarding_ = false;
}

}  // namespace jenny5::scufy
