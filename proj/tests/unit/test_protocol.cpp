#include <doctest.h>

#include "scufy_gen.hpp"

#include "jenny5/scufy/protocol.hpp"

using namespace jenny5::scufy;
using jenny5::testing::Gen;
namespace gen = jenny5::testing::scufy_gen;

namespace {

template <class T>
T decoded_command(std::string_view frame) {
  auto d = decode_command(frame);
  REQUIRE_MESSAGE(d.ok(), frame);
  REQUIRE(std::holds_alternative<T>(d.value()));
  return std::get<T>(d.value());
}

DecodeErrorKind command_error(std::string_view frame) {
  auto d = decode_command(frame);
  REQUIRE_MESSAGE(!d.ok(), frame);
  return d.error().kind;
}

}  // namespace

TEST_CASE("literal command frames decode and re-encode byte for byte") {
  CHECK(decoded_command<cmd::TestConnection>("T#") == cmd::TestConnection{});
  CHECK(decoded_command<cmd::GetVersion>("V#") == cmd::GetVersion{});

  auto cs = decoded_command<cmd::CreateSteppers>("CS 3 5 4 12 7 6 12 9 8 12#");
  CHECK(cs.pins == std::vector<PinTriple>{{5, 4, 12}, {7, 6, 12}, {9, 8, 12}});
  CHECK(encode_command(cs) == "CS 3 5 4 12 7 6 12 9 8 12#");

  auto ca = decoded_command<cmd::CreateAS5147s>("CA 3 18 19 20#");
  CHECK(ca.pins == std::vector<int>{18, 19, 20});
  CHECK(encode_command(ca) == "CA 3 18 19 20#");

  auto as = decoded_command<cmd::AttachSensors>("AS0 1 A0 280 320 300 1#");
  REQUIRE(as.sensors.size() == 1);
  CHECK(as.motor == 0);
  CHECK(as.sensors[0] == SensorAttachSpec{SensorKind::AS5147, 0, 280, 320, 300, 1});
  CHECK(encode_command(as) == "AS0 1 A0 280 320 300 1#");

  CHECK(decoded_command<cmd::MoveStepper>("SM1 100#") == cmd::MoveStepper{1, 100});
  CHECK(decoded_command<cmd::GotoSensorPosition>("SG1 100#") == cmd::GotoSensorPosition{1, 100});
  CHECK(encode_command(cmd::MoveStepper{1, 100}) == "SM1 100#");
  CHECK(encode_command(cmd::GotoSensorPosition{1, 100}) == "SG1 100#");
}

TEST_CASE("every opcode has its wire form") {
  CHECK(encode_command(cmd::CreateServos{{9, 10}}) == "CV 2 9 10#");
  CHECK(encode_command(cmd::GoHomeStepper{3}) == "SH3#");
  CHECK(encode_command(cmd::DisableStepper{3}) == "SD3#");
  CHECK(encode_command(cmd::LockStepper{3}) == "SL3#");
  CHECK(encode_command(cmd::StopStepper{3}) == "ST3#");
  CHECK(encode_command(cmd::SetSpeedAccel{2, 1500, 500}) == "SS2 1500 500#");
  CHECK(encode_command(cmd::MoveServo{0, 90}) == "VM0 90#");
  CHECK(encode_command(cmd::HomeServo{0}) == "VH0#");
  CHECK(encode_command(cmd::ReadAS5147{4}) == "RA4#");
  CHECK(encode_command(cmd::ReadUltrasonic{1}) == "RU1#");
  CHECK(encode_command(cmd::RemoveAttachedSensors{3}) == "AD3#");
  CHECK(encode_command(cmd::MoveStepper{1, -50}) == "SM1 -50#");

  cmd::AttachSensors mixed{0, {{SensorKind::AS5147, 0, 280, 320, 300, 1}, {SensorKind::Button, 0, 0, 0, 0, 1}}};
  CHECK(encode_command(mixed) == "AS0 2 A0 280 320 300 1 B0 1#");
  cmd::AttachSensors ir{1, {{SensorKind::Infrared, 2, 0, 0, 0, -1}}};
  CHECK(encode_command(ir) == "AS1 1 I2 -1#");
}

TEST_CASE("response frames") {
  auto check = [](const Response& r, std::string_view wire) {
    CHECK(encode_response(r) == wire);
    auto d = decode_response(wire);
    REQUIRE_MESSAGE(d.ok(), wire);
    CHECK(d.value() == r);
  };
  check(rsp::Alive{}, "T#");
  check(rsp::Version{"2019.05.10.0"}, "V2019.05.10.0#");
  check(rsp::SteppersCreated{}, "CS#");
  check(rsp::ServosCreated{}, "CV#");
  check(rsp::AS5147sCreated{}, "CA#");
  check(rsp::SensorsAttached{0}, "AS0#");
  check(rsp::StepperMoveDone{1, 0}, "SM1 0#");
  check(rsp::StepperMoveDone{1, 37}, "SM1 37#");
  check(rsp::StepperHomed{0}, "SH0#");
  check(rsp::StepperDisabled{0}, "SD0#");
  check(rsp::StepperLocked{0}, "SL0#");
  check(rsp::SpeedAccelSet{2}, "SS2#");
  check(rsp::StepperStopped{2}, "ST2#");
  check(rsp::ServoMoveDone{0, 1}, "VM0 1#");
  check(rsp::ServoHomed{0}, "VH0#");
  check(rsp::AS5147Reading{0, 300}, "RA0 300#");
  check(rsp::UltrasonicReading{1, 100}, "RU1 100#");
  check(rsp::SensorsRemoved{3}, "AD3#");
  check(rsp::Error{}, "E#");
  check(rsp::Info{"motor 2 overheated"}, "I motor 2 overheated#");
  check(rsp::Info{""}, "I#");
}

TEST_CASE("decode errors name the kind and the offending offset") {
  CHECK(command_error("") == DecodeErrorKind::EmptyFrame);
  CHECK(command_error("#") == DecodeErrorKind::EmptyFrame);
  CHECK(command_error("T") == DecodeErrorKind::MissingTerminator);
  CHECK(command_error("XY1#") == DecodeErrorKind::UnknownOpcode);
  CHECK(command_error("1#") == DecodeErrorKind::UnknownOpcode);
  CHECK(command_error("SM1#") == DecodeErrorKind::ArityMismatch);
  CHECK(command_error("SM1 5 6#") == DecodeErrorKind::ArityMismatch);
  CHECK(command_error("SM 5#") == DecodeErrorKind::ArityMismatch);
  CHECK(command_error("SM1 abc#") == DecodeErrorKind::NonNumericField);
  CHECK(command_error("SM1 2147483648#") == DecodeErrorKind::OutOfRange);
  CHECK(command_error("SM255 1#") == DecodeErrorKind::OutOfRange);
  CHECK(command_error("CS 0#") == DecodeErrorKind::InvalidValue);
  CHECK(command_error("CA 1 256#") == DecodeErrorKind::OutOfRange);
  CHECK(command_error("AS0 1 A0 280 320 400 1#") == DecodeErrorKind::InvalidValue);
  CHECK(command_error("AS0 1 X0 1#") == DecodeErrorKind::InvalidValue);
  CHECK(command_error("AS0 1 B0 0#") == DecodeErrorKind::InvalidValue);

  auto d = decode_command("SM1 abc#");
  CHECK(d.error().offset == 4);
}

TEST_CASE("decoding tolerates blanks and line endings") {
  CHECK(decoded_command<cmd::MoveStepper>("  SM1   100 \r\n#") == cmd::MoveStepper{1, 100});
  CHECK(decoded_command<cmd::MoveStepper>("SM1 +100#") == cmd::MoveStepper{1, 100});
}

TEST_CASE("round trip over generated commands and responses") {
  Gen g(11);
  for (int i = 0; i < 10000; ++i) {
    auto c = gen::command(g);
    auto wire = encode_command(c);
    auto d = decode_command(wire);
    REQUIRE_MESSAGE(d.ok(), wire);
    REQUIRE(d.value() == c);
    REQUIRE(encode_command(d.value()) == wire);

    auto r = gen::response(g);
    auto rwire = encode_response(r);
    auto rd = decode_response(rwire);
    REQUIRE_MESSAGE(rd.ok(), rwire);
    REQUIRE(rd.value() == r);
  }
}

TEST_CASE("frame splitting does not depend on how the stream is chunked") {
  Gen g(12);
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> frames;
    std::string stream;
    for (int n = g.integer(1, 6); n > 0; --n) {
      frames.push_back(g.coin() ? encode_command(gen::command(g)) : encode_response(gen::response(g)));
      stream += frames.back();
    }
    FrameDecoder decoder;
    std::vector<std::string> got;
    std::size_t at = 0;
    while (at < stream.size()) {
      auto n = std::min<std::size_t>(stream.size() - at, g.integer<std::size_t>(1, 40));
      auto fed = decoder.feed(std::string_view(stream).substr(at, n));
      got.insert(got.end(), fed.frames.begin(), fed.frames.end());
      REQUIRE(fed.overflows == 0);
      at += n;
    }
    REQUIRE(got == frames);
    REQUIRE(decoder.pending() == 0);
  }
}

TEST_CASE("oversized frames are discarded and reported in order") {
  FrameDecoder decoder(16);
  auto fed = decoder.feed("T#" + std::string(40, 'x') + "#V#");
  CHECK(fed.frames == std::vector<std::string>{"T#", "V#"});
  CHECK(fed.overflows == 1);
  CHECK(fed.overflow_positions == std::vector<std::size_t>{1});
}

TEST_CASE("decoder survives random bytes") {
  Gen g(13);
  std::size_t accepted = 0;
  FrameDecoder stream_decoder;
  for (int i = 0; i < 100000; ++i) {
    std::string frame = g.bytes(g.integer<std::size_t>(0, 24));
    if (g.coin()) frame.push_back('#');
    auto c = decode_command(frame);
    auto r = decode_response(frame);
    if (c.ok()) {
      ++accepted;
      // Anything accepted re-encodes to a frame that decodes to the same value.
      auto again = decode_command(encode_command(c.value()));
      REQUIRE(again.ok());
      REQUIRE(again.value() == c.value());
    } else {
      REQUIRE(c.error().offset <= frame.size());
    }
    if (!r.ok()) REQUIRE(r.error().offset <= frame.size());
    stream_decoder.feed(frame);
    REQUIRE(stream_decoder.pending() < stream_decoder.max_frame());
  }
  MESSAGE("accepted " << accepted << " random frames");
}
