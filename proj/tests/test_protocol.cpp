#include "doctest.h"
#include "dyad/protocol.hpp"
#include "dyad/record_io.hpp"

using namespace dyad;
using namespace dyad::wire;
using nlohmann::json;

namespace {

void round_trips(const Body& body, std::uint64_t seq = 7) {
    const Message m{seq, body};
    const auto back = decode(encode(m));
    CHECK(back.seq == seq);
    CHECK(back.body.index() == body.index());
    CHECK(to_json(back) == to_json(m));
}

}  // namespace

TEST_CASE("every message type round trips") {
    round_trips(ClientHello{"D1", Role::PPS, Device::Joystick, kProtocolVersion});
    round_trips(make_hello_ack(build_plan("D1", Device::Pedal, 3), GameConfig{}));

    InputPayload cmd;
    cmd.direction = -1;
    round_trips(Input{12, cmd});
    InputPayload pedal;
    pedal.kind = PayloadKind::Pedal;
    pedal.pedal = {true, false};
    round_trips(Input{0, pedal});
    InputPayload keys;
    keys.kind = PayloadKind::Keys;
    keys.keys = {Key::ArrowLeft, Key::ArrowRight};
    round_trips(Input{1, keys});
    InputPayload imu;
    imu.kind = PayloadKind::Imu;
    imu.imu = {0.01, {0.1, 0.2, 9.8}, {0.0, 0.01, 0.0}, Vec3{0.3, 0.0, 0.4}};
    round_trips(Input{2, imu});
    InputPayload roll;
    roll.kind = PayloadKind::Roll;
    roll.roll_deg = 25.5;
    round_trips(Input{3, roll});

    StateUpdate su;
    su.server_tick = 9;
    su.avatars = {{Role::PPS, 0.5, 0.45}, {Role::PCG, -0.25, 0.45}};
    su.ball = CollabBall{0.125, 0.075, true};
    su.balloons = {{0, 1, 0.3, 3.75}};
    su.scores = {3};
    su.score = 3;
    su.time_remaining = 29.85;
    round_trips(su);
    su.ball.reset();
    round_trips(su);

    round_trips(TrialControl{TrialControl::Action::Start, json{{"block", 1}}, false, {}});
    round_trips(TrialControl{TrialControl::Action::End, json{{"block", 1}}, true, {5, 7}});
    round_trips(make_survey_prompt("after_block1", default_instruments().at(Instrument::PANAS)));
    round_trips(SurveyAnswer{Instrument::IOS, {4}});
    round_trips(Error{"bad_input", "no"});
}

TEST_CASE("wire shapes") {
    InputPayload pedal;
    pedal.kind = PayloadKind::Pedal;
    const auto j = to_json({1, Input{4, pedal}});
    CHECK(j["type"] == "Input");
    CHECK(j["seq"] == 1);
    CHECK(j["client_tick"] == 4);
    CHECK(j["payload"]["kind"] == "pedal");

    // pedal fields accept 0/1 as well as booleans
    const auto m = decode(R"({"type":"Input","seq":2,"client_tick":0,"payload":{"kind":"pedal","left":0,"right":1}})");
    const auto& in = std::get<Input>(m.body);
    CHECK_FALSE(in.payload.pedal.left);
    CHECK(in.payload.pedal.right);

    StateUpdate su;
    CHECK(to_json({3, su})["ball"].is_null());
    const auto prompt = to_json({4, make_survey_prompt("session_start", default_instruments().at(Instrument::IOS))});
    CHECK(prompt["scale"] == json::array({1, 7}));
    CHECK(prompt["items"].size() == 1);
}

TEST_CASE("malformed messages are rejected") {
    for (const char* text : {
             "not json",
             "[]",
             R"({"seq":1})",
             R"({"type":"ClientHello","seq":0,"dyad_id":"D","role":"PPS","device":"joystick","protocol_version":1})",
             R"({"type":"ClientHello","seq":-3,"dyad_id":"D","role":"PPS","device":"joystick","protocol_version":1})",
             R"({"type":"ClientHello","seq":1.5,"dyad_id":"D","role":"PPS","device":"joystick","protocol_version":1})",
             R"({"type":"ClientHello","seq":1,"dyad_id":"D","role":"nurse","device":"joystick","protocol_version":1})",
             R"({"type":"teleport","seq":1})",
             R"({"type":"Input","seq":1,"client_tick":0,"payload":{"kind":"telepathy"}})",
             R"({"type":"Input","seq":1,"client_tick":0})",
             R"({"type":"SurveyAnswer","seq":1,"instrument":"IMI","item_scores":"many"})",
         }) {
        CAPTURE(text);
        CHECK_THROWS_AS(decode(text), ProtocolError);
    }
}

TEST_CASE("sequence numbers") {
    SeqCounter c;
    CHECK(c.next() == 1);
    CHECK(c.next() == 2);
    SeqChecker k;
    k.accept(1);
    k.accept(5);
    CHECK_THROWS_AS(k.accept(5), ProtocolError);
    CHECK_THROWS_AS(k.accept(2), ProtocolError);
    k.accept(6);
}

TEST_CASE("hello ack summarizes the plan") {
    const auto plan = build_plan("D7", Device::Keyboard, 8);
    const auto ack = make_hello_ack(plan, GameConfig{});
    CHECK(ack.plan["dyad_id"] == "D7");
    REQUIRE(ack.plan["blocks"].size() == 4);
    for (std::size_t b = 0; b < 4; ++b) {
        CHECK(ack.plan["blocks"][b]["number"] == static_cast<int>(b + 1));
        CHECK(ack.plan["blocks"][b]["trials"] == 8);
    }
    CHECK(ack.config == config_to_json(GameConfig{}));
}

TEST_CASE("state updates show what lies ahead") {
    GameConfig c;
    const auto meta = make_trial_meta(Mode::Collaborative, {Role::PPS, Role::PCG}, {1.0}, 5, c);
    std::array roles{Role::PPS, Role::PCG};
    auto s = make_trial_state(Mode::Collaborative, roles, fields_for(meta, c), meta.seed, c);
    for (int t = 0; t < 120; ++t) {
        std::array dirs{1, -1};
        s = tick(std::move(s), dirs, c);
    }
    const auto su = make_state_update(s, c, 30.0);
    CHECK(su.server_tick == 120);
    CHECK(su.time_remaining == doctest::Approx(28.0));
    REQUIRE(su.ball);
    CHECK(su.ball->x == doctest::Approx((s.avatars[0].x + s.avatars[1].x) / 2));
    const double rear = std::min(s.avatars[0].z, s.avatars[1].z);
    // independent count of visible balloons
    int expected = 0;
    for (const auto& b : s.lanes[0].field.balloons)
        if (!b.collected && b.z >= rear && b.z <= rear + 30.0) ++expected;
    CHECK(static_cast<int>(su.balloons.size()) == expected);
    for (const auto& b : su.balloons) CHECK(b.z >= rear);
}
