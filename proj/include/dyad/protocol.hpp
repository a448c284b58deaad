#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dyad/config.hpp"
#include "dyad/devices.hpp"
#include "dyad/game.hpp"
#include "dyad/session.hpp"
#include "dyad/survey.hpp"
#include "json.hpp"

namespace dyad::wire {

inline constexpr int kProtocolVersion = 1;

struct ClientHello {
    std::string dyad_id;
    Role role = Role::PCG;
    Device device = Device::Keyboard;
    int protocol_version = kProtocolVersion;
};

struct HelloAck {
    nlohmann::json config;
    nlohmann::json plan;  // summary: dyad id, block modes and devices, checkpoint positions
    int protocol_version = kProtocolVersion;
};

enum class PayloadKind { Command, Pedal, Keys, Imu, Roll };

struct InputPayload {
    PayloadKind kind = PayloadKind::Command;
    int direction = 0;        // Command
    PedalState pedal;         // Pedal
    std::set<Key> keys;       // Keys
    ImuSample imu;            // Imu
    double roll_deg = 0.0;    // Roll
};

struct Input {
    int client_tick = 0;
    InputPayload payload;
};

struct AvatarView {
    Role role = Role::PCG;
    double x = 0.0;
    double z = 0.0;
};

struct BalloonView {
    int lane = 0;
    int index = 0;
    double x = 0.0;
    double z = 0.0;
};

struct StateUpdate {
    int server_tick = 0;
    std::vector<AvatarView> avatars;
    std::optional<CollabBall> ball;
    std::vector<BalloonView> balloons;  // uncollected, ahead of the avatars
    std::vector<int> scores;            // per lane
    int score = 0;
    double time_remaining = 0.0;
};

struct TrialControl {
    enum class Action { Start, End };
    Action action = Action::Start;
    nlohmann::json trial;  // trial metadata
    bool complete = false;           // End only
    std::vector<int> final_scores;   // End only
};

struct SurveyPrompt {
    std::string position;
    Instrument instrument = Instrument::IMI;
    int scale_min = 1;
    int scale_max = 7;
    std::vector<std::string> items;
};

struct SurveyAnswer {
    Instrument instrument = Instrument::IMI;
    std::vector<int> item_scores;
};

struct Error {
    std::string code;
    std::string message;
};

using Body = std::variant<ClientHello, HelloAck, Input, StateUpdate, TrialControl, SurveyPrompt, SurveyAnswer, Error>;

struct Message {
    std::uint64_t seq = 0;
    Body body;
};

std::string_view type_name(const Body& body);

nlohmann::json to_json(const Message& m);
std::string encode(const Message& m);

/// Throws ProtocolError for anything that is not a well-formed message.
Message decode(std::string_view text);

/// Issues strictly increasing sequence numbers starting at 1.
class SeqCounter {
public:
    std::uint64_t next() { return ++last_; }

private:
    std::uint64_t last_ = 0;
};

/// Accepts only strictly increasing sequence numbers.
class SeqChecker {
public:
    /// Throws ProtocolError when seq does not exceed the last accepted one.
    void accept(std::uint64_t seq);

private:
    std::uint64_t last_ = 0;
};

HelloAck make_hello_ack(const SessionPlan& plan, const GameConfig& config);

/// Visible state for a running trial. Balloons are those not yet collected with z ahead of the
/// rearmost avatar, up to `horizon` metres.
StateUpdate make_state_update(const TrialState& state, const GameConfig& config, double horizon = 30.0);

SurveyPrompt make_survey_prompt(const std::string& position, const InstrumentDefinition& def);

}  // namespace dyad::wire
