#include "dyad/protocol.hpp"

#include <algorithm>

#include "dyad/record_io.hpp"

namespace dyad::wire {

using nlohmann::json;

namespace {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

std::string_view payload_name(PayloadKind k) {
    switch (k) {
        case PayloadKind::Command: return "command";
        case PayloadKind::Pedal: return "pedal";
        case PayloadKind::Keys: return "keys";
        case PayloadKind::Imu: return "imu";
        case PayloadKind::Roll: return "roll";
    }
    return "command";
}

json payload_to_json(const InputPayload& p) {
    json j{{"kind", payload_name(p.kind)}};
    switch (p.kind) {
        case PayloadKind::Command: j["direction"] = p.direction; break;
        case PayloadKind::Pedal:
            j["left"] = p.pedal.left;
            j["right"] = p.pedal.right;
            break;
        case PayloadKind::Keys: {
            json held = json::array();
            for (Key k : p.keys) held.push_back(to_string(k));
            j["held"] = held;
            break;
        }
        case PayloadKind::Imu: j["sample"] = imu_to_json(p.imu); break;
        case PayloadKind::Roll: j["deg"] = p.roll_deg; break;
    }
    return j;
}

// Field accessors that turn every shape mismatch into a ProtocolError.
const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string str(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw ProtocolError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

double num(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number()) throw ProtocolError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

long long integer(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number_integer()) throw ProtocolError(std::string("field '") + key + "' must be an integer");
    return v.get<long long>();
}

std::vector<int> int_list(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_array()) throw ProtocolError(std::string("field '") + key + "' must be an array");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw ProtocolError(std::string("field '") + key + "' must hold integers");
        out.push_back(e.get<int>());
    }
    return out;
}

template <class F>
auto convert(F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ProtocolError(e.what());
    }
}

InputPayload payload_from_json(const json& j) {
    InputPayload p;
    const auto kind = str(j, "kind");
    if (kind == "command") {
        p.kind = PayloadKind::Command;
        const auto d = integer(j, "direction");
        if (d < -1 || d > 1) throw ProtocolError("direction must be -1, 0 or 1");
        p.direction = static_cast<int>(d);
    } else if (kind == "pedal") {
        p.kind = PayloadKind::Pedal;
        auto flag = [&](const char* key) {
            const auto& v = field(j, key);
            if (v.is_boolean()) return v.get<bool>();
            if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) return v.get<int>() == 1;
            throw ProtocolError(std::string("pedal '") + key + "' must be 0/1");
        };
        p.pedal.left = flag("left");
        p.pedal.right = flag("right");
    } else if (kind == "keys") {
        p.kind = PayloadKind::Keys;
        const auto& held = field(j, "held");
        if (!held.is_array()) throw ProtocolError("keys 'held' must be an array");
        for (const auto& k : held) {
            if (!k.is_string()) throw ProtocolError("key names must be strings");
            p.keys.insert(key_from_string(k.get<std::string>()));
        }
    } else if (kind == "imu") {
        p.kind = PayloadKind::Imu;
        p.imu = convert([&] { return imu_from_json(field(j, "sample")); });
    } else if (kind == "roll") {
        p.kind = PayloadKind::Roll;
        p.roll_deg = num(j, "deg");
    } else {
        throw ProtocolError("unknown input kind '" + kind + "'");
    }
    return p;
}

json ball_to_json(const std::optional<CollabBall>& b) {
    if (!b) return nullptr;
    return json{{"x", b->x}, {"r", b->radius}, {"active", b->active}};
}

std::optional<CollabBall> ball_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    CollabBall b;
    b.x = num(j, "x");
    b.radius = num(j, "r");
    const auto& a = field(j, "active");
    if (!a.is_boolean()) throw ProtocolError("ball 'active' must be boolean");
    b.active = a.get<bool>();
    return b;
}

json body_to_json(const Body& body) {
    return std::visit(
        overloaded{
            [](const ClientHello& m) {
                return json{{"dyad_id", m.dyad_id},
                            {"role", to_string(m.role)},
                            {"device", to_string(m.device)},
                            {"protocol_version", m.protocol_version}};
            },
            [](const HelloAck& m) {
                return json{{"config", m.config}, {"plan", m.plan}, {"protocol_version", m.protocol_version}};
            },
            [](const Input& m) { return json{{"client_tick", m.client_tick}, {"payload", payload_to_json(m.payload)}}; },
            [](const StateUpdate& m) {
                json avatars = json::array();
                for (const auto& a : m.avatars) avatars.push_back({{"role", to_string(a.role)}, {"x", a.x}, {"z", a.z}});
                json balloons = json::array();
                for (const auto& b : m.balloons)
                    balloons.push_back({{"lane", b.lane}, {"index", b.index}, {"x", b.x}, {"z", b.z}});
                return json{{"server_tick", m.server_tick}, {"avatars", avatars},         {"ball", ball_to_json(m.ball)},
                            {"balloons", balloons},          {"scores", m.scores},         {"score", m.score},
                            {"time_remaining", m.time_remaining}};
            },
            [](const TrialControl& m) {
                json j{{"action", m.action == TrialControl::Action::Start ? "start" : "end"}, {"trial", m.trial}};
                if (m.action == TrialControl::Action::End) {
                    j["complete"] = m.complete;
                    j["final_scores"] = m.final_scores;
                }
                return j;
            },
            [](const SurveyPrompt& m) {
                return json{{"position", m.position},
                            {"instrument", to_string(m.instrument)},
                            {"scale", {m.scale_min, m.scale_max}},
                            {"items", m.items}};
            },
            [](const SurveyAnswer& m) {
                return json{{"instrument", to_string(m.instrument)}, {"item_scores", m.item_scores}};
            },
            [](const Error& m) { return json{{"code", m.code}, {"message", m.message}}; },
        },
        body);
}

Body body_from_json(const std::string& type, const json& j) {
    if (type == "ClientHello") {
        ClientHello m;
        m.dyad_id = str(j, "dyad_id");
        if (m.dyad_id.empty()) throw ProtocolError("dyad_id must not be empty");
        m.role = convert([&] { return role_from_string(str(j, "role")); });
        m.device = convert([&] { return device_from_string(str(j, "device")); });
        m.protocol_version = static_cast<int>(integer(j, "protocol_version"));
        return m;
    }
    if (type == "HelloAck") {
        HelloAck m;
        m.config = field(j, "config");
        m.plan = field(j, "plan");
        m.protocol_version = static_cast<int>(integer(j, "protocol_version"));
        return m;
    }
    if (type == "Input") {
        Input m;
        m.client_tick = static_cast<int>(integer(j, "client_tick"));
        if (m.client_tick < 0) throw ProtocolError("client_tick must be non-negative");
        m.payload = payload_from_json(field(j, "payload"));
        return m;
    }
    if (type == "StateUpdate") {
        StateUpdate m;
        m.server_tick = static_cast<int>(integer(j, "server_tick"));
        for (const auto& a : field(j, "avatars"))
            m.avatars.push_back({convert([&] { return role_from_string(str(a, "role")); }), num(a, "x"), num(a, "z")});
        m.ball = ball_from_json(field(j, "ball"));
        for (const auto& b : field(j, "balloons"))
            m.balloons.push_back({static_cast<int>(integer(b, "lane")), static_cast<int>(integer(b, "index")),
                                  num(b, "x"), num(b, "z")});
        m.scores = int_list(j, "scores");
        m.score = static_cast<int>(integer(j, "score"));
        m.time_remaining = num(j, "time_remaining");
        return m;
    }
    if (type == "TrialControl") {
        TrialControl m;
        const auto action = str(j, "action");
        if (action == "start") {
            m.action = TrialControl::Action::Start;
        } else if (action == "end") {
            m.action = TrialControl::Action::End;
            const auto& c = field(j, "complete");
            if (!c.is_boolean()) throw ProtocolError("'complete' must be boolean");
            m.complete = c.get<bool>();
            m.final_scores = int_list(j, "final_scores");
        } else {
            throw ProtocolError("TrialControl action must be start or end");
        }
        m.trial = field(j, "trial");
        return m;
    }
    if (type == "SurveyPrompt") {
        SurveyPrompt m;
        m.position = str(j, "position");
        m.instrument = convert([&] { return instrument_from_string(str(j, "instrument")); });
        const auto scale = int_list(j, "scale");
        if (scale.size() != 2) throw ProtocolError("scale must be [min, max]");
        m.scale_min = scale[0];
        m.scale_max = scale[1];
        for (const auto& item : field(j, "items")) {
            if (!item.is_string()) throw ProtocolError("survey items must be strings");
            m.items.push_back(item.get<std::string>());
        }
        return m;
    }
    if (type == "SurveyAnswer") {
        SurveyAnswer m;
        m.instrument = convert([&] { return instrument_from_string(str(j, "instrument")); });
        m.item_scores = int_list(j, "item_scores");
        return m;
    }
    if (type == "Error") return Error{str(j, "code"), str(j, "message")};
    throw ProtocolError("unknown message type '" + type + "'");
}

}  // namespace

std::string_view type_name(const Body& body) {
    static constexpr std::string_view names[] = {"ClientHello",  "HelloAck",     "Input",        "StateUpdate",
                                                 "TrialControl", "SurveyPrompt", "SurveyAnswer", "Error"};
    return names[body.index()];
}

json to_json(const Message& m) {
    json j = body_to_json(m.body);
    j["type"] = type_name(m.body);
    j["seq"] = m.seq;
    return j;
}

std::string encode(const Message& m) { return to_json(m).dump(); }

Message decode(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("message must be a JSON object");
    const auto& seq = field(j, "seq");
    if (!seq.is_number_unsigned() || seq.get<std::uint64_t>() == 0)
        throw ProtocolError("seq must be a positive integer");
    Message m;
    m.seq = seq.get<std::uint64_t>();
    try {
        m.body = body_from_json(str(j, "type"), j);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed message: ") + e.what());
    }
    return m;
}

void SeqChecker::accept(std::uint64_t seq) {
    if (seq <= last_)
        throw ProtocolError("sequence number " + std::to_string(seq) + " not above " + std::to_string(last_));
    last_ = seq;
}

HelloAck make_hello_ack(const SessionPlan& plan, const GameConfig& config) {
    json blocks = json::array();
    for (const auto& b : plan.blocks)
        blocks.push_back({{"number", b.number},
                          {"mode", to_string(b.mode)},
                          {"pcg_device", to_string(b.pcg_device)},
                          {"trials", b.trials.size()}});
    json checkpoints = json::array();
    for (const auto& c : plan.checkpoints) checkpoints.push_back(c.position());
    HelloAck ack;
    ack.config = config_to_json(config);
    ack.plan = {{"dyad_id", plan.dyad_id},
                {"first_device", to_string(plan.first_device)},
                {"second_device", to_string(plan.second_device)},
                {"blocks", blocks},
                {"checkpoints", checkpoints}};
    return ack;
}

StateUpdate make_state_update(const TrialState& state, const GameConfig& config, double horizon) {
    StateUpdate u;
    u.server_tick = state.tick;
    double rear = 0.0;
    for (std::size_t i = 0; i < state.avatars.size(); ++i) {
        const auto& a = state.avatars[i];
        u.avatars.push_back({a.role, a.x, a.z});
        rear = i == 0 ? a.z : std::min(rear, a.z);
    }
    u.ball = state.ball;
    for (std::size_t l = 0; l < state.lanes.size(); ++l) {
        const auto& balloons = state.lanes[l].field.balloons;
        for (std::size_t k = 0; k < balloons.size(); ++k) {
            const auto& b = balloons[k];
            if (b.collected || b.z < rear || b.z > rear + horizon) continue;
            u.balloons.push_back({static_cast<int>(l), static_cast<int>(k), b.x, b.z});
        }
        u.scores.push_back(state.lanes[l].score);
    }
    u.score = state.total_score();
    u.time_remaining = std::max(0.0, config.trial_duration - state.tick * config.dt());
    return u;
}

SurveyPrompt make_survey_prompt(const std::string& position, const InstrumentDefinition& def) {
    SurveyPrompt p;
    p.position = position;
    p.instrument = def.instrument;
    p.scale_min = def.scale_min;
    p.scale_max = def.scale_max;
    for (const auto& item : def.items) p.items.push_back(item.text);
    return p;
}

}  // namespace dyad::wire
