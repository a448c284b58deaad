#include "dyad/record_io.hpp"

#include <fstream>
#include <sstream>

namespace dyad {

using nlohmann::json;

namespace {

json avatar_to_json(const AvatarState& a) { return {{"x", a.x}, {"z", a.z}, {"v", a.lateral_velocity}}; }

AvatarState avatar_from_json(const json& j, Role role) {
    return {role, j.at("x").get<double>(), j.at("z").get<double>(), j.at("v").get<double>()};
}

json ball_to_json(const std::optional<CollabBall>& b) {
    if (!b) return nullptr;
    return {{"x", b->x}, {"r", b->radius}, {"active", b->active}};
}

std::optional<CollabBall> ball_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return CollabBall{j.at("x").get<double>(), j.at("r").get<double>(), j.at("active").get<bool>()};
}

std::vector<AvatarState> avatars_from_json(const json& arr, const std::vector<Role>& roles) {
    if (arr.size() != roles.size()) throw InputError("avatar count does not match trial roles");
    std::vector<AvatarState> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(avatar_from_json(arr[i], roles[i]));
    return out;
}

}  // namespace

json config_to_json(const GameConfig& c) {
    return {{"forward_speed", c.forward_speed},
            {"pcg_lateral_speed", c.pcg_lateral_speed},
            {"trial_duration", c.trial_duration},
            {"tick_rate", c.tick_rate},
            {"track_width", c.track_width},
            {"sinusoid_frequency", c.sinusoid_frequency},
            {"balloon_spacing", c.balloon_spacing},
            {"collection_radius_solo", c.collection_radius_solo},
            {"ball_radius_max", c.ball_radius_max},
            {"balloon_visual_radius", c.balloon_visual_radius},
            {"deadzone", c.deadzone},
            {"noise_window", c.noise_window},
            {"noise_speed_min", c.noise_speed_min},
            {"noise_speed_max", c.noise_speed_max},
            {"rng_seed", c.rng_seed}};
}

GameConfig config_from_json(const json& j) {
    GameConfig c;
    try {
        c.forward_speed = j.value("forward_speed", c.forward_speed);
        c.pcg_lateral_speed = j.value("pcg_lateral_speed", c.pcg_lateral_speed);
        c.trial_duration = j.value("trial_duration", c.trial_duration);
        c.tick_rate = j.value("tick_rate", c.tick_rate);
        c.track_width = j.value("track_width", c.track_width);
        c.sinusoid_frequency = j.value("sinusoid_frequency", c.sinusoid_frequency);
        c.balloon_spacing = j.value("balloon_spacing", c.balloon_spacing);
        c.collection_radius_solo = j.value("collection_radius_solo", c.collection_radius_solo);
        c.ball_radius_max = j.value("ball_radius_max", c.ball_radius_max);
        c.balloon_visual_radius = j.value("balloon_visual_radius", c.balloon_visual_radius);
        c.deadzone = j.value("deadzone", c.deadzone);
        c.noise_window = j.value("noise_window", c.noise_window);
        c.noise_speed_min = j.value("noise_speed_min", c.noise_speed_min);
        c.noise_speed_max = j.value("noise_speed_max", c.noise_speed_max);
        c.rng_seed = j.value("rng_seed", c.rng_seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    c.validate();
    return c;
}

GameConfig load_config(const std::filesystem::path& path) {
    try {
        return config_from_json(json::parse(read_text(path)));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("bad config file: ") + e.what());
    }
}

json plan_to_json(const SessionPlan& plan) {
    json blocks = json::array();
    for (const auto& b : plan.blocks) {
        json trials = json::array();
        for (const auto& t : b.trials) {
            trials.push_back({{"index", t.index},
                              {"pps_amplitude", t.pps_amplitude},
                              {"pcg_amplitude", t.pcg_amplitude},
                              {"seed", t.seed},
                              {"practice", t.practice}});
        }
        blocks.push_back({{"number", b.number},
                          {"mode", to_string(b.mode)},
                          {"pcg_device", to_string(b.pcg_device)},
                          {"trials", trials}});
    }
    json cps = json::array();
    for (const auto& c : plan.checkpoints) {
        json inst = json::array();
        for (auto i : c.instruments) inst.push_back(to_string(i));
        cps.push_back({{"position", c.position()}, {"instruments", inst}});
    }
    return {{"dyad_id", plan.dyad_id},
            {"master_seed", plan.master_seed},
            {"device_order", {to_string(plan.first_device), to_string(plan.second_device)}},
            {"blocks", blocks},
            {"checkpoints", cps}};
}

SessionPlan plan_from_json(const json& j) {
    SessionPlan plan;
    try {
        plan.dyad_id = j.at("dyad_id").get<std::string>();
        plan.master_seed = j.at("master_seed").get<std::uint64_t>();
        plan.first_device = device_from_string(j.at("device_order").at(0).get<std::string>());
        plan.second_device = device_from_string(j.at("device_order").at(1).get<std::string>());
        for (const auto& bj : j.at("blocks")) {
            BlockPlan b;
            b.number = bj.at("number").get<int>();
            b.mode = mode_from_string(bj.at("mode").get<std::string>());
            b.pcg_device = device_from_string(bj.at("pcg_device").get<std::string>());
            for (const auto& tj : bj.at("trials")) {
                TrialPlan t;
                t.block = b.number;
                t.index = tj.at("index").get<int>();
                t.mode = b.mode;
                t.pcg_device = b.pcg_device;
                t.pps_amplitude = tj.at("pps_amplitude").get<double>();
                t.pcg_amplitude = tj.at("pcg_amplitude").get<double>();
                t.seed = tj.at("seed").get<std::uint64_t>();
                t.practice = tj.at("practice").get<bool>();
                b.trials.push_back(t);
            }
            plan.blocks.push_back(std::move(b));
        }
        using K = CheckpointSpec::Kind;
        for (const auto& cj : j.at("checkpoints")) {
            CheckpointSpec c;
            const auto pos = cj.at("position").get<std::string>();
            if (pos == "session_start") c.kind = K::SessionStart;
            else if (pos == "session_end") c.kind = K::SessionEnd;
            else if (pos.starts_with("before_block")) {
                c.kind = K::BeforeBlock;
                c.block = std::stoi(pos.substr(12));
            } else if (pos.starts_with("after_block")) {
                c.kind = K::AfterBlock;
                c.block = std::stoi(pos.substr(11));
            } else {
                throw InputError("unknown checkpoint position " + pos);
            }
            for (const auto& i : cj.at("instruments")) c.instruments.push_back(instrument_from_string(i.get<std::string>()));
            plan.checkpoints.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("bad plan: ") + e.what());
    }
    return plan;
}

SessionPlan load_plan(const std::filesystem::path& path) {
    try {
        return plan_from_json(json::parse(read_text(path)));
    } catch (const json::parse_error& e) {
        throw InputError(std::string("bad plan file: ") + e.what());
    }
}

json meta_to_json(const TrialMeta& m) {
    json roles = json::array();
    for (auto r : m.roles) roles.push_back(to_string(r));
    return {{"block", m.block},
            {"index", m.index},
            {"practice", m.practice},
            {"mode", to_string(m.mode)},
            {"pcg_device", to_string(m.pcg_device)},
            {"roles", roles},
            {"amplitudes", m.amplitudes},
            {"phases", m.phases},
            {"frequency", m.frequency},
            {"seed", m.seed}};
}

TrialMeta meta_from_json(const json& j) {
    TrialMeta m;
    m.block = j.at("block").get<int>();
    m.index = j.at("index").get<int>();
    m.practice = j.at("practice").get<bool>();
    m.mode = mode_from_string(j.at("mode").get<std::string>());
    m.pcg_device = device_from_string(j.at("pcg_device").get<std::string>());
    for (const auto& r : j.at("roles")) m.roles.push_back(role_from_string(r.get<std::string>()));
    m.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    m.phases = j.at("phases").get<std::vector<double>>();
    m.frequency = j.at("frequency").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
}

std::string trial_to_jsonl(const TrialRecord& r) {
    std::string out;
    json header = meta_to_json(r.meta);
    header["kind"] = "trial";
    json init = json::array();
    for (const auto& a : r.initial_avatars) init.push_back(avatar_to_json(a));
    header["initial_avatars"] = init;
    header["initial_ball"] = ball_to_json(r.initial_ball);
    out += header.dump();
    out += '\n';
    for (const auto& row : r.rows) {
        json avatars = json::array();
        for (const auto& a : row.avatars) avatars.push_back(avatar_to_json(a));
        json events = json::array();
        for (const auto& e : row.events)
            events.push_back({{"lane", e.lane}, {"balloon", e.balloon}, {"z", e.z}, {"x", e.x_at_crossing}});
        json line = {{"kind", "tick"},      {"tick", row.tick},   {"t", row.t},
                     {"cmd", row.commands}, {"avatars", avatars}, {"ball", ball_to_json(row.ball)},
                     {"events", events},    {"scores", row.scores}};
        out += line.dump();
        out += '\n';
    }
    json result = {{"kind", "result"},
                   {"complete", r.complete},
                   {"final_scores", r.final_scores},
                   {"area_errors", r.area_errors}};
    out += result.dump();
    out += '\n';
    return out;
}

TrialRecord trial_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    TrialRecord r;
    bool have_header = false;
    bool have_result = false;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "trial") {
                r.meta = meta_from_json(j);
                r.initial_avatars = avatars_from_json(j.at("initial_avatars"), r.meta.roles);
                r.initial_ball = ball_from_json(j.at("initial_ball"));
                have_header = true;
            } else if (kind == "tick") {
                if (!have_header) throw InputError("tick row before trial header");
                TickRow row;
                row.tick = j.at("tick").get<int>();
                row.t = j.at("t").get<double>();
                row.commands = j.at("cmd").get<std::vector<int>>();
                row.avatars = avatars_from_json(j.at("avatars"), r.meta.roles);
                row.ball = ball_from_json(j.at("ball"));
                for (const auto& e : j.at("events"))
                    row.events.push_back({e.at("lane").get<int>(), e.at("balloon").get<int>(), e.at("z").get<double>(),
                                          e.at("x").get<double>()});
                row.scores = j.at("scores").get<std::vector<int>>();
                r.rows.push_back(std::move(row));
            } else if (kind == "result") {
                r.complete = j.at("complete").get<bool>();
                r.final_scores = j.at("final_scores").get<std::vector<int>>();
                r.area_errors = j.at("area_errors").get<std::vector<double>>();
                have_result = true;
            } else {
                throw InputError("unknown trial log line kind: " + kind);
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("bad trial log: ") + e.what());
    }
    if (!have_header) throw InputError("trial log has no header");
    if (!have_result) r.complete = false;  // truncated log
    return r;
}

TrialRecord load_trial(const std::filesystem::path& path) { return trial_from_jsonl(read_text(path)); }

json survey_to_json(const SurveyRecord& s) {
    return {{"participant", s.participant},
            {"position", s.position},
            {"instrument", to_string(s.instrument)},
            {"item_scores", s.item_scores}};
}

SurveyRecord survey_from_json(const json& j) {
    try {
        return {j.at("participant").get<std::string>(), j.at("position").get<std::string>(),
                instrument_from_string(j.at("instrument").get<std::string>()),
                j.at("item_scores").get<std::vector<int>>()};
    } catch (const json::exception& e) {
        throw InputError(std::string("bad survey record: ") + e.what());
    }
}

std::filesystem::path dyad_dir(const std::filesystem::path& out, const std::string& dyad_id) { return out / dyad_id; }

std::filesystem::path trial_path(const std::filesystem::path& out, const std::string& dyad_id, int block, int index) {
    return dyad_dir(out, dyad_id) / ("block" + std::to_string(block)) / ("trial" + std::to_string(index) + ".jsonl");
}

std::filesystem::path survey_path(const std::filesystem::path& out, const std::string& dyad_id, const SurveyRecord& s) {
    return dyad_dir(out, dyad_id) / "surveys" /
           (s.position + "_" + s.participant + "_" + std::string(to_string(s.instrument)) + ".json");
}

std::filesystem::path plan_path(const std::filesystem::path& out, const std::string& dyad_id) {
    return dyad_dir(out, dyad_id) / "plan.json";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace dyad
