#include "dyad/agents.hpp"

#include <cmath>

#include "dyad/metrics.hpp"
#include "dyad/record_io.hpp"

namespace dyad {

AgentSpec parse_agent(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    auto number = [&](const char* what) {
        try {
            std::size_t used = 0;
            const double v = std::stod(arg, &used);
            if (used != arg.size() || v < 0.0) throw std::invalid_argument(what);
            return v;
        } catch (const std::exception&) {
            throw InputError(std::string("agent ") + name + " needs a non-negative " + what);
        }
    };
    AgentSpec s;
    if (name == "perfect") {
        s.kind = AgentKind::Perfect;
    } else if (name == "lagged") {
        s.kind = AgentKind::Lagged;
        s.lag = arg.empty() ? 0.5 : number("lag");
    } else if (name == "bangbang") {
        s.kind = AgentKind::Bangbang;
        s.error_sd = arg.empty() ? 0.1 : number("error_sd");
    } else if (name == "idle") {
        s.kind = AgentKind::Idle;
    } else if (name == "replay") {
        s.kind = AgentKind::Replay;
        if (arg.empty()) throw InputError("replay agent needs a path");
        s.replay_path = arg;
    } else {
        throw InputError("unknown agent: " + text);
    }
    return s;
}

std::string describe(const AgentSpec& spec) {
    switch (spec.kind) {
        case AgentKind::Perfect: return "perfect";
        case AgentKind::Lagged: return "lagged:" + std::to_string(spec.lag);
        case AgentKind::Bangbang: return "bangbang:" + std::to_string(spec.error_sd);
        case AgentKind::Idle: return "idle";
        case AgentKind::Replay: return "replay:" + spec.replay_path.string();
    }
    return "?";
}

TrackingAgent::TrackingAgent(AgentSpec spec, double forward_speed, std::uint64_t seed)
    : spec_(std::move(spec)), forward_speed_(forward_speed), rng_(seed) {
    if (spec_.lag < 0.0 || spec_.error_sd < 0.0 || spec_.hysteresis < 0.0)
        throw ConfigError("agent lag, error_sd and hysteresis must be non-negative");
}

std::optional<int> TrackingAgent::next(const Observation& obs) {
    if (!obs.field) throw InputError("tracking agent needs a balloon field");
    const double z = obs.z - spec_.lag * forward_speed_;
    double target = obs.field->target_x(z);
    if (spec_.kind == AgentKind::Bangbang && spec_.error_sd > 0.0) target += spec_.error_sd * rng_.normal();
    const double err = target - obs.x;
    if (std::abs(err) <= spec_.hysteresis) return 0;
    return err > 0.0 ? 1 : -1;
}

std::optional<int> ReplayAgent::next(const Observation&) {
    if (pos_ >= commands_.size()) return std::nullopt;
    return commands_[pos_++];
}

int ReplayAgent::command() {
    if (pos_ >= commands_.size()) throw ReplayExhausted("replay log exhausted");
    return commands_[pos_++];
}

std::vector<int> logged_commands(const TrialRecord& record, int avatar) {
    std::vector<int> out;
    out.reserve(record.rows.size());
    for (const auto& row : record.rows) out.push_back(row.commands.at(static_cast<std::size_t>(avatar)));
    return out;
}

TrialRecord replay_trial(const TrialRecord& logged, const GameConfig& config) {
    std::vector<ReplayAgent> agents;
    for (std::size_t i = 0; i < logged.meta.roles.size(); ++i)
        agents.emplace_back(logged_commands(logged, static_cast<int>(i)));
    std::vector<CommandSource*> sources;
    for (auto& a : agents) sources.push_back(&a);
    auto rec = run_trial(logged.meta, sources, config);
    if (rec.complete) fill_area_errors(rec);
    return rec;
}

std::unique_ptr<CommandSource> make_agent(const AgentSpec& spec, const GameConfig& config, std::uint64_t seed,
                                          int avatar) {
    switch (spec.kind) {
        case AgentKind::Perfect:
        case AgentKind::Lagged:
        case AgentKind::Bangbang: return std::make_unique<TrackingAgent>(spec, config.forward_speed, seed);
        case AgentKind::Idle: return std::make_unique<IdleAgent>();
        case AgentKind::Replay: return std::make_unique<ReplayAgent>(logged_commands(load_trial(spec.replay_path), avatar));
    }
    throw ConfigError("unknown agent kind");
}

int agent_command(CommandSource& agent, const Observation& obs) {
    auto cmd = agent.next(obs);
    if (!cmd) throw ReplayExhausted("command source exhausted");
    return *cmd;
}

SourceFactory agent_factory(AgentSpec pps, AgentSpec pcg, const GameConfig& config) {
    return [pps, pcg, config](const TrialPlan& plan, Role role) -> std::unique_ptr<CommandSource> {
        AgentSpec spec = role == Role::PPS ? pps : pcg;
        const int avatar = role == Role::PPS ? 0 : 1;
        if (spec.kind == AgentKind::Replay && std::filesystem::is_directory(spec.replay_path))
            spec.replay_path = spec.replay_path / ("block" + std::to_string(plan.block)) /
                               ("trial" + std::to_string(plan.index) + ".jsonl");
        return make_agent(spec, config, derive_seed(plan.seed, 0xA0 + static_cast<std::uint64_t>(avatar)), avatar);
    };
}

}  // namespace dyad
