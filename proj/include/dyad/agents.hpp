#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dyad/session.hpp"

namespace dyad {

enum class AgentKind { Perfect, Lagged, Bangbang, Idle, Replay };

struct AgentSpec {
    AgentKind kind = AgentKind::Perfect;
    double lag = 0.0;          // s, Lagged
    double error_sd = 0.0;     // m, Bangbang target jitter
    double hysteresis = 0.05;  // m
    std::filesystem::path replay_path;  // Replay: trial log to read commands from
};

/// Parses "perfect", "lagged:0.5", "bangbang:0.2", "idle", "replay:<path>".
AgentSpec parse_agent(const std::string& text);
std::string describe(const AgentSpec& spec);

/// Thrown when a replay source has no more commands.
struct ReplayExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bang-bang pursuit of the target path at the avatar's depth (or `lag` seconds behind it),
/// holding still inside the hysteresis band.
class TrackingAgent final : public CommandSource {
public:
    TrackingAgent(AgentSpec spec, double forward_speed, std::uint64_t seed);
    std::optional<int> next(const Observation& obs) override;

private:
    AgentSpec spec_;
    double forward_speed_;
    Rng rng_;
};

class IdleAgent final : public CommandSource {
public:
    std::optional<int> next(const Observation&) override { return 0; }
};

/// Plays back a fixed command sequence. `next` returns nullopt once it runs out, which aborts the
/// trial; `command()` throws ReplayExhausted instead.
class ReplayAgent final : public CommandSource {
public:
    explicit ReplayAgent(std::vector<int> commands) : commands_(std::move(commands)) {}
    std::optional<int> next(const Observation& obs) override;
    int command();
    std::size_t remaining() const { return commands_.size() - pos_; }

private:
    std::vector<int> commands_;
    std::size_t pos_ = 0;
};

/// Commands of one avatar from a recorded trial.
std::vector<int> logged_commands(const TrialRecord& record, int avatar);

/// Reruns a logged trial headlessly from its own commands. Area errors are filled for complete runs.
TrialRecord replay_trial(const TrialRecord& logged, const GameConfig& config);

/// Builds the source for `spec`. Replay agents read avatar `avatar` from spec.replay_path.
std::unique_ptr<CommandSource> make_agent(const AgentSpec& spec, const GameConfig& config, std::uint64_t seed,
                                          int avatar = 0);

/// One command per tick for a single agent given what it observes.
int agent_command(CommandSource& agent, const Observation& obs);

/// Session source factory: the PPS and PCG each get their own agent with a seed derived from
/// the trial seed. Replay specs with a directory path read <dir>/block<k>/trial<j>.jsonl.
SourceFactory agent_factory(AgentSpec pps, AgentSpec pcg, const GameConfig& config);

}  // namespace dyad
