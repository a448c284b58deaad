#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dyad/config.hpp"
#include "dyad/game.hpp"
#include "dyad/survey.hpp"

namespace dyad {

// ---------------------------------------------------------------------------
// Plan

struct TrialPlan {
    int block = 1;   // 1-based
    int index = 1;   // 1-based within the block
    Mode mode = Mode::Solo;
    Device pcg_device = Device::Keyboard;
    double pps_amplitude = 0.5;
    double pcg_amplitude = 0.75;
    std::uint64_t seed = 0;
    bool practice = true;

    friend bool operator==(const TrialPlan&, const TrialPlan&) = default;
};

struct BlockPlan {
    int number = 1;
    Mode mode = Mode::Solo;
    Device pcg_device = Device::Keyboard;
    std::vector<TrialPlan> trials;

    friend bool operator==(const BlockPlan&, const BlockPlan&) = default;
};

struct CheckpointSpec {
    enum class Kind { SessionStart, BeforeBlock, AfterBlock, SessionEnd };
    Kind kind = Kind::SessionStart;
    int block = 0;  // for Before/AfterBlock
    std::vector<Instrument> instruments;

    /// "session_start", "before_block2", "after_block2", "session_end"
    std::string position() const;

    friend bool operator==(const CheckpointSpec&, const CheckpointSpec&) = default;
};

struct SessionPlan {
    std::string dyad_id;
    std::uint64_t master_seed = 0;
    Device first_device = Device::Pedal;
    Device second_device = Device::Keyboard;
    std::vector<BlockPlan> blocks;
    std::vector<CheckpointSpec> checkpoints;

    friend bool operator==(const SessionPlan&, const SessionPlan&) = default;
};

/// Four blocks [Solo, Collaborative, Solo, Collaborative]; the PCG device switches after block 2.
/// Each block holds four practice trials then four performance trials, each half using every
/// amplitude of each role exactly once in a seeded order. When `first_device` is not given it is
/// drawn from `master_seed`.
SessionPlan build_plan(const std::string& dyad_id, std::optional<Device> first_device, std::uint64_t master_seed);

/// Throws ProtocolError describing the first violated plan invariant.
void validate_plan(const SessionPlan& plan);

// ---------------------------------------------------------------------------
// Trial execution

/// Static description of one trial: what is played and with which seeds.
struct TrialMeta {
    int block = 0;
    int index = 0;
    bool practice = false;
    Mode mode = Mode::Solo;
    Device pcg_device = Device::Keyboard;
    std::vector<Role> roles;          // one per avatar
    std::vector<double> amplitudes;   // one per lane
    std::vector<double> phases;       // one per lane
    double frequency = 0.08;          // cycles/m
    std::uint64_t seed = 0;

    friend bool operator==(const TrialMeta&, const TrialMeta&) = default;
};

/// Two-player meta for a planned trial: avatars [PPS, PCG]. Collaborative trials share the
/// PPS amplitude's field; Solo trials give each player a field from their own amplitude.
TrialMeta trial_meta(const TrialPlan& plan, const GameConfig& config);

/// Single- or two-avatar meta with phases drawn from `seed`.
TrialMeta make_trial_meta(Mode mode, std::vector<Role> roles, std::vector<double> amplitudes,
                          std::uint64_t seed, const GameConfig& config);

std::vector<BalloonField> fields_for(const TrialMeta& meta, const GameConfig& config);

struct TickRow {
    int tick = 0;
    double t = 0.0;
    std::vector<int> commands;
    std::vector<AvatarState> avatars;
    std::optional<CollabBall> ball;
    std::vector<CollectionEvent> events;
    std::vector<int> scores;  // per lane, after this tick

    friend bool operator==(const TickRow&, const TickRow&) = default;
};

struct TrialRecord {
    TrialMeta meta;
    std::vector<AvatarState> initial_avatars;
    std::optional<CollabBall> initial_ball;
    std::vector<TickRow> rows;
    std::vector<int> final_scores;  // per lane
    bool complete = false;
    std::vector<double> area_errors;  // per lane; empty until filled by metrics

    int lane_count() const { return static_cast<int>(meta.amplitudes.size()); }
    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// What a command source may look at: its own avatar and the balloons on its lane.
struct Observation {
    int tick = 0;
    int avatar = 0;
    Role role = Role::PCG;
    double x = 0.0;
    double z = 0.0;
    const BalloonField* field = nullptr;
};

/// Supplies one direction in {-1, 0, +1} per tick; nullopt means the source has ended.
class CommandSource {
public:
    virtual ~CommandSource() = default;
    virtual std::optional<int> next(const Observation& obs) = 0;
};

/// Steps one trial with externally supplied commands and accumulates its record.
class TrialRunner {
public:
    TrialRunner(TrialMeta meta, const GameConfig& config);

    const TrialState& state() const { return state_; }
    const TrialRecord& record() const { return record_; }
    const GameConfig& config() const { return config_; }
    bool done() const { return state_.tick >= config_.ticks_per_trial(); }
    Observation observe(int avatar) const;

    void step(std::span<const int> directions);
    /// Completes the record; `aborted` marks it incomplete.
    TrialRecord finish(bool aborted = false);

private:
    GameConfig config_;
    TrialState state_;
    TrialRecord record_;
};

/// Runs a full trial pulling one command per avatar per tick. A source that ends early aborts
/// the trial and the record comes back incomplete.
TrialRecord run_trial(const TrialMeta& meta, std::span<CommandSource* const> sources, const GameConfig& config);

/// Records 5-8 of a block. Throws ProtocolError for fewer than eight records.
std::vector<TrialRecord> performance_window(std::span<const TrialRecord> block);

// ---------------------------------------------------------------------------
// Headless session

struct SurveyRecord {
    std::string participant;
    std::string position;
    Instrument instrument = Instrument::IMI;
    std::vector<int> item_scores;

    friend bool operator==(const SurveyRecord&, const SurveyRecord&) = default;
};

std::string participant_id(const std::string& dyad_id, Role role);

using SourceFactory = std::function<std::unique_ptr<CommandSource>(const TrialPlan&, Role)>;
using SurveyAnswerer = std::function<std::vector<int>(const CheckpointSpec&, Role, const InstrumentDefinition&)>;

struct SessionResult {
    std::vector<std::vector<TrialRecord>> blocks;
    std::vector<SurveyRecord> surveys;
};

/// Runs every checkpoint and trial of the plan in order. With an output directory, each finished
/// trial and survey is written immediately and anything already complete on disk is loaded instead
/// of being rerun. `only_blocks` restricts the run to the listed block numbers (their trials and
/// before/after checkpoints); session start and end checkpoints always run.
SessionResult run_session(const SessionPlan& plan, const SourceFactory& sources, const SurveyAnswerer& answer,
                          const GameConfig& config, const std::optional<std::filesystem::path>& out_dir,
                          const InstrumentSet& instruments = default_instruments(),
                          const std::optional<std::set<int>>& only_blocks = std::nullopt);

/// Seeded uniform answers; used for synthetic sessions.
SurveyAnswerer random_answerer(std::uint64_t seed);

}  // namespace dyad
