#include "dyad/session.hpp"

#include <algorithm>
#include <array>
#include <numbers>

#include "dyad/metrics.hpp"
#include "dyad/record_io.hpp"

namespace dyad {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::array<Mode, 4> kBlockModes{Mode::Solo, Mode::Collaborative, Mode::Solo, Mode::Collaborative};
constexpr int kTrialsPerBlock = 8;
constexpr int kPracticeTrials = 4;

}  // namespace

std::string CheckpointSpec::position() const {
    switch (kind) {
        case Kind::SessionStart: return "session_start";
        case Kind::BeforeBlock: return "before_block" + std::to_string(block);
        case Kind::AfterBlock: return "after_block" + std::to_string(block);
        case Kind::SessionEnd: return "session_end";
    }
    return "?";
}

SessionPlan build_plan(const std::string& dyad_id, std::optional<Device> first_device, std::uint64_t master_seed) {
    const std::uint64_t base = derive_seed(master_seed, fnv1a(dyad_id));
    SessionPlan plan;
    plan.dyad_id = dyad_id;
    plan.master_seed = master_seed;
    if (first_device) {
        if (*first_device == Device::Joystick) throw ConfigError("PCG device must be pedal or keyboard");
        plan.first_device = *first_device;
    } else {
        Rng coin(derive_seed(base, 0xD0));
        plan.first_device = coin.below(2) == 0 ? Device::Pedal : Device::Keyboard;
    }
    plan.second_device = plan.first_device == Device::Pedal ? Device::Keyboard : Device::Pedal;

    for (int b = 1; b <= 4; ++b) {
        BlockPlan block;
        block.number = b;
        block.mode = kBlockModes[static_cast<std::size_t>(b - 1)];
        block.pcg_device = b <= 2 ? plan.first_device : plan.second_device;
        const std::uint64_t block_seed = derive_seed(base, static_cast<std::uint64_t>(b));
        Rng rng(block_seed);
        for (int half = 0; half < 2; ++half) {
            auto pps = amplitude_set(Role::PPS);
            auto pcg = amplitude_set(Role::PCG);
            rng.shuffle(std::span<double>(pps));
            rng.shuffle(std::span<double>(pcg));
            for (int j = 0; j < kPracticeTrials; ++j) {
                TrialPlan t;
                t.block = b;
                t.index = half * kPracticeTrials + j + 1;
                t.mode = block.mode;
                t.pcg_device = block.pcg_device;
                t.pps_amplitude = pps[static_cast<std::size_t>(j)];
                t.pcg_amplitude = pcg[static_cast<std::size_t>(j)];
                t.seed = derive_seed(block_seed, 0x7000 + static_cast<std::uint64_t>(t.index));
                t.practice = half == 0;
                block.trials.push_back(t);
            }
        }
        plan.blocks.push_back(std::move(block));
    }

    using K = CheckpointSpec::Kind;
    plan.checkpoints.push_back({K::SessionStart, 0, {Instrument::IOS}});
    for (int b = 1; b <= 4; ++b) {
        plan.checkpoints.push_back({K::BeforeBlock, b, {Instrument::IMI, Instrument::PANAS}});
        plan.checkpoints.push_back({K::AfterBlock, b, {Instrument::IMI, Instrument::PANAS}});
    }
    plan.checkpoints.push_back({K::SessionEnd, 0, {Instrument::IOS, Instrument::Preference}});
    return plan;
}

void validate_plan(const SessionPlan& plan) {
    auto fail = [](const std::string& why) { throw ProtocolError("plan invalid: " + why); };
    if (plan.blocks.size() != 4) fail("expected 4 blocks");
    if (plan.first_device == Device::Joystick || plan.second_device == Device::Joystick ||
        plan.first_device == plan.second_device)
        fail("device order must be one of pedal/keyboard each");
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& block = plan.blocks[i];
        if (block.number != static_cast<int>(i) + 1) fail("block numbering");
        if (block.mode != kBlockModes[i]) fail("mode sequence must be solo, collaborative, solo, collaborative");
        const Device expect = i < 2 ? plan.first_device : plan.second_device;
        if (block.pcg_device != expect) fail("device split");
        if (block.trials.size() != kTrialsPerBlock) fail("block must hold 8 trials");
        for (int half = 0; half < 2; ++half) {
            std::vector<double> pps, pcg;
            for (int j = 0; j < kPracticeTrials; ++j) {
                const auto& t = block.trials[static_cast<std::size_t>(half * kPracticeTrials + j)];
                if (t.index != half * kPracticeTrials + j + 1 || t.block != block.number) fail("trial numbering");
                if (t.practice != (half == 0)) fail("practice flags");
                if (t.mode != block.mode || t.pcg_device != block.pcg_device) fail("trial/block mismatch");
                pps.push_back(t.pps_amplitude);
                pcg.push_back(t.pcg_amplitude);
            }
            std::sort(pps.begin(), pps.end());
            std::sort(pcg.begin(), pcg.end());
            const auto& ps = amplitude_set(Role::PPS);
            const auto& cs = amplitude_set(Role::PCG);
            if (!std::equal(pps.begin(), pps.end(), ps.begin(), ps.end())) fail("PPS amplitude multiset");
            if (!std::equal(pcg.begin(), pcg.end(), cs.begin(), cs.end())) fail("PCG amplitude multiset");
        }
    }

    // Checkpoints: IOS first and last, IMI+PANAS right before and after each block.
    using K = CheckpointSpec::Kind;
    const auto& cps = plan.checkpoints;
    if (cps.size() != 10) fail("expected 10 checkpoints");
    auto has = [](const CheckpointSpec& c, Instrument i) {
        return std::find(c.instruments.begin(), c.instruments.end(), i) != c.instruments.end();
    };
    if (cps.front().kind != K::SessionStart || !has(cps.front(), Instrument::IOS)) fail("IOS at session start");
    if (cps.back().kind != K::SessionEnd || !has(cps.back(), Instrument::IOS) ||
        !has(cps.back(), Instrument::Preference))
        fail("IOS and preference at session end");
    int imi = 0, panas = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const auto& c = cps[i];
        if (has(c, Instrument::Preference) && c.kind != K::SessionEnd) fail("preference only at session end");
        if (has(c, Instrument::IOS) && c.kind != K::SessionStart && c.kind != K::SessionEnd)
            fail("IOS only at start and end");
        imi += has(c, Instrument::IMI);
        panas += has(c, Instrument::PANAS);
    }
    for (int b = 1; b <= 4; ++b) {
        const auto& before = cps[static_cast<std::size_t>(2 * b - 1)];
        const auto& after = cps[static_cast<std::size_t>(2 * b)];
        if (before.kind != K::BeforeBlock || before.block != b || !has(before, Instrument::IMI) ||
            !has(before, Instrument::PANAS))
            fail("IMI/PANAS before block " + std::to_string(b));
        if (after.kind != K::AfterBlock || after.block != b || !has(after, Instrument::IMI) ||
            !has(after, Instrument::PANAS))
            fail("IMI/PANAS after block " + std::to_string(b));
    }
    if (imi != 8 || panas != 8) fail("expected 8 IMI and 8 PANAS administrations");
}

TrialMeta make_trial_meta(Mode mode, std::vector<Role> roles, std::vector<double> amplitudes, std::uint64_t seed,
                          const GameConfig& config) {
    TrialMeta m;
    m.mode = mode;
    m.roles = std::move(roles);
    m.amplitudes = std::move(amplitudes);
    m.seed = seed;
    m.frequency = config.sinusoid_frequency;
    for (std::size_t lane = 0; lane < m.amplitudes.size(); ++lane) {
        Rng rng(derive_seed(seed, 0x100 + lane));
        m.phases.push_back(generate_balloons(m.amplitudes[lane], config, rng).phase);
    }
    return m;
}

TrialMeta trial_meta(const TrialPlan& plan, const GameConfig& config) {
    std::vector<double> amps = plan.mode == Mode::Collaborative
                                   ? std::vector<double>{plan.pps_amplitude}
                                   : std::vector<double>{plan.pps_amplitude, plan.pcg_amplitude};
    TrialMeta m = make_trial_meta(plan.mode, {Role::PPS, Role::PCG}, std::move(amps), plan.seed, config);
    m.block = plan.block;
    m.index = plan.index;
    m.practice = plan.practice;
    m.pcg_device = plan.pcg_device;
    return m;
}

std::vector<BalloonField> fields_for(const TrialMeta& meta, const GameConfig& config) {
    if (meta.phases.size() != meta.amplitudes.size()) throw InputError("trial meta needs one phase per lane");
    std::vector<BalloonField> out;
    for (std::size_t i = 0; i < meta.amplitudes.size(); ++i) {
        auto field = make_field(meta.amplitudes[i], meta.phases[i], config);
        if (field.frequency != meta.frequency) throw ConfigError("trial frequency differs from the configuration");
        out.push_back(std::move(field));
    }
    return out;
}

TrialRunner::TrialRunner(TrialMeta meta, const GameConfig& config)
    : config_(config),
      state_(make_trial_state(meta.mode, meta.roles, fields_for(meta, config), derive_seed(meta.seed, 1), config)) {
    record_.meta = std::move(meta);
    record_.initial_avatars = state_.avatars;
    record_.initial_ball = state_.ball;
    record_.rows.reserve(static_cast<std::size_t>(config_.ticks_per_trial()));
}

Observation TrialRunner::observe(int avatar) const {
    const auto& a = state_.avatars.at(static_cast<std::size_t>(avatar));
    const std::size_t lane = state_.mode == Mode::Collaborative ? 0 : static_cast<std::size_t>(avatar);
    return Observation{state_.tick, avatar, a.role, a.x, a.z, &state_.lanes[lane].field};
}

void TrialRunner::step(std::span<const int> directions) {
    state_ = tick(std::move(state_), directions, config_);
    TickRow row;
    row.tick = state_.tick - 1;
    row.t = static_cast<double>(state_.tick) / config_.tick_rate;
    for (int d : directions) row.commands.push_back(d > 0 ? 1 : (d < 0 ? -1 : 0));
    row.avatars = state_.avatars;
    row.ball = state_.ball;
    row.events = state_.last_events;
    for (const auto& lane : state_.lanes) row.scores.push_back(lane.score);
    record_.rows.push_back(std::move(row));
}

TrialRecord TrialRunner::finish(bool aborted) {
    record_.final_scores.clear();
    for (const auto& lane : state_.lanes) record_.final_scores.push_back(lane.score);
    record_.complete = !aborted && done();
    return record_;
}

TrialRecord run_trial(const TrialMeta& meta, std::span<CommandSource* const> sources, const GameConfig& config) {
    if (sources.size() != meta.roles.size()) throw InputError("one command source per avatar is required");
    TrialRunner runner(meta, config);
    std::vector<int> dirs(sources.size());
    while (!runner.done()) {
        for (std::size_t i = 0; i < sources.size(); ++i) {
            auto cmd = sources[i]->next(runner.observe(static_cast<int>(i)));
            if (!cmd) return runner.finish(true);
            dirs[i] = *cmd;
        }
        runner.step(dirs);
    }
    return runner.finish();
}

std::vector<TrialRecord> performance_window(std::span<const TrialRecord> block) {
    if (block.size() < kTrialsPerBlock)
        throw ProtocolError("performance window needs 8 trial records, got " + std::to_string(block.size()));
    return {block.begin() + kPracticeTrials, block.begin() + kTrialsPerBlock};
}

std::string participant_id(const std::string& dyad_id, Role role) {
    return dyad_id + "-" + std::string(to_string(role));
}

SurveyAnswerer random_answerer(std::uint64_t seed) {
    return [seed](const CheckpointSpec& cp, Role role, const InstrumentDefinition& def) {
        const std::string key = cp.position() + "/" + std::string(to_string(role)) + "/" +
                                std::string(to_string(def.instrument));
        Rng rng(derive_seed(seed, fnv1a(key)));
        std::vector<int> scores;
        const auto span = static_cast<std::uint64_t>(def.scale_max - def.scale_min + 1);
        for (std::size_t i = 0; i < def.items.size(); ++i)
            scores.push_back(def.scale_min + static_cast<int>(rng.below(span)));
        return scores;
    };
}

SessionResult run_session(const SessionPlan& plan, const SourceFactory& sources, const SurveyAnswerer& answer,
                          const GameConfig& config, const std::optional<std::filesystem::path>& out_dir,
                          const InstrumentSet& instruments, const std::optional<std::set<int>>& only_blocks) {
    config.validate();
    validate_plan(plan);
    if (out_dir) {
        std::filesystem::create_directories(dyad_dir(*out_dir, plan.dyad_id));
        write_text(plan_path(*out_dir, plan.dyad_id), plan_to_json(plan).dump(2) + "\n");
        write_text(dyad_dir(*out_dir, plan.dyad_id) / "config.json", config_to_json(config).dump(2) + "\n");
    }

    SessionResult result;
    auto administer = [&](const CheckpointSpec& cp) {
        for (Role role : {Role::PPS, Role::PCG}) {
            for (Instrument inst : cp.instruments) {
                SurveyRecord rec{participant_id(plan.dyad_id, role), cp.position(), inst, {}};
                const auto path = out_dir ? survey_path(*out_dir, plan.dyad_id, rec) : std::filesystem::path{};
                if (out_dir && std::filesystem::exists(path)) {
                    result.surveys.push_back(survey_from_json(nlohmann::json::parse(read_text(path))));
                    continue;
                }
                const auto& def = instruments.at(inst);
                rec.item_scores = answer(cp, role, def);
                validate_response({inst, rec.item_scores}, def);
                if (out_dir) write_text(path, survey_to_json(rec).dump() + "\n");
                result.surveys.push_back(std::move(rec));
            }
        }
    };

    auto checkpoint = [&](CheckpointSpec::Kind kind, int block) {
        for (const auto& cp : plan.checkpoints)
            if (cp.kind == kind && cp.block == block) administer(cp);
    };

    using K = CheckpointSpec::Kind;
    checkpoint(K::SessionStart, 0);
    for (const auto& block : plan.blocks) {
        if (only_blocks && !only_blocks->contains(block.number)) continue;
        checkpoint(K::BeforeBlock, block.number);
        std::vector<TrialRecord> records;
        for (const auto& tp : block.trials) {
            const auto path = out_dir ? trial_path(*out_dir, plan.dyad_id, tp.block, tp.index) : std::filesystem::path{};
            if (out_dir && std::filesystem::exists(path)) {
                auto rec = load_trial(path);
                if (rec.complete) {
                    records.push_back(std::move(rec));
                    continue;
                }
            }
            auto pps = sources(tp, Role::PPS);
            auto pcg = sources(tp, Role::PCG);
            std::array<CommandSource*, 2> srcs{pps.get(), pcg.get()};
            auto rec = run_trial(trial_meta(tp, config), srcs, config);
            if (rec.complete) fill_area_errors(rec);
            if (out_dir) write_text(path, trial_to_jsonl(rec));
            records.push_back(std::move(rec));
        }
        result.blocks.push_back(std::move(records));
        checkpoint(K::AfterBlock, block.number);
    }
    checkpoint(K::SessionEnd, 0);
    return result;
}

}  // namespace dyad
