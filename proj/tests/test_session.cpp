#include <filesystem>
#include <set>

#include "doctest.h"
#include "dyad/agents.hpp"
#include "dyad/record_io.hpp"
#include "dyad/session.hpp"
#include "support/plan_oracle.hpp"

using namespace dyad;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

class Countdown final : public CommandSource {
public:
    explicit Countdown(int n) : left_(n) {}
    std::optional<int> next(const Observation&) override {
        if (left_-- <= 0) return std::nullopt;
        return 1;
    }

private:
    int left_;
};

}  // namespace

TEST_CASE("plans have the study structure across seeds") {
    std::set<Device> firsts;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto p = build_plan("D" + std::to_string(seed % 7), std::nullopt, seed);
        CHECK(oracle::plan_problem(p).empty());
        CHECK_NOTHROW(validate_plan(p));
        firsts.insert(p.first_device);
    }
    CHECK(firsts.size() == 2);
}

TEST_CASE("explicit first device and reproducibility") {
    const auto a = build_plan("D1", Device::Keyboard, 5);
    CHECK(a.first_device == Device::Keyboard);
    CHECK(a.blocks[0].pcg_device == Device::Keyboard);
    CHECK(a.blocks[3].pcg_device == Device::Pedal);
    CHECK(build_plan("D1", Device::Keyboard, 5) == a);
    CHECK_FALSE(build_plan("D2", Device::Keyboard, 5) == a);
    CHECK_THROWS_AS(build_plan("D1", Device::Joystick, 5), ConfigError);
}

TEST_CASE("validate_plan rejects broken plans") {
    const auto good = build_plan("D1", Device::Pedal, 3);
    auto broken = [&](auto mutate) {
        auto p = good;
        mutate(p);
        CHECK_THROWS_AS(validate_plan(p), ProtocolError);
        CHECK_FALSE(oracle::plan_problem(p).empty());
    };
    broken([](SessionPlan& p) { std::swap(p.blocks[0].mode, p.blocks[1].mode); });
    broken([](SessionPlan& p) { p.blocks[2].trials[5].pcg_amplitude = p.blocks[2].trials[6].pcg_amplitude; });
    broken([](SessionPlan& p) { p.checkpoints.erase(p.checkpoints.begin() + 3); });
    broken([](SessionPlan& p) { p.blocks.pop_back(); });
    broken([](SessionPlan& p) {
        for (auto& t : p.blocks[2].trials) t.pcg_device = Device::Pedal;
        p.blocks[2].pcg_device = Device::Pedal;
    });
}

TEST_CASE("checkpoint positions") {
    const auto p = build_plan("D1", Device::Pedal, 3);
    std::vector<std::string> pos;
    for (const auto& c : p.checkpoints) pos.push_back(c.position());
    CHECK(pos.front() == "session_start");
    CHECK(pos[1] == "before_block1");
    CHECK(pos[2] == "after_block1");
    CHECK(pos.back() == "session_end");
}

TEST_CASE("trial meta per mode") {
    GameConfig c;
    const auto p = build_plan("D1", Device::Pedal, 3);
    const auto& solo = p.blocks[0].trials[0];
    const auto m = trial_meta(solo, c);
    CHECK(m.amplitudes == std::vector<double>{solo.pps_amplitude, solo.pcg_amplitude});
    CHECK(m.phases.size() == 2);
    CHECK(m.roles == std::vector<Role>{Role::PPS, Role::PCG});
    const auto& collab = p.blocks[1].trials[4];
    const auto mc = trial_meta(collab, c);
    CHECK(mc.amplitudes == std::vector<double>{collab.pps_amplitude});
    CHECK(mc.mode == Mode::Collaborative);
    CHECK_FALSE(mc.practice);
    CHECK(fields_for(mc, c).size() == 1);
    CHECK(trial_meta(collab, c) == mc);
}

TEST_CASE("run_trial completes or aborts") {
    GameConfig c;
    const auto meta = make_trial_meta(Mode::Solo, {Role::PCG}, {1.0}, 8, c);
    IdleAgent idle;
    std::array<CommandSource*, 1> one{&idle};
    const auto rec = run_trial(meta, one, c);
    CHECK(rec.complete);
    CHECK(rec.rows.size() == 1800);
    CHECK(rec.rows.back().tick == 1799);
    CHECK(rec.rows.back().t == doctest::Approx(30.0));

    Countdown short_source(100);
    std::array<CommandSource*, 1> s{&short_source};
    const auto partial = run_trial(meta, s, c);
    CHECK_FALSE(partial.complete);
    CHECK(partial.rows.size() == 100);

    std::array<CommandSource*, 2> too_many{&idle, &idle};
    CHECK_THROWS_AS(run_trial(meta, too_many, c), InputError);
}

TEST_CASE("performance window") {
    std::vector<TrialRecord> recs(8);
    for (int i = 0; i < 8; ++i) recs[static_cast<std::size_t>(i)].meta.index = i + 1;
    const auto w = performance_window(recs);
    REQUIRE(w.size() == 4);
    CHECK(w.front().meta.index == 5);
    CHECK(w.back().meta.index == 8);
    recs.pop_back();
    CHECK_THROWS_AS(performance_window(recs), ProtocolError);
}

TEST_CASE("session run resumes from what is on disk") {
    GameConfig c;
    const auto plan = build_plan("R1", Device::Pedal, 21);
    const auto dir = fresh_dir("dyad_session_resume");
    const auto factory = agent_factory(parse_agent("perfect"), parse_agent("bangbang:0.2"), c);
    const auto first = run_session(plan, factory, random_answerer(4), c, dir);
    CHECK(first.blocks.size() == 4);
    CHECK(first.surveys.size() == 38);
    CHECK(first.blocks[2][3].area_errors.size() == 2);

    const auto t3 = trial_path(dir, "R1", 3, 3);
    const std::string original = read_text(t3);
    // leave an incomplete log behind, drop a survey, then rerun
    auto rec = load_trial(t3);
    rec.rows.resize(10);
    rec.complete = false;
    write_text(t3, trial_to_jsonl(rec));
    fs::remove(dir / "R1" / "surveys" / "after_block2_R1-PCG_IMI.json");
    std::size_t fresh_runs = 0;
    const SourceFactory counting = [&](const TrialPlan& tp, Role role) {
        ++fresh_runs;
        return factory(tp, role);
    };
    const auto second = run_session(plan, counting, random_answerer(4), c, dir);
    CHECK(fresh_runs == 2);
    CHECK(read_text(t3) == original);
    CHECK(fs::exists(dir / "R1" / "surveys" / "after_block2_R1-PCG_IMI.json"));
    CHECK(second.surveys == first.surveys);
    fs::remove_all(dir);
}

TEST_CASE("block filter runs only the chosen blocks") {
    GameConfig c;
    const auto plan = build_plan("F1", Device::Pedal, 2);
    const auto r = run_session(plan, agent_factory(parse_agent("idle"), parse_agent("idle"), c), random_answerer(1),
                               c, std::nullopt, default_instruments(), std::set<int>{2});
    REQUIRE(r.blocks.size() == 1);
    CHECK(r.blocks[0].front().meta.block == 2);
    CHECK(r.surveys.size() == 2 + 8 + 4);  // IOS at start, IMI/PANAS around block 2, IOS/preference at end
}

TEST_CASE("participant ids") {
    CHECK(participant_id("D3", Role::PPS) == "D3-PPS");
    CHECK(participant_id("D3", Role::PCG) == "D3-PCG");
}
