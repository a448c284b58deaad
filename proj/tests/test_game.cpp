#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "dyad/game.hpp"

using namespace dyad;

namespace {

TrialState two_player(Mode mode, double amp, std::uint64_t seed, const GameConfig& c) {
    const std::vector<Role> roles{Role::PPS, Role::PCG};
    std::vector<BalloonField> fields{make_field(amp, 0.3, c)};
    if (mode == Mode::Solo) fields.push_back(make_field(amp, 1.1, c));
    return make_trial_state(mode, roles, fields, seed, c);
}

}  // namespace

TEST_CASE("balloons lie on the sinusoid at fixed spacing") {
    GameConfig c;
    const auto f = make_field(1.25, 0.7, c);
    REQUIRE(f.balloons.size() == 24);
    for (std::size_t k = 0; k < f.balloons.size(); ++k) {
        const double z = (k + 1) * 3.75;
        CHECK(f.balloons[k].z == z);
        CHECK(f.balloons[k].x == doctest::Approx(1.25 * std::sin(2 * std::numbers::pi * 0.08 * z + 0.7)));
        CHECK_FALSE(f.balloons[k].collected);
    }
    CHECK_THROWS_AS(make_field(2.1, 0.0, c), ConfigError);
}

TEST_CASE("generated phase is in [0, 2 pi) and seeded") {
    GameConfig c;
    Rng a(5), b(5);
    const auto f1 = generate_balloons(1.0, c, a);
    const auto f2 = generate_balloons(1.0, c, b);
    CHECK(f1 == f2);
    Rng r(6);
    for (int i = 0; i < 1000; ++i) {
        const auto f = generate_balloons(0.5, c, r);
        REQUIRE(f.phase >= 0.0);
        REQUIRE(f.phase < 2 * std::numbers::pi);
    }
}

TEST_CASE("ball radius at the breakpoints is exact") {
    GameConfig c;
    const double W = c.track_width, R = c.ball_radius_max;
    CHECK(collab_ball(0.0, 0.0, c).radius == R);
    CHECK(collab_ball(-W / 6, W / 6, c).radius == R);
    CHECK(collab_ball(-W / 4, W / 4, c).radius == R / 2);
    CHECK(collab_ball(-W / 3, W / 3, c).radius == 0.0);
    CHECK(collab_ball(-W / 2, W / 2, c).radius == 0.0);
    CHECK_FALSE(collab_ball(-W / 2, W / 2, c).active);
    CHECK(collab_ball(0.4, 1.0, c).x == doctest::Approx(0.7));
}

TEST_CASE("ball radius is symmetric and non-increasing in separation") {
    GameConfig c;
    Rng r(17);
    for (int i = 0; i < 2000; ++i) {
        const double a = r.uniform(-2, 2), b = r.uniform(-2, 2);
        const auto ab = collab_ball(a, b, c), ba = collab_ball(b, a, c);
        CHECK(ab.radius == ba.radius);
        const double d = std::abs(a - b), d2 = d + r.uniform(0, 1);
        CHECK(collab_ball(0, d2, c).radius <= collab_ball(0, d, c).radius);
        CHECK(ab.radius >= 0.0);
        CHECK(ab.radius <= c.ball_radius_max);
    }
}

TEST_CASE("collection is crossing based with interpolation") {
    GameConfig c;
    BalloonField f;
    f.balloons = {{0.5, 1.5, false}};
    const double reach = 0.1 + 0.05;
    auto hit = check_collection(0.0, 1.0, 0.1, f, 1.0, 2.0, 0.05);
    CHECK(hit.points == 1);
    CHECK(hit.field.balloons[0].collected);
    CHECK(hit.x_at_crossing[0] == doctest::Approx(0.5));
    // collector passes reach + a hair to the side
    f.balloons = {{0.5 + reach + 1e-9, 1.5, false}};
    CHECK(check_collection(0.0, 1.0, 0.1, f, 1.0, 2.0, 0.05).points == 0);
    // balloon outside the z window
    f.balloons = {{0.5, 2.5, false}};
    CHECK(check_collection(0.0, 1.0, 0.1, f, 1.0, 2.0, 0.05).points == 0);
    CHECK_THROWS_AS(check_collection(0, 0, 0.1, f, 2.0, 2.0, 0.05), InputError);
}

TEST_CASE("scoring is disabled exactly when the radius is zero") {
    BalloonField f;
    f.balloons = {{0.0, 1.5, false}};
    CHECK(check_collection(0.0, 0.0, 0.0, f, 1.0, 2.0, 0.05).points == 0);
    CHECK(check_collection(0.0, 0.0, 1e-12, f, 1.0, 2.0, 0.05).points == 1);
}

TEST_CASE("collaborative trials never score while the ball is gone") {
    GameConfig c;
    Rng r(99);
    int scored_ticks = 0;
    for (int trial = 0; trial < 10; ++trial) {
        auto s = two_player(Mode::Collaborative, 0.5, 1000 + trial, c);
        std::array<int, 2> dirs{0, 0};
        for (int t = 0; t < c.ticks_per_trial(); ++t) {
            if (t % 20 == 0) dirs = {static_cast<int>(r.below(3)) - 1, static_cast<int>(r.below(3)) - 1};
            s = tick(std::move(s), dirs, c);
            REQUIRE(s.ball);
            if (s.ball->radius == 0.0) CHECK(s.last_events.empty());
            if (!s.last_events.empty()) ++scored_ticks;
        }
        CHECK(s.total_score() <= 24);
    }
    CHECK(scored_ticks > 0);
}

TEST_CASE("forward progress lands exactly on the track length") {
    GameConfig c;
    auto s = two_player(Mode::Solo, 0.75, 1, c);
    const std::array<int, 2> none{0, 0};
    for (int t = 0; t < c.ticks_per_trial(); ++t) s = tick(std::move(s), none, c);
    CHECK(s.avatars[0].z == 90.0);
    CHECK(s.avatars[1].z == 90.0);
    CHECK_THROWS_AS(tick(s, none, c), OutOfRangeError);
}

TEST_CASE("a still avatar on a flat field collects every balloon") {
    GameConfig c;
    const std::vector<Role> roles{Role::PCG};
    auto s = make_trial_state(Mode::Solo, roles, {make_field(0.0, 0.0, c)}, 1, c);
    const std::array<int, 1> none{0};
    for (int t = 0; t < c.ticks_per_trial(); ++t) s = tick(std::move(s), none, c);
    CHECK(s.lanes[0].score == 24);
    CHECK(s.lanes[0].field.collected_count() == 24);
}

TEST_CASE("PCG moves at its fixed speed and is clamped to the track") {
    GameConfig c;
    auto s = two_player(Mode::Solo, 0.75, 1, c);
    const std::array<int, 2> right{0, 1};
    s = tick(std::move(s), right, c);
    CHECK(s.avatars[1].x == doctest::Approx(1.5 / 60));
    CHECK(s.avatars[1].lateral_velocity == 1.5);
    for (int t = 1; t < 200; ++t) s = tick(std::move(s), right, c);
    CHECK(s.avatars[1].x == c.track_width / 2);
}

TEST_CASE("PPS speed noise is redrawn once per window within bounds") {
    GameConfig c;
    auto s = two_player(Mode::Solo, 0.75, 77, c);
    const std::array<int, 2> right{1, 0};
    double last = -1.0;
    int changes = 0;
    for (int t = 0; t < c.ticks_per_trial(); ++t) {
        s = tick(std::move(s), right, c);
        const double v = s.avatars[0].lateral_velocity;
        REQUIRE(v >= 0.5);
        REQUIRE(v < 1.5);
        CHECK(v == s.noise->current_speed);
        if (v != last) {
            CHECK(t % 30 == 0);
            ++changes;
        }
        last = v;
    }
    CHECK(changes >= 55);  // 60 windows, repeats are vanishingly unlikely
}

TEST_CASE("PPS deadzone mapping") {
    GameConfig c;
    NoiseState n = make_noise(1);
    n = resample_noise(n, 0, c);
    CHECK(pps_lateral_command(20.0, n, c) == 0.0);
    CHECK(pps_lateral_command(-20.0, n, c) == 0.0);
    CHECK(pps_lateral_command(20.5, n, c) == n.current_speed);
    CHECK(pps_lateral_command(-45.0, n, c) == -n.current_speed);
}

TEST_CASE("tick is deterministic") {
    GameConfig c;
    auto a = two_player(Mode::Collaborative, 0.9, 5, c);
    auto b = two_player(Mode::Collaborative, 0.9, 5, c);
    const std::array<int, 2> dirs{1, -1};
    for (int t = 0; t < 300; ++t) {
        a = tick(std::move(a), dirs, c);
        b = tick(std::move(b), dirs, c);
    }
    CHECK(a == b);
}

TEST_CASE("trial construction errors") {
    GameConfig c;
    const std::vector<Role> one{Role::PCG};
    const std::vector<Role> two_pps{Role::PPS, Role::PPS};
    CHECK_THROWS_AS(make_trial_state(Mode::Collaborative, one, {make_field(1, 0, c)}, 1, c), ConfigError);
    CHECK_THROWS_AS(make_trial_state(Mode::Solo, two_pps, {make_field(1, 0, c), make_field(1, 0, c)}, 1, c),
                    ConfigError);
    auto s = two_player(Mode::Solo, 0.75, 1, c);
    const std::array<int, 1> short_cmd{0};
    CHECK_THROWS_AS(tick(s, short_cmd, c), InputError);
}
