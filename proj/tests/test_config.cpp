#include "doctest.h"
#include "dyad/config.hpp"

using namespace dyad;

TEST_CASE("default config derived quantities") {
    GameConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.ticks_per_trial() == 1800);
    CHECK(c.ticks_per_noise_window() == 30);
    CHECK(c.track_length() == 90.0);
    CHECK(c.balloons_per_trial() == 24);
    CHECK(c.dt() == doctest::Approx(1.0 / 60));
}

TEST_CASE("amplitude sets per role") {
    CHECK(amplitude_set(Role::PPS) == std::array<double, 4>{0.5, 0.7, 0.9, 1.1});
    CHECK(amplitude_set(Role::PCG) == std::array<double, 4>{0.75, 1.0, 1.25, 1.5});
}

TEST_CASE("validate rejects bad configs") {
    auto bad = [](auto mutate) {
        GameConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    bad([](GameConfig& c) { c.forward_speed = 0.0; });
    bad([](GameConfig& c) { c.pcg_lateral_speed = -1.0; });
    bad([](GameConfig& c) { c.tick_rate = 0; });
    bad([](GameConfig& c) { c.track_width = 2.5; });  // narrower than the largest sinusoid
    bad([](GameConfig& c) { c.noise_speed_min = 2.0; });
    bad([](GameConfig& c) { c.noise_window = 0.51; });  // not a whole number of ticks
    bad([](GameConfig& c) { c.trial_duration = 30.001; });
    bad([](GameConfig& c) { c.balloon_spacing = 0.0; });
    bad([](GameConfig& c) { c.ball_radius_max = -0.1; });
}

TEST_CASE("enum names round trip") {
    for (Role r : {Role::PPS, Role::PCG}) CHECK(role_from_string(to_string(r)) == r);
    for (Mode m : {Mode::Solo, Mode::Collaborative}) CHECK(mode_from_string(to_string(m)) == m);
    for (Device d : {Device::Joystick, Device::Pedal, Device::Keyboard}) CHECK(device_from_string(to_string(d)) == d);
    CHECK_THROWS_AS(device_from_string("mouse"), InputError);
    CHECK_THROWS_AS(role_from_string(""), InputError);
}
