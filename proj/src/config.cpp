#include "dyad/config.hpp"

#include <algorithm>
#include <cmath>

namespace dyad {

namespace {
constexpr std::array<double, 4> kPpsAmplitudes{0.5, 0.7, 0.9, 1.1};
constexpr std::array<double, 4> kPcgAmplitudes{0.75, 1.0, 1.25, 1.5};

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }
}  // namespace

std::string_view to_string(Role r) { return r == Role::PPS ? "PPS" : "PCG"; }

std::string_view to_string(Mode m) { return m == Mode::Solo ? "solo" : "collaborative"; }

std::string_view to_string(Device d) {
    switch (d) {
        case Device::Joystick: return "joystick";
        case Device::Pedal: return "pedal";
        case Device::Keyboard: return "keyboard";
    }
    return "?";
}

Role role_from_string(std::string_view s) {
    if (s == "PPS" || s == "pps") return Role::PPS;
    if (s == "PCG" || s == "pcg") return Role::PCG;
    throw InputError("unknown role: " + std::string(s));
}

Mode mode_from_string(std::string_view s) {
    if (s == "solo") return Mode::Solo;
    if (s == "collaborative") return Mode::Collaborative;
    throw InputError("unknown mode: " + std::string(s));
}

Device device_from_string(std::string_view s) {
    if (s == "joystick") return Device::Joystick;
    if (s == "pedal") return Device::Pedal;
    if (s == "keyboard") return Device::Keyboard;
    throw InputError("unknown device: " + std::string(s));
}

const std::array<double, 4>& amplitude_set(Role r) {
    return r == Role::PPS ? kPpsAmplitudes : kPcgAmplitudes;
}

int GameConfig::ticks_per_trial() const {
    return static_cast<int>(std::lround(trial_duration * tick_rate));
}

int GameConfig::ticks_per_noise_window() const {
    return static_cast<int>(std::lround(noise_window * tick_rate));
}

int GameConfig::balloons_per_trial() const {
    // small epsilon so 90 / 3.75 lands on 24 despite roundoff
    return static_cast<int>(std::floor(track_length() / balloon_spacing + 1e-9));
}

void GameConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be strictly positive");
    };
    positive(forward_speed, "forward_speed");
    positive(pcg_lateral_speed, "pcg_lateral_speed");
    positive(trial_duration, "trial_duration");
    positive(tick_rate, "tick_rate");
    positive(track_width, "track_width");
    positive(sinusoid_frequency, "sinusoid_frequency");
    positive(balloon_spacing, "balloon_spacing");
    positive(collection_radius_solo, "collection_radius_solo");
    positive(ball_radius_max, "ball_radius_max");
    positive(noise_window, "noise_window");
    positive(noise_speed_min, "noise_speed_min");
    positive(noise_speed_max, "noise_speed_max");
    if (balloon_visual_radius < 0.0) throw ConfigError("balloon_visual_radius must be >= 0");
    if (deadzone < 0.0) throw ConfigError("deadzone must be >= 0");
    if (noise_speed_min > noise_speed_max)
        throw ConfigError("noise_speed_min must not exceed noise_speed_max");
    const double widest = std::max(kPpsAmplitudes.back(), kPcgAmplitudes.back());
    if (track_width < 2.0 * widest)
        throw ConfigError("track_width must hold the largest amplitude on-track");
    if (!near_integer(tick_rate * noise_window))
        throw ConfigError("noise_window must span a whole number of ticks");
    if (!near_integer(tick_rate * trial_duration))
        throw ConfigError("trial_duration must span a whole number of ticks");
}

}  // namespace dyad
