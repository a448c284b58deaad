#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dyad {

// Error categories shared across modules.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfRangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

enum class Role { PPS, PCG };
enum class Mode { Solo, Collaborative };
enum class Device { Joystick, Pedal, Keyboard };

std::string_view to_string(Role r);
std::string_view to_string(Mode m);
std::string_view to_string(Device d);
Role role_from_string(std::string_view s);
Mode mode_from_string(std::string_view s);
Device device_from_string(std::string_view s);

/// Balloon amplitudes available to a role, in metres.
const std::array<double, 4>& amplitude_set(Role r);

/// Every tunable constant of the game world.
struct GameConfig {
    double forward_speed = 3.0;        // m/s
    double pcg_lateral_speed = 1.5;    // m/s
    double trial_duration = 30.0;      // s
    int tick_rate = 60;                // Hz
    double track_width = 4.0;          // m
    double sinusoid_frequency = 0.08;  // cycles/m
    double balloon_spacing = 3.75;     // m along z
    double collection_radius_solo = 0.15;
    double ball_radius_max = 0.15;
    double balloon_visual_radius = 0.05;
    double deadzone = 20.0;            // degrees
    double noise_window = 0.5;         // s
    double noise_speed_min = 0.5;      // m/s
    double noise_speed_max = 1.5;      // m/s
    std::uint64_t rng_seed = 20240501;

    double dt() const { return 1.0 / tick_rate; }
    double track_length() const { return forward_speed * trial_duration; }
    int ticks_per_trial() const;
    int ticks_per_noise_window() const;
    int balloons_per_trial() const;

    /// Throws ConfigError when any invariant is violated.
    void validate() const;
};

}  // namespace dyad
