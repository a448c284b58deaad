#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dyad/config.hpp"
#include "dyad/rng.hpp"

namespace dyad {

struct Balloon {
    double x = 0.0;
    double z = 0.0;
    bool collected = false;

    friend bool operator==(const Balloon&, const Balloon&) = default;
};

/// Target path x = A sin(2 pi f z + phase) and the balloons sampled along it.
struct BalloonField {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
    std::vector<Balloon> balloons;

    double target_x(double z) const;
    int collected_count() const;

    friend bool operator==(const BalloonField&, const BalloonField&) = default;
};

struct AvatarState {
    Role role = Role::PCG;
    double x = 0.0;
    double z = 0.0;
    double lateral_velocity = 0.0;

    friend bool operator==(const AvatarState&, const AvatarState&) = default;
};

struct CollabBall {
    double x = 0.0;
    double radius = 0.0;
    bool active = false;

    friend bool operator==(const CollabBall&, const CollabBall&) = default;
};

/// PPS speed-noise process: one uniform draw per noise window.
struct NoiseState {
    double current_speed = 0.0;
    int window_index = -1;  // -1 until the first draw
    Rng rng;

    friend bool operator==(const NoiseState&, const NoiseState&) = default;
};

/// One scoring track. Solo mode has a lane per avatar, Collaborative a single shared lane.
struct Lane {
    BalloonField field;
    int score = 0;

    friend bool operator==(const Lane&, const Lane&) = default;
};

struct CollectionEvent {
    int lane = 0;
    int balloon = 0;
    double z = 0.0;
    double x_at_crossing = 0.0;

    friend bool operator==(const CollectionEvent&, const CollectionEvent&) = default;
};

struct TrialState {
    Mode mode = Mode::Solo;
    int tick = 0;
    std::vector<AvatarState> avatars;
    std::optional<CollabBall> ball;
    std::vector<Lane> lanes;
    std::optional<NoiseState> noise;
    std::vector<CollectionEvent> last_events;  // collections made by the most recent tick

    int total_score() const;

    friend bool operator==(const TrialState&, const TrialState&) = default;
};

/// Field with balloons at z = k * spacing, k = 1..floor(track_length / spacing).
BalloonField make_field(double amplitude, double phase, const GameConfig& config);

/// As make_field, with the phase drawn uniformly from [0, 2 pi).
BalloonField generate_balloons(double amplitude, const GameConfig& config, Rng& rng);

NoiseState make_noise(std::uint64_t seed);

/// Redraws the speed when `tick` opens a new noise window; otherwise returns the state unchanged.
NoiseState resample_noise(NoiseState noise, int tick, const GameConfig& config);

/// Bang-bang joystick velocity: zero inside the deadzone, else +/- the current noise speed.
double pps_lateral_command(double roll_deg, const NoiseState& noise, const GameConfig& config);

/// Lateral velocity for a direction in {-1, 0, +1} given the avatar's role.
double lateral_velocity(Role role, int direction, const std::optional<NoiseState>& noise,
                        const GameConfig& config);

CollabBall collab_ball(double x1, double x2, const GameConfig& config);

struct CollectionResult {
    int points = 0;
    BalloonField field;
    std::vector<int> collected;  // balloon indices
    std::vector<double> x_at_crossing;
};

/// Collects every uncollected balloon whose z lies in (z_prev, z_now] and whose x is within
/// collector_radius + visual_radius of the collector at the crossing. The collector's x is
/// interpolated linearly between x_prev (at z_prev) and x_now (at z_now). A radius of zero
/// disables collection.
CollectionResult check_collection(double x_prev, double x_now, double collector_radius,
                                  BalloonField field, double z_prev, double z_now,
                                  double visual_radius);

/// Initial state. Solo: one lane per avatar. Collaborative: exactly two avatars, one lane.
/// `noise_seed` seeds the PPS noise stream when a PPS avatar is present.
TrialState make_trial_state(Mode mode, std::span<const Role> roles, std::vector<BalloonField> fields,
                            std::uint64_t noise_seed, const GameConfig& config);

/// Advances one fixed step. `directions` holds one command in {-1, 0, +1} per avatar.
TrialState tick(TrialState state, std::span<const int> directions, const GameConfig& config);

}  // namespace dyad
