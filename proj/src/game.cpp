#include "dyad/game.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dyad {

double BalloonField::target_x(double z) const {
    return amplitude * std::sin(2.0 * std::numbers::pi * frequency * z + phase);
}

int BalloonField::collected_count() const {
    return static_cast<int>(
        std::count_if(balloons.begin(), balloons.end(), [](const Balloon& b) { return b.collected; }));
}

int TrialState::total_score() const {
    int s = 0;
    for (const auto& lane : lanes) s += lane.score;
    return s;
}

BalloonField make_field(double amplitude, double phase, const GameConfig& config) {
    if (!(amplitude >= 0.0)) throw ConfigError("amplitude must be non-negative");
    if (amplitude > config.track_width / 2.0)
        throw ConfigError("amplitude exceeds half the track width");
    BalloonField field;
    field.amplitude = amplitude;
    field.frequency = config.sinusoid_frequency;
    field.phase = phase;
    const int count = config.balloons_per_trial();
    field.balloons.reserve(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) {
        const double z = k * config.balloon_spacing;
        field.balloons.push_back({field.target_x(z), z, false});
    }
    return field;
}

BalloonField generate_balloons(double amplitude, const GameConfig& config, Rng& rng) {
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return make_field(amplitude, phase, config);
}

NoiseState make_noise(std::uint64_t seed) {
    return NoiseState{0.0, -1, Rng(seed)};
}

NoiseState resample_noise(NoiseState noise, int tick, const GameConfig& config) {
    const int window = tick / config.ticks_per_noise_window();
    if (tick % config.ticks_per_noise_window() == 0 && window != noise.window_index) {
        noise.current_speed = noise.rng.uniform(config.noise_speed_min, config.noise_speed_max);
        noise.window_index = window;
    }
    return noise;
}

double pps_lateral_command(double roll_deg, const NoiseState& noise, const GameConfig& config) {
    if (roll_deg > config.deadzone) return noise.current_speed;
    if (roll_deg < -config.deadzone) return -noise.current_speed;
    return 0.0;
}

double lateral_velocity(Role role, int direction, const std::optional<NoiseState>& noise,
                        const GameConfig& config) {
    if (direction == 0) return 0.0;
    const double sign = direction > 0 ? 1.0 : -1.0;
    if (role == Role::PCG) return sign * config.pcg_lateral_speed;
    if (!noise) throw InputError("PPS avatar requires a noise state");
    return sign * noise->current_speed;
}

CollabBall collab_ball(double x1, double x2, const GameConfig& config) {
    // full size up to W/3, linear to zero at 2W/3; written in 3d so the breakpoints are exact
    const double d3 = 3.0 * std::abs(x1 - x2);
    const double w = config.track_width;
    double radius;
    if (d3 <= w) {
        radius = config.ball_radius_max;
    } else if (d3 < 2.0 * w) {
        radius = config.ball_radius_max * ((2.0 * w - d3) / w);
    } else {
        radius = 0.0;
    }
    radius = std::clamp(radius, 0.0, config.ball_radius_max);
    return CollabBall{(x1 + x2) / 2.0, radius, radius > 0.0};
}

CollectionResult check_collection(double x_prev, double x_now, double collector_radius,
                                  BalloonField field, double z_prev, double z_now,
                                  double visual_radius) {
    if (!(z_prev < z_now)) throw InputError("collection window must have z_prev < z_now");
    CollectionResult out;
    if (collector_radius > 0.0) {
        const double reach = collector_radius + visual_radius;
        for (std::size_t i = 0; i < field.balloons.size(); ++i) {
            auto& b = field.balloons[i];
            if (b.collected || b.z <= z_prev || b.z > z_now) continue;
            const double frac = (b.z - z_prev) / (z_now - z_prev);
            const double x = x_prev + (x_now - x_prev) * frac;
            if (std::abs(x - b.x) <= reach) {
                b.collected = true;
                ++out.points;
                out.collected.push_back(static_cast<int>(i));
                out.x_at_crossing.push_back(x);
            }
        }
    }
    out.field = std::move(field);
    return out;
}

TrialState make_trial_state(Mode mode, std::span<const Role> roles, std::vector<BalloonField> fields,
                            std::uint64_t noise_seed, const GameConfig& config) {
    config.validate();
    if (roles.empty() || roles.size() > 2) throw ConfigError("a trial has one or two avatars");
    if (mode == Mode::Collaborative) {
        if (roles.size() != 2) throw ConfigError("collaborative mode needs exactly two avatars");
        if (fields.size() != 1) throw ConfigError("collaborative mode uses one shared field");
    } else if (fields.size() != roles.size()) {
        throw ConfigError("solo mode needs one field per avatar");
    }
    if (std::count(roles.begin(), roles.end(), Role::PPS) > 1)
        throw ConfigError("at most one PPS avatar per trial");

    TrialState s;
    s.mode = mode;
    for (Role r : roles) s.avatars.push_back(AvatarState{r, 0.0, 0.0, 0.0});
    for (auto& f : fields) s.lanes.push_back(Lane{std::move(f), 0});
    if (mode == Mode::Collaborative) s.ball = collab_ball(s.avatars[0].x, s.avatars[1].x, config);
    if (std::find(roles.begin(), roles.end(), Role::PPS) != roles.end()) s.noise = make_noise(noise_seed);
    return s;
}

TrialState tick(TrialState state, std::span<const int> directions, const GameConfig& config) {
    if (state.tick >= config.ticks_per_trial())
        throw OutOfRangeError("trial already past its duration");
    if (directions.size() != state.avatars.size())
        throw InputError("one command per avatar is required");

    const double dt = config.dt();
    const double half_width = config.track_width / 2.0;
    const double z_prev = static_cast<double>(state.tick) * config.forward_speed / config.tick_rate;
    const double z_now = static_cast<double>(state.tick + 1) * config.forward_speed / config.tick_rate;

    if (state.noise) state.noise = resample_noise(std::move(*state.noise), state.tick, config);

    std::vector<double> x_prev;
    x_prev.reserve(state.avatars.size());
    for (std::size_t i = 0; i < state.avatars.size(); ++i) {
        auto& a = state.avatars[i];
        const int dir = directions[i] > 0 ? 1 : (directions[i] < 0 ? -1 : 0);
        x_prev.push_back(a.x);
        a.lateral_velocity = lateral_velocity(a.role, dir, state.noise, config);
        a.x = std::clamp(a.x + a.lateral_velocity * dt, -half_width, half_width);
        a.z = z_now;
    }

    state.last_events.clear();
    auto collect = [&](int lane_index, double xp, double xn, double radius) {
        auto& lane = state.lanes[static_cast<std::size_t>(lane_index)];
        auto res = check_collection(xp, xn, radius, std::move(lane.field), z_prev, z_now,
                                    config.balloon_visual_radius);
        lane.field = std::move(res.field);
        lane.score += res.points;
        for (std::size_t k = 0; k < res.collected.size(); ++k) {
            const auto& b = lane.field.balloons[static_cast<std::size_t>(res.collected[k])];
            state.last_events.push_back({lane_index, res.collected[k], b.z, res.x_at_crossing[k]});
        }
    };

    if (state.mode == Mode::Collaborative) {
        const double ball_prev_x = (x_prev[0] + x_prev[1]) / 2.0;
        state.ball = collab_ball(state.avatars[0].x, state.avatars[1].x, config);
        collect(0, ball_prev_x, state.ball->x, state.ball->radius);
    } else {
        for (std::size_t i = 0; i < state.avatars.size(); ++i)
            collect(static_cast<int>(i), x_prev[i], state.avatars[i].x, config.collection_radius_solo);
    }

    ++state.tick;
    return state;
}

}  // namespace dyad
