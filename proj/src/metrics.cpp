#include "dyad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dyad {

double area_error(std::span<const TrajectorySample> trajectory, double amplitude, double frequency, double phase) {
    if (trajectory.size() < 2) throw InputError("area_error needs at least two samples");
    auto deviation = [&](const TrajectorySample& s) {
        return std::abs(s.x - amplitude * std::sin(2.0 * std::numbers::pi * frequency * s.z + phase));
    };
    double area = 0.0;
    double prev = deviation(trajectory[0]);
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const double dz = trajectory[i].z - trajectory[i - 1].z;
        if (!(dz > 0.0)) throw InputError("trajectory z must be strictly increasing");
        const double cur = deviation(trajectory[i]);
        area += 0.5 * (prev + cur) * dz;
        prev = cur;
    }
    return area;
}

std::vector<TrajectorySample> lane_trajectory(const TrialRecord& record, int lane) {
    if (lane < 0 || lane >= record.lane_count()) throw InputError("lane out of range");
    const auto l = static_cast<std::size_t>(lane);
    const bool collab = record.meta.mode == Mode::Collaborative;
    std::vector<TrajectorySample> out;
    out.reserve(record.rows.size() + 1);
    auto push = [&](const std::vector<AvatarState>& avatars, const std::optional<CollabBall>& ball) {
        double x;
        if (!collab) x = avatars.at(l).x;
        else if (ball) x = ball->x;
        else x = (avatars.at(0).x + avatars.at(1).x) / 2.0;
        out.push_back({avatars.at(0).z, x});
    };
    push(record.initial_avatars, record.initial_ball);
    for (const auto& row : record.rows) push(row.avatars, row.ball);
    return out;
}

double lane_area_error(const TrialRecord& record, int lane) {
    const auto traj = lane_trajectory(record, lane);
    const auto l = static_cast<std::size_t>(lane);
    return area_error(traj, record.meta.amplitudes.at(l), record.meta.frequency, record.meta.phases.at(l));
}

void fill_area_errors(TrialRecord& record) {
    record.area_errors.clear();
    for (int lane = 0; lane < record.lane_count(); ++lane) record.area_errors.push_back(lane_area_error(record, lane));
}

int trial_score(const TrialRecord& record, int lane) {
    if (!record.complete) throw InputError("incomplete trial is excluded from scoring");
    if (lane < 0 || lane >= record.lane_count()) throw InputError("lane out of range");
    int count = 0;
    for (const auto& row : record.rows)
        for (const auto& e : row.events)
            if (e.lane == lane) ++count;
    if (count != record.final_scores.at(static_cast<std::size_t>(lane)))
        throw InputError("collection events disagree with the logged score");
    return count;
}

int lane_of(const TrialRecord& record, Role role) {
    if (record.meta.mode == Mode::Collaborative) return 0;
    const auto it = std::find(record.meta.roles.begin(), record.meta.roles.end(), role);
    if (it == record.meta.roles.end()) throw InputError("role not present in trial");
    return static_cast<int>(it - record.meta.roles.begin());
}

double mean(std::span<const double> v) {
    if (v.empty()) throw InputError("mean of empty sequence");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PerformanceSummary summarize(std::span<const TrialRecord> window, Role role) {
    if (window.empty()) throw InputError("empty performance window");
    PerformanceSummary s;
    for (const auto& rec : window) {
        const int lane = lane_of(rec, role);
        s.scores.push_back(trial_score(rec, lane));
        s.area_errors.push_back(rec.area_errors.size() == static_cast<std::size_t>(rec.lane_count())
                                    ? rec.area_errors[static_cast<std::size_t>(lane)]
                                    : lane_area_error(rec, lane));
    }
    s.mean_score = mean(s.scores);
    s.sd_score = sample_sd(s.scores);
    s.mean_area_error = mean(s.area_errors);
    s.sd_area_error = sample_sd(s.area_errors);
    return s;
}

}  // namespace dyad
