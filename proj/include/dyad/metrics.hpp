#pragma once

#include <span>
#include <vector>

#include "dyad/session.hpp"

namespace dyad {

struct TrajectorySample {
    double z = 0.0;
    double x = 0.0;
};

/// Trapezoidal integral over z of |x(z) - A sin(2 pi f z + phase)|, in m^2.
/// Throws InputError for fewer than two samples or z not strictly increasing.
double area_error(std::span<const TrajectorySample> trajectory, double amplitude, double frequency, double phase);

/// Scoring trajectory of a lane: the avatar's path in Solo mode, the ball's path in Collaborative
/// mode. Includes the starting position at z = 0.
std::vector<TrajectorySample> lane_trajectory(const TrialRecord& record, int lane);

double lane_area_error(const TrialRecord& record, int lane);

/// Fills record.area_errors for every lane.
void fill_area_errors(TrialRecord& record);

/// Points on a lane, recounted from the collection events. Throws InputError for an incomplete
/// record or when the recount disagrees with the logged score.
int trial_score(const TrialRecord& record, int lane = 0);

/// Lane holding a participant's scoring trajectory in this trial.
int lane_of(const TrialRecord& record, Role role);

struct PerformanceSummary {
    std::vector<double> scores;
    std::vector<double> area_errors;
    double mean_score = 0.0;
    double sd_score = 0.0;
    double mean_area_error = 0.0;
    double sd_area_error = 0.0;
};

/// Mean and sample standard deviation over the performance window for one participant.
PerformanceSummary summarize(std::span<const TrialRecord> window, Role role);

double mean(std::span<const double> v);
/// Sample (n - 1) standard deviation; zero for fewer than two values.
double sample_sd(std::span<const double> v);

}  // namespace dyad
