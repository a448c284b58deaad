#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dyad/session.hpp"
#include "dyad/stats.hpp"
#include "dyad/survey.hpp"

namespace dyad {

/// Everything persisted for one dyad.
struct DyadData {
    SessionPlan plan;
    std::vector<std::vector<TrialRecord>> blocks;  // per block, in trial order; missing trials absent
    std::vector<SurveyRecord> surveys;
};

DyadData load_dyad(const std::filesystem::path& dir);

/// A directory holding plan.json is one dyad; otherwise every sub-directory with a plan.json.
std::vector<DyadData> load_study(const std::filesystem::path& root);

/// One participant's performance in one block (performance window only).
struct MetricsRow {
    std::string participant;
    Role role = Role::PCG;
    int block = 0;
    Mode mode = Mode::Solo;
    Device device = Device::Keyboard;  // PCG input device of the block
    int trials = 0;                    // complete performance trials used
    double mean_score = 0.0;
    double sd_score = 0.0;
    double mean_area_error = 0.0;
    double sd_area_error = 0.0;
};

std::vector<MetricsRow> performance_rows(const std::vector<DyadData>& study);

/// Post-block questionnaire subscale scores for one participant and block.
struct SurveyRow {
    std::string participant;
    Role role = Role::PCG;
    int block = 0;
    Mode mode = Mode::Solo;
    Device device = Device::Keyboard;
    std::string metric;  // Positive, Negative, Interest, Competence, Tension
    double value = 0.0;
};

std::vector<SurveyRow> survey_rows(const std::vector<DyadData>& study, const InstrumentSet& instruments);

/// IOS post minus pre per participant.
std::vector<std::pair<std::string, int>> ios_changes(const std::vector<DyadData>& study);

struct ComparisonRow {
    std::string table;              // performance, panas, imi
    std::string sample_population;  // e.g. "PCG (C)"
    std::string groups_tested;      // Mode or Devices
    std::string metric;
    std::optional<TestResult> result;
    std::string note;  // why no test was run
};

/// The comparison rows of the performance, PANAS and IMI tables. Mode contrasts are
/// Collaborative minus Solo, device contrasts pedal minus keyboard.
std::vector<ComparisonRow> compare(const std::vector<MetricsRow>& perf, const std::vector<SurveyRow>& surveys,
                                   double alpha = 0.05);

/// CSV columns: sample_population,groups_tested,metric,test,statistic,df,p,flag
std::string comparisons_csv(const std::vector<ComparisonRow>& rows);
/// Human-readable rendering in the "t(5) = -5.85 | p < 0.01*" style, grouped by table.
std::string comparisons_text(const std::vector<ComparisonRow>& rows);
/// CSV columns: participant,block,mode,device,mean_score,sd_score,mean_area_error,sd_area_error
std::string metrics_csv(const std::vector<MetricsRow>& rows);
/// Per role, mode, device and metric: median and IQR alongside mean and SD.
std::string descriptives_csv(const std::vector<SurveyRow>& rows);

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> v, double q);

}  // namespace dyad
