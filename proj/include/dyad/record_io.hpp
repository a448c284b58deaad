#pragma once

#include <filesystem>
#include <string>

#include "dyad/config.hpp"
#include "dyad/session.hpp"
#include "json.hpp"

namespace dyad {

nlohmann::json config_to_json(const GameConfig& c);
/// Missing keys keep their defaults; the result is validated.
GameConfig config_from_json(const nlohmann::json& j);
GameConfig load_config(const std::filesystem::path& path);

nlohmann::json plan_to_json(const SessionPlan& plan);
SessionPlan plan_from_json(const nlohmann::json& j);
SessionPlan load_plan(const std::filesystem::path& path);

nlohmann::json meta_to_json(const TrialMeta& m);
TrialMeta meta_from_json(const nlohmann::json& j);

/// JSON Lines: a "trial" header line, one "tick" line per row, then a "result" line.
std::string trial_to_jsonl(const TrialRecord& r);
TrialRecord trial_from_jsonl(const std::string& text);
TrialRecord load_trial(const std::filesystem::path& path);

nlohmann::json survey_to_json(const SurveyRecord& s);
SurveyRecord survey_from_json(const nlohmann::json& j);

// <out>/<dyad>/...
std::filesystem::path dyad_dir(const std::filesystem::path& out, const std::string& dyad_id);
std::filesystem::path trial_path(const std::filesystem::path& out, const std::string& dyad_id, int block, int index);
std::filesystem::path survey_path(const std::filesystem::path& out, const std::string& dyad_id, const SurveyRecord& s);
std::filesystem::path plan_path(const std::filesystem::path& out, const std::string& dyad_id);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and renames, so a crash never leaves a partial file.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dyad
