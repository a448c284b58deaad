#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/config.hpp"

namespace dyad {

enum class Instrument { IMI, PANAS, IOS, Preference };

std::string_view to_string(Instrument i);
Instrument instrument_from_string(std::string_view s);

struct SurveyItem {
    std::string text;
    std::string subscale;  // IMI: interest/competence/tension; PANAS: positive/negative
    bool reversed = false;
};

struct InstrumentDefinition {
    Instrument instrument = Instrument::IMI;
    int scale_min = 1;
    int scale_max = 7;
    std::vector<SurveyItem> items;
};

/// Item sets for every instrument, keyed by instrument.
using InstrumentSet = std::map<Instrument, InstrumentDefinition>;

/// IMI interest/enjoyment, perceived competence and pressure/tension subscales;
/// the 20-item PANAS; single-item IOS; two-item condition preference.
const InstrumentSet& default_instruments();

/// Loads an instrument-definition JSON file:
/// {"IMI": {"scale": [1,7], "items": [{"text":..., "subscale":..., "reversed": bool}, ...]}, ...}
/// Instruments absent from the file keep their defaults.
InstrumentSet load_instruments(const std::filesystem::path& path);

/// Conditions a participant can name in the preference item.
const std::vector<std::string>& preference_conditions();

struct SurveyResponse {
    Instrument instrument = Instrument::IMI;
    std::vector<int> item_scores;
};

/// Throws InputError when item count or any score does not fit the definition.
void validate_response(const SurveyResponse& r, const InstrumentDefinition& def);

struct ImiScores {
    double interest = 0.0;
    double competence = 0.0;
    double tension = 0.0;
};

struct PanasScores {
    int positive = 0;
    int negative = 0;
};

ImiScores score_imi(const SurveyResponse& r, const InstrumentDefinition& def = default_instruments().at(Instrument::IMI));
PanasScores score_panas(const SurveyResponse& r,
                        const InstrumentDefinition& def = default_instruments().at(Instrument::PANAS));
int ios_change(int pre, int post);

}  // namespace dyad
