#include "dyad/survey.hpp"

#include <fstream>

#include "json.hpp"

namespace dyad {

std::string_view to_string(Instrument i) {
    switch (i) {
        case Instrument::IMI: return "IMI";
        case Instrument::PANAS: return "PANAS";
        case Instrument::IOS: return "IOS";
        case Instrument::Preference: return "Preference";
    }
    return "?";
}

Instrument instrument_from_string(std::string_view s) {
    if (s == "IMI") return Instrument::IMI;
    if (s == "PANAS") return Instrument::PANAS;
    if (s == "IOS") return Instrument::IOS;
    if (s == "Preference") return Instrument::Preference;
    throw InputError("unknown instrument: " + std::string(s));
}

namespace {

InstrumentDefinition make_imi() {
    InstrumentDefinition d{Instrument::IMI, 1, 7, {}};
    auto add = [&](const char* text, const char* sub, bool rev = false) { d.items.push_back({text, sub, rev}); };
    add("I enjoyed doing this activity very much.", "interest");
    add("This activity was fun to do.", "interest");
    add("I thought this was a boring activity.", "interest", true);
    add("This activity did not hold my attention at all.", "interest", true);
    add("I would describe this activity as very interesting.", "interest");
    add("I thought this activity was quite enjoyable.", "interest");
    add("While I was doing this activity, I was thinking about how much I enjoyed it.", "interest");
    add("I think I am pretty good at this activity.", "competence");
    add("I think I did pretty well at this activity, compared to others.", "competence");
    add("After working at this activity for awhile, I felt pretty competent.", "competence");
    add("I am satisfied with my performance at this task.", "competence");
    add("I was pretty skilled at this activity.", "competence");
    add("This was an activity that I couldn't do very well.", "competence", true);
    add("I did not feel nervous at all while doing this.", "tension", true);
    add("I felt very tense while doing this activity.", "tension");
    add("I was very relaxed in doing this.", "tension", true);
    add("I was anxious while working on this task.", "tension");
    add("I felt pressured while doing this.", "tension");
    return d;
}

InstrumentDefinition make_panas() {
    InstrumentDefinition d{Instrument::PANAS, 1, 5, {}};
    const std::pair<const char*, const char*> items[] = {
        {"Interested", "positive"}, {"Distressed", "negative"}, {"Excited", "positive"},
        {"Upset", "negative"},      {"Strong", "positive"},     {"Guilty", "negative"},
        {"Scared", "negative"},     {"Hostile", "negative"},    {"Enthusiastic", "positive"},
        {"Proud", "positive"},      {"Irritable", "negative"},  {"Alert", "positive"},
        {"Ashamed", "negative"},    {"Inspired", "positive"},   {"Nervous", "negative"},
        {"Determined", "positive"}, {"Attentive", "positive"},  {"Jittery", "negative"},
        {"Active", "positive"},     {"Afraid", "negative"},
    };
    for (auto [text, sub] : items) d.items.push_back({text, sub, false});
    return d;
}

InstrumentDefinition make_ios() {
    return {Instrument::IOS, 1, 7, {{"Which picture best describes your relationship with your partner?", "closeness", false}}};
}

InstrumentDefinition make_preference() {
    const int n = static_cast<int>(preference_conditions().size());
    return {Instrument::Preference, 1, n,
            {{"Which game play condition did you prefer?", "self", false},
             {"Which game play condition do you think your partner preferred?", "partner", false}}};
}

}  // namespace

const std::vector<std::string>& preference_conditions() {
    static const std::vector<std::string> kConditions{
        "Collaborative Joystick-Pedal", "Collaborative Joystick-Keyboard", "Solo Pedal",
        "Solo Keyboard", "Solo Joystick"};
    return kConditions;
}

const InstrumentSet& default_instruments() {
    static const InstrumentSet kSet{{Instrument::IMI, make_imi()},
                                    {Instrument::PANAS, make_panas()},
                                    {Instrument::IOS, make_ios()},
                                    {Instrument::Preference, make_preference()}};
    return kSet;
}

InstrumentSet load_instruments(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open instrument file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad instrument file: ") + e.what());
    }
    InstrumentSet set = default_instruments();
    for (auto it = j.begin(); it != j.end(); ++it) {
        InstrumentDefinition d;
        d.instrument = instrument_from_string(it.key());
        const auto& v = it.value();
        auto scale = v.at("scale");
        d.scale_min = scale.at(0).get<int>();
        d.scale_max = scale.at(1).get<int>();
        if (d.scale_min >= d.scale_max) throw InputError("instrument scale must have min < max");
        for (const auto& item : v.at("items")) {
            d.items.push_back({item.value("text", ""), item.at("subscale").get<std::string>(),
                               item.value("reversed", false)});
        }
        if (d.items.empty()) throw InputError("instrument has no items: " + it.key());
        set[d.instrument] = std::move(d);
    }
    return set;
}

void validate_response(const SurveyResponse& r, const InstrumentDefinition& def) {
    if (r.instrument != def.instrument) throw InputError("response does not match instrument");
    if (r.item_scores.size() != def.items.size())
        throw InputError(std::string(to_string(def.instrument)) + " expects " + std::to_string(def.items.size()) +
                         " items, got " + std::to_string(r.item_scores.size()));
    for (int s : r.item_scores)
        if (s < def.scale_min || s > def.scale_max)
            throw InputError(std::string(to_string(def.instrument)) + " item score out of range: " + std::to_string(s));
}

ImiScores score_imi(const SurveyResponse& r, const InstrumentDefinition& def) {
    validate_response(r, def);
    std::map<std::string, std::pair<double, int>> acc;
    for (std::size_t i = 0; i < def.items.size(); ++i) {
        const auto& item = def.items[i];
        const int raw = r.item_scores[i];
        const int s = item.reversed ? def.scale_min + def.scale_max - raw : raw;
        auto& [sum, n] = acc[item.subscale];
        sum += s;
        ++n;
    }
    auto mean = [&](const char* name) {
        auto it = acc.find(name);
        if (it == acc.end()) throw InputError(std::string("IMI form lacks subscale ") + name);
        return it->second.first / it->second.second;
    };
    return {mean("interest"), mean("competence"), mean("tension")};
}

PanasScores score_panas(const SurveyResponse& r, const InstrumentDefinition& def) {
    validate_response(r, def);
    PanasScores out;
    for (std::size_t i = 0; i < def.items.size(); ++i) {
        if (def.items[i].subscale == "positive") out.positive += r.item_scores[i];
        else if (def.items[i].subscale == "negative") out.negative += r.item_scores[i];
    }
    return out;
}

int ios_change(int pre, int post) {
    if (pre < 1 || pre > 7 || post < 1 || post > 7) throw InputError("IOS scores must lie in 1..7");
    return post - pre;
}

}  // namespace dyad
