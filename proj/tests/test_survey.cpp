#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dyad/rng.hpp"
#include "dyad/survey.hpp"

using namespace dyad;

namespace {

int count_subscale(const InstrumentDefinition& d, const std::string& name) {
    return static_cast<int>(
        std::count_if(d.items.begin(), d.items.end(), [&](const SurveyItem& i) { return i.subscale == name; }));
}

// Independent subscale mean: reverse flagged items on the 1..7 scale.
double subscale_mean(const InstrumentDefinition& d, const std::vector<int>& scores, const std::string& name) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < d.items.size(); ++i) {
        if (d.items[i].subscale != name) continue;
        sum += d.items[i].reversed ? 8 - scores[i] : scores[i];
        ++n;
    }
    return sum / n;
}

}  // namespace

TEST_CASE("default instrument forms") {
    const auto& set = default_instruments();
    const auto& imi = set.at(Instrument::IMI);
    CHECK(imi.items.size() == 18);
    CHECK(count_subscale(imi, "interest") == 7);
    CHECK(count_subscale(imi, "competence") == 6);
    CHECK(count_subscale(imi, "tension") == 5);
    CHECK(imi.scale_min == 1);
    CHECK(imi.scale_max == 7);
    const auto& panas = set.at(Instrument::PANAS);
    CHECK(panas.items.size() == 20);
    CHECK(count_subscale(panas, "positive") == 10);
    CHECK(count_subscale(panas, "negative") == 10);
    CHECK(panas.scale_max == 5);
    CHECK(set.at(Instrument::IOS).items.size() == 1);
    CHECK(set.at(Instrument::Preference).items.size() == 2);
    CHECK(preference_conditions().size() == 5);
}

TEST_CASE("IMI scoring with reverse-keyed items") {
    const auto& imi = default_instruments().at(Instrument::IMI);
    auto all = [&](int v) { return std::vector<int>(imi.items.size(), v); };
    const auto mid = score_imi({Instrument::IMI, all(4)});
    CHECK(mid.interest == 4.0);
    CHECK(mid.competence == 4.0);
    CHECK(mid.tension == 4.0);

    Rng r(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> scores;
        for (std::size_t i = 0; i < imi.items.size(); ++i) scores.push_back(1 + static_cast<int>(r.below(7)));
        const auto s = score_imi({Instrument::IMI, scores});
        CHECK(s.interest == doctest::Approx(subscale_mean(imi, scores, "interest")));
        CHECK(s.competence == doctest::Approx(subscale_mean(imi, scores, "competence")));
        CHECK(s.tension == doctest::Approx(subscale_mean(imi, scores, "tension")));
        CHECK(s.interest >= 1.0);
        CHECK(s.interest <= 7.0);
    }
    // a reversed item answered 2 contributes 6
    auto scores = all(4);
    for (std::size_t i = 0; i < imi.items.size(); ++i) {
        if (imi.items[i].subscale == "tension" && imi.items[i].reversed) {
            scores[i] = 2;
            break;
        }
    }
    CHECK(score_imi({Instrument::IMI, scores}).tension == doctest::Approx((4.0 * 4 + 6) / 5));
}

TEST_CASE("IMI subscale invariant under permuting items within a subscale") {
    const auto& imi = default_instruments().at(Instrument::IMI);
    std::vector<int> scores(imi.items.size(), 1);
    std::vector<std::size_t> plain_interest;
    for (std::size_t i = 0; i < imi.items.size(); ++i)
        if (imi.items[i].subscale == "interest" && !imi.items[i].reversed) plain_interest.push_back(i);
    REQUIRE(plain_interest.size() >= 2);
    scores[plain_interest[0]] = 7;
    auto swapped = scores;
    std::swap(swapped[plain_interest[0]], swapped[plain_interest[1]]);
    CHECK(score_imi({Instrument::IMI, scores}).interest == score_imi({Instrument::IMI, swapped}).interest);
}

TEST_CASE("PANAS totals") {
    const auto& panas = default_instruments().at(Instrument::PANAS);
    auto all = [&](int v) { return std::vector<int>(20, v); };
    CHECK(score_panas({Instrument::PANAS, all(1)}).positive == 10);
    CHECK(score_panas({Instrument::PANAS, all(5)}).negative == 50);
    std::vector<int> split(20);
    for (std::size_t i = 0; i < 20; ++i) split[i] = panas.items[i].subscale == "positive" ? 5 : 1;
    const auto s = score_panas({Instrument::PANAS, split});
    CHECK(s.positive == 50);
    CHECK(s.negative == 10);
    CHECK_THROWS_AS(score_panas({Instrument::PANAS, std::vector<int>(19, 3)}), InputError);
}

TEST_CASE("response validation and IOS change") {
    const auto& imi = default_instruments().at(Instrument::IMI);
    std::vector<int> scores(18, 4);
    CHECK_NOTHROW(validate_response({Instrument::IMI, scores}, imi));
    scores[3] = 8;
    CHECK_THROWS_AS(validate_response({Instrument::IMI, scores}, imi), InputError);
    CHECK_THROWS_AS(validate_response({Instrument::IMI, std::vector<int>(17, 4)}, imi), InputError);
    CHECK(ios_change(4, 5) == 1);
    CHECK(ios_change(4, 4) == 0);
    CHECK(ios_change(7, 1) == -6);
    CHECK_THROWS_AS(ios_change(0, 3), InputError);
    CHECK_THROWS_AS(ios_change(3, 8), InputError);
}

TEST_CASE("instrument definitions load from file") {
    const auto path = std::filesystem::temp_directory_path() / "dyad_instruments.json";
    {
        std::ofstream out(path);
        out << R"({"IOS": {"scale": [1, 7], "items": [{"text": "Which picture describes us?", "subscale": "ios"}]},
                   "IMI": {"scale": [1, 7], "items": [
                      {"text": "fun", "subscale": "interest"},
                      {"text": "boring", "subscale": "interest", "reversed": true},
                      {"text": "good at it", "subscale": "competence"},
                      {"text": "tense", "subscale": "tension"}]}})";
    }
    const auto set = load_instruments(path);
    CHECK(set.at(Instrument::IMI).items.size() == 4);
    CHECK(set.at(Instrument::PANAS).items.size() == 20);
    const auto s = score_imi({Instrument::IMI, {7, 7, 5, 2}}, set.at(Instrument::IMI));
    CHECK(s.interest == 4.0);
    CHECK(s.competence == 5.0);
    CHECK(s.tension == 2.0);
    std::filesystem::remove(path);
    CHECK_THROWS(load_instruments(path));
}
