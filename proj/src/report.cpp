#include "dyad/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "dyad/metrics.hpp"
#include "dyad/record_io.hpp"

namespace dyad {

namespace fs = std::filesystem;

DyadData load_dyad(const fs::path& dir) {
    DyadData d;
    d.plan = load_plan(dir / "plan.json");
    for (const auto& block : d.plan.blocks) {
        std::vector<TrialRecord> records;
        for (const auto& t : block.trials) {
            const auto path = dir / ("block" + std::to_string(block.number)) / ("trial" + std::to_string(t.index) + ".jsonl");
            if (fs::exists(path)) records.push_back(load_trial(path));
        }
        d.blocks.push_back(std::move(records));
    }
    const auto survey_dir = dir / "surveys";
    if (fs::is_directory(survey_dir)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(survey_dir))
            if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) d.surveys.push_back(survey_from_json(nlohmann::json::parse(read_text(f))));
    }
    return d;
}

std::vector<DyadData> load_study(const fs::path& root) {
    if (fs::exists(root / "plan.json")) return {load_dyad(root)};
    if (!fs::is_directory(root)) throw InputError("no such study directory: " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "plan.json")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw InputError("no dyad sessions under " + root.string());
    std::vector<DyadData> out;
    for (const auto& dir : dirs) out.push_back(load_dyad(dir));
    return out;
}

std::vector<MetricsRow> performance_rows(const std::vector<DyadData>& study) {
    std::vector<MetricsRow> rows;
    for (const auto& dyad : study) {
        for (std::size_t b = 0; b < dyad.blocks.size(); ++b) {
            const auto& block_plan = dyad.plan.blocks[b];
            const auto& records = dyad.blocks[b];
            std::vector<TrialRecord> window;
            if (records.size() >= 8) {
                window = performance_window(records);
            } else {
                for (const auto& r : records)
                    if (!r.meta.practice) window.push_back(r);
            }
            std::erase_if(window, [](const TrialRecord& r) { return !r.complete; });
            if (window.empty()) continue;
            for (Role role : {Role::PPS, Role::PCG}) {
                const auto s = summarize(window, role);
                rows.push_back({participant_id(dyad.plan.dyad_id, role), role, block_plan.number, block_plan.mode,
                                block_plan.pcg_device, static_cast<int>(window.size()), s.mean_score, s.sd_score,
                                s.mean_area_error, s.sd_area_error});
            }
        }
    }
    return rows;
}

std::vector<SurveyRow> survey_rows(const std::vector<DyadData>& study, const InstrumentSet& instruments) {
    std::vector<SurveyRow> rows;
    for (const auto& dyad : study) {
        for (const auto& s : dyad.surveys) {
            if (!s.position.starts_with("after_block")) continue;
            const int block = std::stoi(s.position.substr(11));
            if (block < 1 || block > static_cast<int>(dyad.plan.blocks.size())) continue;
            const auto& bp = dyad.plan.blocks[static_cast<std::size_t>(block - 1)];
            Role role;
            if (s.participant == participant_id(dyad.plan.dyad_id, Role::PPS)) role = Role::PPS;
            else if (s.participant == participant_id(dyad.plan.dyad_id, Role::PCG)) role = Role::PCG;
            else continue;
            SurveyRow base{s.participant, role, block, bp.mode, bp.pcg_device, "", 0.0};
            const SurveyResponse resp{s.instrument, s.item_scores};
            if (s.instrument == Instrument::PANAS) {
                const auto p = score_panas(resp, instruments.at(Instrument::PANAS));
                rows.push_back(base), rows.back().metric = "Positive", rows.back().value = p.positive;
                rows.push_back(base), rows.back().metric = "Negative", rows.back().value = p.negative;
            } else if (s.instrument == Instrument::IMI) {
                const auto m = score_imi(resp, instruments.at(Instrument::IMI));
                rows.push_back(base), rows.back().metric = "Tension", rows.back().value = m.tension;
                rows.push_back(base), rows.back().metric = "Interest", rows.back().value = m.interest;
                rows.push_back(base), rows.back().metric = "Competence", rows.back().value = m.competence;
            }
        }
    }
    return rows;
}

std::vector<std::pair<std::string, int>> ios_changes(const std::vector<DyadData>& study) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& dyad : study) {
        for (Role role : {Role::PPS, Role::PCG}) {
            const auto id = participant_id(dyad.plan.dyad_id, role);
            std::optional<int> pre, post;
            for (const auto& s : dyad.surveys) {
                if (s.participant != id || s.instrument != Instrument::IOS || s.item_scores.size() != 1) continue;
                if (s.position == "session_start") pre = s.item_scores[0];
                if (s.position == "session_end") post = s.item_scores[0];
            }
            if (pre && post) out.emplace_back(id, ios_change(*pre, *post));
        }
    }
    return out;
}

namespace {

// (participant, metric, mode, device) -> value
struct ConditionKey {
    std::string participant;
    std::string metric;
    Mode mode;
    Device device;
    auto operator<=>(const ConditionKey&) const = default;
};


class ConditionTable {
public:
    void add(const std::string& participant, Role role, const std::string& metric, Mode mode, Device device,
             double value) {
        values_[{participant, metric, mode, device}] = value;
        roles_[participant] = role;
    }

    std::optional<double> get(const std::string& participant, const std::string& metric, Mode mode,
                              std::optional<Device> device) const {
        double sum = 0.0;
        int n = 0;
        for (Device d : {Device::Pedal, Device::Keyboard}) {
            if (device && *device != d) continue;
            auto it = values_.find({participant, metric, mode, d});
            if (it == values_.end()) continue;
            sum += it->second;
            ++n;
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    }

    PairedSample pairs(Role role, const std::string& metric, Mode mode_a, std::optional<Device> dev_a, Mode mode_b,
                       std::optional<Device> dev_b) const {
        PairedSample s;
        for (const auto& [participant, r] : roles_) {
            if (r != role) continue;
            auto a = get(participant, metric, mode_a, dev_a);
            auto b = get(participant, metric, mode_b, dev_b);
            if (!a || !b) continue;
            s.labels.push_back(participant);
            s.a.push_back(*a);
            s.b.push_back(*b);
        }
        return s;
    }

private:
    std::map<ConditionKey, double> values_;
    std::map<std::string, Role> roles_;
};

std::string population(Role role, const char* suffix) {
    std::string s(to_string(role));
    if (*suffix) s += std::string(" (") + suffix + ")";
    return s;
}

}  // namespace

std::vector<ComparisonRow> compare(const std::vector<MetricsRow>& perf, const std::vector<SurveyRow>& surveys,
                                   double alpha) {
    ConditionTable table;
    for (const auto& r : perf) {
        table.add(r.participant, r.role, "Score", r.mode, r.device, r.mean_score);
        table.add(r.participant, r.role, "Area Error", r.mode, r.device, r.mean_area_error);
    }
    for (const auto& r : surveys) table.add(r.participant, r.role, r.metric, r.mode, r.device, r.value);

    std::vector<ComparisonRow> rows;
    auto run = [&](const char* tbl, Role role, const char* suffix, const char* groups, const std::string& metric,
                   Mode mode_a, std::optional<Device> dev_a, Mode mode_b, std::optional<Device> dev_b) {
        ComparisonRow row{tbl, population(role, suffix), groups, metric, std::nullopt, ""};
        const auto sample = table.pairs(role, metric, mode_a, dev_a, mode_b, dev_b);
        try {
            row.result = gated_compare(sample, alpha);
        } catch (const std::exception& e) {
            row.note = e.what();
        }
        rows.push_back(std::move(row));
    };
    auto mode_cmp = [&](const char* tbl, Role role, const char* suffix, const std::string& metric,
                        std::optional<Device> dev) {
        run(tbl, role, suffix, "Mode", metric, Mode::Collaborative, dev, Mode::Solo, dev);
    };
    auto device_cmp = [&](const char* tbl, Role role, Mode mode, const std::string& metric) {
        run(tbl, role, mode == Mode::Solo ? "S" : "C", "Devices", metric, mode, Device::Pedal, mode, Device::Keyboard);
    };

    // Performance
    mode_cmp("performance", Role::PCG, "", "Score", std::nullopt);
    mode_cmp("performance", Role::PCG, "", "Area Error", std::nullopt);
    device_cmp("performance", Role::PCG, Mode::Collaborative, "Score");
    device_cmp("performance", Role::PCG, Mode::Collaborative, "Area Error");
    device_cmp("performance", Role::PCG, Mode::Solo, "Score");
    device_cmp("performance", Role::PCG, Mode::Solo, "Area Error");
    mode_cmp("performance", Role::PPS, "", "Score", std::nullopt);
    mode_cmp("performance", Role::PPS, "", "Area Error", std::nullopt);

    // PANAS
    for (Role role : {Role::PCG, Role::PPS}) {
        for (const char* metric : {"Positive", "Negative"}) {
            device_cmp("panas", role, Mode::Solo, metric);
            device_cmp("panas", role, Mode::Collaborative, metric);
        }
    }

    // IMI
    for (Role role : {Role::PCG, Role::PPS}) {
        for (const char* metric : {"Tension", "Interest", "Competence"}) {
            device_cmp("imi", role, Mode::Solo, metric);
            device_cmp("imi", role, Mode::Collaborative, metric);
        }
        if (role == Role::PCG) mode_cmp("imi", Role::PCG, "P", "Competence", Device::Pedal);
    }
    return rows;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string test_display(const TestResult& r) {
    if (r.test == TestKind::PairedT) return "t(" + std::to_string(*r.df) + ") = " + fixed(r.statistic, 2);
    return "z = " + fixed(r.statistic, 2);
}

std::string p_display(double p) {
    const auto f = format_p(p);
    return f.starts_with("<") ? "p " + f : "p = " + f;
}

}  // namespace

std::string comparisons_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << "sample_population,groups_tested,metric,test,statistic,df,p,flag\n";
    for (const auto& r : rows) {
        out << csv_field(r.sample_population) << ',' << csv_field(r.groups_tested) << ',' << csv_field(r.metric) << ',';
        if (!r.result) {
            out << "NA,,,,\n";
            continue;
        }
        const auto& t = *r.result;
        out << (t.test == TestKind::PairedT ? "t" : "z") << ',' << fixed(t.statistic, 2) << ','
            << (t.df ? std::to_string(*t.df) : "") << ',' << csv_field(format_p(t.p_two_sided)) << ','
            << significance_flag(t.p_two_sided) << '\n';
    }
    return out.str();
}

std::string comparisons_text(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    std::string current;
    for (const auto& r : rows) {
        if (r.table != current) {
            current = r.table;
            out << "\n[" << current << "]\n";
            char head[128];
            std::snprintf(head, sizeof head, "%-18s %-14s %-11s %-16s %s\n", "Sample Population", "Groups Tested",
                          "Metric", "Test Statistic", "p-value");
            out << head;
        }
        char line[256];
        if (r.result) {
            std::snprintf(line, sizeof line, "%-18s %-14s %-11s %-16s %s%s\n", r.sample_population.c_str(),
                          r.groups_tested.c_str(), r.metric.c_str(), test_display(*r.result).c_str(),
                          p_display(r.result->p_two_sided).c_str(), significance_flag(r.result->p_two_sided).c_str());
        } else {
            std::snprintf(line, sizeof line, "%-18s %-14s %-11s %-16s (%s)\n", r.sample_population.c_str(),
                          r.groups_tested.c_str(), r.metric.c_str(), "n/a", r.note.c_str());
        }
        out << line;
    }
    return out.str();
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "participant,block,mode,device,mean_score,sd_score,mean_area_error,sd_area_error\n";
    for (const auto& r : rows) {
        out << csv_field(r.participant) << ',' << r.block << ',' << to_string(r.mode) << ',' << to_string(r.device)
            << ',' << fixed(r.mean_score, 4) << ',' << fixed(r.sd_score, 4) << ',' << fixed(r.mean_area_error, 4) << ','
            << fixed(r.sd_area_error, 4) << '\n';
    }
    return out.str();
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw InputError("quantile of empty data");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string descriptives_csv(const std::vector<SurveyRow>& rows) {
    struct Key {
        Role role;
        Mode mode;
        Device device;
        std::string metric;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::vector<double>> groups;
    for (const auto& r : rows) groups[{r.role, r.mode, r.device, r.metric}].push_back(r.value);
    std::ostringstream out;
    out << "role,mode,device,metric,n,median,iqr,mean,sd\n";
    for (const auto& [k, v] : groups) {
        out << to_string(k.role) << ',' << to_string(k.mode) << ',' << to_string(k.device) << ',' << k.metric << ','
            << v.size() << ',' << fixed(quantile(v, 0.5), 3) << ',' << fixed(quantile(v, 0.75) - quantile(v, 0.25), 3)
            << ',' << fixed(mean(v), 3) << ',' << fixed(sample_sd(v), 3) << '\n';
    }
    return out.str();
}

}  // namespace dyad
