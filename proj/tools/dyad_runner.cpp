// dyad-runner: plan, simulate, serve, replay and analyze two-player sessions.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dyad/agents.hpp"
#include "dyad/record_io.hpp"
#include "dyad/report.hpp"
#include "dyad/server.hpp"
#include "dyad/session.hpp"

namespace fs = std::filesystem;
using namespace dyad;

namespace {

GameConfig config_or_default(const std::string& path) { return path.empty() ? GameConfig{} : load_config(path); }

InstrumentSet instruments_or_default(const std::string& path) {
    return path.empty() ? default_instruments() : load_instruments(path);
}

std::optional<Device> first_device_arg(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const Device d = device_from_string(text);
    if (d != Device::Pedal && d != Device::Keyboard) throw InputError("first device must be pedal or keyboard");
    return d;
}

std::set<int> parse_blocks(const std::string& text) {
    std::set<int> out;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        const auto dash = part.find('-');
        try {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = dash == std::string::npos ? lo : std::stoi(part.substr(dash + 1));
            for (int b = lo; b <= hi; ++b) out.insert(b);
        } catch (const std::logic_error&) {
            throw InputError("bad block list '" + text + "'");
        }
    }
    for (int b : out)
        if (b < 1 || b > 4) throw InputError("blocks are numbered 1 to 4");
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    write_text(path, text);
    std::fprintf(stderr, "wrote %s\n", path.c_str());
}

int cmd_plan(const std::string& dyad, const std::string& first, std::uint64_t seed, const std::string& out) {
    const auto plan = build_plan(dyad, first_device_arg(first), seed);
    const auto text = plan_to_json(plan).dump(2) + "\n";
    if (out.empty()) std::cout << text;
    else write_file(out, text);
    return 0;
}

int cmd_simulate(const std::string& agents, const std::string& blocks, std::uint64_t seed, int dyads,
                 const std::string& out, const std::string& config_path, const std::string& first,
                 const std::string& prefix) {
    const auto config = config_or_default(config_path);
    const auto comma = agents.find(',');
    const AgentSpec pps = parse_agent(agents.substr(0, comma));
    const AgentSpec pcg = parse_agent(comma == std::string::npos ? agents : agents.substr(comma + 1));
    const std::optional<std::set<int>> only = blocks.empty() ? std::nullopt : std::optional(parse_blocks(blocks));
    if (dyads < 1) throw InputError("--dyads must be at least 1");

    for (int i = 1; i <= dyads; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%s%02d", prefix.c_str(), i);
        const auto plan = build_plan(id, first_device_arg(first), seed);
        auto answer = random_answerer(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const auto result = run_session(plan, agent_factory(pps, pcg, config), answer, config,
                                        out.empty() ? std::nullopt : std::optional<fs::path>(out),
                                        default_instruments(), only);
        int trials = 0, incomplete = 0;
        for (const auto& b : result.blocks) {
            for (const auto& r : b) {
                ++trials;
                if (!r.complete) ++incomplete;
            }
        }
        std::printf("%s: first device %s, %d trials (%d incomplete), %zu survey responses\n", id,
                    std::string(to_string(plan.first_device)).c_str(), trials, incomplete, result.surveys.size());
    }
    return 0;
}

int cmd_serve(const std::string& plan_path_arg, const std::string& config_path, const std::string& bind,
              const std::string& out, bool lockstep, int decimation, const std::string& instruments) {
    const auto plan = load_plan(plan_path_arg);
    const auto config = config_or_default(config_path);
    ServerOptions options;
    if (!bind.empty()) options.bind = bind;
    if (!out.empty()) options.out_dir = out;
    apply_env_overrides(options);
    options.pacing = lockstep ? Pacing::Lockstep : Pacing::Realtime;
    options.state_decimation = decimation;
    options.instruments = instruments_or_default(instruments);
    options.on_listening = [&](unsigned short port) {
        std::fprintf(stderr, "serving dyad %s on port %u, writing to %s\n", plan.dyad_id.c_str(), port,
                     options.out_dir.c_str());
    };
    const int status = serve_session(plan, config, options);
    std::fprintf(stderr, status == kServeComplete ? "session complete\n" : "session aborted; rerun to resume\n");
    return status;
}

int cmd_replay(const std::string& trial, const std::string& config_path) {
    std::string cfg = config_path;
    if (cfg.empty()) {
        const auto guess = fs::path(trial).parent_path().parent_path() / "config.json";
        if (fs::exists(guess)) cfg = guess.string();
    }
    const auto config = config_or_default(cfg);
    const auto logged = load_trial(trial);
    const auto replayed = replay_trial(logged, config);
    const bool same = trial_to_jsonl(replayed) == read_text(trial);
    std::printf("trial block %d index %d: %s, scores", logged.meta.block, logged.meta.index,
                replayed.complete ? "complete" : "incomplete");
    for (int s : replayed.final_scores) std::printf(" %d", s);
    std::printf("\nreplay %s the log\n", same ? "reproduces" : "DIFFERS FROM");
    return same ? 0 : 1;
}

int cmd_analyze(const std::string& in, const std::string& report, const std::string& metrics,
                const std::string& descriptives, const std::string& instruments, double alpha) {
    const auto study = load_study(in);
    const auto inst = instruments_or_default(instruments);
    const auto perf = performance_rows(study);
    const auto surveys = survey_rows(study, inst);
    const auto rows = compare(perf, surveys, alpha);
    std::cout << comparisons_text(rows);
    const auto ios = ios_changes(study);
    if (!ios.empty()) {
        std::cout << "\n[ios]\n";
        for (const auto& [participant, change] : ios) std::cout << participant << " " << change << "\n";
    }
    write_file(report, comparisons_csv(rows));
    write_file(metrics, metrics_csv(perf));
    write_file(descriptives, descriptives_csv(surveys));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-player balloon-collection game: sessions, agents, server and analysis"};
    app.require_subcommand(1);

    auto* plan = app.add_subcommand("plan", "Print the session plan for a dyad");
    std::string plan_dyad, plan_first, plan_out;
    std::uint64_t plan_seed = 1;
    plan->add_option("--dyad", plan_dyad, "Dyad id")->required();
    plan->add_option("--first-device", plan_first, "pedal or keyboard (seeded when omitted)");
    plan->add_option("--seed", plan_seed, "Master seed");
    plan->add_option("--out", plan_out, "Write the plan here instead of stdout");

    auto* sim = app.add_subcommand("simulate", "Run headless sessions with synthetic agents");
    std::string sim_agents = "perfect,perfect", sim_blocks, sim_out, sim_config, sim_first, sim_prefix = "D";
    std::uint64_t sim_seed = 1;
    int sim_dyads = 1;
    sim->add_option("--agents", sim_agents, "PPS and PCG agents, e.g. perfect,lagged:0.5");
    sim->add_option("--blocks", sim_blocks, "Blocks to run, e.g. 1-4 or 1,3 (default all)");
    sim->add_option("--seed", sim_seed, "Master seed");
    sim->add_option("--dyads", sim_dyads, "Number of dyads");
    sim->add_option("--out", sim_out, "Output directory");
    sim->add_option("--config", sim_config, "Game config JSON");
    sim->add_option("--first-device", sim_first, "pedal or keyboard (seeded when omitted)");
    sim->add_option("--prefix", sim_prefix, "Dyad id prefix");

    auto* serve = app.add_subcommand("serve", "Host a live session over websocket");
    std::string serve_plan, serve_config, serve_bind, serve_out, serve_instruments;
    bool serve_lockstep = false;
    int serve_decimation = 3;
    serve->add_option("--plan", serve_plan, "Session plan JSON")->required();
    serve->add_option("--config", serve_config, "Game config JSON");
    serve->add_option("--bind", serve_bind, "host:port (env DYAD_BIND overrides)");
    serve->add_option("--out", serve_out, "Output directory (env DYAD_OUT overrides)");
    serve->add_flag("--lockstep", serve_lockstep, "Advance a tick only once both clients sent input for it");
    serve->add_option("--decimation", serve_decimation, "Send state every n-th tick");
    serve->add_option("--instruments", serve_instruments, "Questionnaire definitions JSON");

    auto* replay = app.add_subcommand("replay", "Rerun a logged trial and compare with its log");
    std::string replay_trial_path, replay_config;
    replay->add_option("--trial", replay_trial_path, "Trial JSONL")->required();
    replay->add_option("--config", replay_config, "Game config JSON (default: the session's config.json)");

    auto* analyze = app.add_subcommand("analyze", "Compute metrics and paired comparisons");
    std::string an_in, an_report, an_metrics, an_desc, an_instruments;
    double an_alpha = 0.05;
    analyze->add_option("--in", an_in, "Dyad or study directory")->required();
    analyze->add_option("--report", an_report, "Comparison table CSV");
    analyze->add_option("--metrics", an_metrics, "Per-participant block metrics CSV");
    analyze->add_option("--descriptives", an_desc, "Questionnaire descriptives CSV");
    analyze->add_option("--instruments", an_instruments, "Questionnaire definitions JSON");
    analyze->add_option("--alpha", an_alpha, "Normality gate level");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*plan) return cmd_plan(plan_dyad, plan_first, plan_seed, plan_out);
        if (*sim)
            return cmd_simulate(sim_agents, sim_blocks, sim_seed, sim_dyads, sim_out, sim_config, sim_first,
                                sim_prefix);
        if (*serve)
            return cmd_serve(serve_plan, serve_config, serve_bind, serve_out, serve_lockstep, serve_decimation,
                             serve_instruments);
        if (*replay) return cmd_replay(replay_trial_path, replay_config);
        if (*analyze) return cmd_analyze(an_in, an_report, an_metrics, an_desc, an_instruments, an_alpha);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
