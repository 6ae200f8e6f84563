// Command-line front end: policy runs, ground-truth oracles, strategy
// comparison, estimator evaluation, and the mock camera server.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "elixir/camproto.hpp"
#include "elixir/errors.hpp"
#include "elixir/estimators.hpp"
#include "elixir/harness.hpp"
#include "elixir/kernels.hpp"
#include "elixir/oracle.hpp"
#include "elixir/scenario_io.hpp"

using namespace elixir;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

struct ScenarioOpts {
    std::string preset;
    std::string file;

    ScenarioConfig load() const {
        if (!preset.empty() && !file.empty())
            throw ConfigError("--preset and --scenario are mutually exclusive");
        if (!preset.empty()) return scenario_preset(preset);
        if (!file.empty()) return load_scenario(file);
        throw ConfigError("need --preset or --scenario");
    }
};

void add_scenario_opts(CLI::App* cmd, ScenarioOpts& opts) {
    cmd->add_option("--preset", opts.preset,
                    "built-in scenario preset (demo3d, twoau, daynight)");
    cmd->add_option("--scenario", opts.file, "scenario file path");
}

void apply_kernel_choice(const std::string& choice) {
    if (choice == "auto" || choice.empty()) return;
    if (choice == "scalar") kernels::set_backend(kernels::Backend::Scalar);
    else if (choice == "avx2") kernels::set_backend(kernels::Backend::Avx2);
    else throw ConfigError("unknown kernel backend '" + choice + "'");
}

json oracle_result_json(const OracleResult& r) {
    json j;
    j["best_settings"] = to_string(r.best_settings);
    j["primary_score"] = r.primary_score;
    j["secondary_score"] = r.secondary_score;
    j["evaluations"] = r.evaluations;
    return j;
}

void emit_json(const json& j, const std::string& path) {
    if (path.empty()) return;
    if (path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

AggregationStrategy strategy_for(const std::string& name,
                                 const ScenarioConfig& sc) {
    AggregationStrategy s;
    s.kind = parse_strategy(name);
    if (s.kind == StrategyKind::Weighted)
        for (const auto& au : sc.au_profiles) s.weights.push_back(au.priority);
    return s;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunOpts {
    ScenarioOpts scenario;
    std::string policy = "elixir";
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::int64_t explore = 0;
    std::int64_t slot_steps = 20;
    std::string strategy = "winner-takes-all";
    std::string reward_mode = "delta";
    std::string detection = "expected";
    double gamma = 0.9;
    int step = 10;
    int bins = 5;
    std::string save_qtables;
    std::string load_qtables;
};

int cmd_run(const RunOpts& o) {
    const auto sc = o.scenario.load();
    PolicyKind policy;
    if (o.policy == "default") policy.type = PolicyType::Default;
    else if (o.policy == "timesharing") policy.type = PolicyType::TimeSharing;
    else if (o.policy == "elixir") policy.type = PolicyType::Elixir;
    else throw ConfigError("unknown policy '" + o.policy + "'");
    policy.slot_steps = o.slot_steps;
    policy.agent.explore_episodes = o.explore;
    policy.agent.gamma = o.gamma;
    policy.agent.step = o.step;
    policy.agent.bins = o.bins;
    policy.agent.reward_mode = parse_reward_mode(o.reward_mode);
    policy.agent.strategy = strategy_for(o.strategy, sc);

    const DetectionMode mode = o.detection == "binomial" ? DetectionMode::Binomial
                                                         : DetectionMode::Expected;

    QTableSet bootstrap, final_tables;
    const bool want_tables = !o.save_qtables.empty();
    const QTableSet* boot_ptr = nullptr;
    if (!o.load_qtables.empty()) {
        bootstrap = load_tables(o.load_qtables);
        boot_ptr = &bootstrap;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = run_policy(policy, sc, o.seed, mode, boot_ptr,
                                 want_tables ? &final_tables : nullptr);
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

    std::filesystem::create_directories(o.out_dir);
    const auto trace_path =
        std::filesystem::path(o.out_dir) / ("trace_" + o.policy + ".csv");
    {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + trace_path.string() + "'");
        write_trace_csv(out, rows, sc.au_names());
    }

    std::map<std::string, std::vector<TraceRow>> traces{{o.policy, rows}};
    auto report = summarize(traces, sc.au_names());
    report.policies.front().wall_ms = wall_ms;
    const auto summary_path =
        std::filesystem::path(o.out_dir) / ("summary_" + o.policy + ".json");
    {
        std::ofstream out(summary_path, std::ios::binary);
        out << report.to_json() << "\n";
    }
    if (want_tables) save_tables(final_tables, o.save_qtables);

    std::cout << "policy " << o.policy << " over scenario '" << sc.name << "': "
              << rows.size() << " steps, "
              << report.policies.front().total_detections
              << " detections, " << wall_ms << " ms\n"
              << "trace:   " << trace_path.string() << "\n"
              << "summary: " << summary_path.string() << "\n";
    if (want_tables) std::cout << "qtables: " << o.save_qtables << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

struct OracleOpts {
    ScenarioOpts scenario;
    std::string phase;
    std::string au;
    std::string strategy = "linear";
    std::string json_path;
    int grid_step = 10;
    int threads = 0;
};

const PhaseSpec& pick_phase(const ScenarioConfig& sc, const std::string& name) {
    if (name.empty()) return sc.phases.front();
    for (const auto& ph : sc.phases)
        if (ph.name == name) return ph;
    throw ConfigError("scenario has no phase '" + name + "'");
}

int cmd_oracle_find_best(const OracleOpts& o) {
    const auto sc = o.scenario.load();
    const auto& phase = pick_phase(sc, o.phase);
    const auto grid = enumerate_grid(o.grid_step);
    json out = json::array();
    std::printf("%-6s %-22s %10s %10s %12s\n", "AU", "best setting", "score",
                "secondary", "evaluations");
    for (const auto& au : sc.au_profiles) {
        if (!o.au.empty() && au.name != o.au) continue;
        const auto r = find_best_conf(au, phase, grid, o.threads);
        std::printf("%-6s %-22s %10.2f %10.2f %12lld\n", au.name.c_str(),
                    to_string(r.best_settings).c_str(), r.primary_score,
                    r.secondary_score, static_cast<long long>(r.evaluations));
        json j = oracle_result_json(r);
        j["au"] = au.name;
        j["phase"] = phase.name;
        out.push_back(std::move(j));
    }
    if (out.empty()) throw ConfigError("no AU matched '" + o.au + "'");
    emit_json(out, o.json_path);
    return 0;
}

int cmd_oracle_conflict(const OracleOpts& o) {
    const auto sc = o.scenario.load();
    const auto& phase = pick_phase(sc, o.phase);
    const auto grid = enumerate_grid(o.grid_step);
    const auto m = conflict_matrix(sc.au_profiles, phase, grid, o.threads);

    std::printf("%-28s", "Optimal camera setting");
    for (const auto& au : m.au_names) std::printf(" %9s", au.c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < m.au_names.size(); ++i) {
        const auto best =
            find_best_conf(sc.au_profiles[i], phase, grid, o.threads).best_settings;
        const std::string label = m.au_names[i] + " " + to_string(best);
        std::printf("%-28s", label.c_str());
        for (std::size_t j = 0; j < m.au_names.size(); ++j)
            std::printf(" %9.2f", m.entries[i][j]);
        std::printf("\n");
    }

    json j;
    j["phase"] = phase.name;
    j["au_names"] = m.au_names;
    j["entries"] = m.entries;
    emit_json(j, o.json_path);
    return 0;
}

int cmd_oracle_common(const OracleOpts& o) {
    const auto sc = o.scenario.load();
    const auto& phase = pick_phase(sc, o.phase);
    const auto grid = enumerate_grid(o.grid_step);
    const auto strat = strategy_for(o.strategy, sc);
    const auto r = common_optimal(sc.au_profiles, phase, grid, strat, o.threads);
    std::printf("common-optimal (%s, phase %s): %s aggregate %.3f (%lld evaluations)\n",
                strategy_name(strat.kind), phase.name.c_str(),
                to_string(r.best_settings).c_str(), r.primary_score,
                static_cast<long long>(r.evaluations));
    std::printf("%-6s %12s %14s\n", "AU", "at common", "at own best");
    for (const auto& au : sc.au_profiles) {
        const auto own = find_best_conf(au, phase, grid, o.threads);
        std::printf("%-6s %12.2f %14.2f\n", au.name.c_str(),
                    true_accuracy(au, r.best_settings, phase), own.primary_score);
    }
    json j = oracle_result_json(r);
    j["phase"] = phase.name;
    j["strategy"] = strategy_name(strat.kind);
    emit_json(j, o.json_path);
    return 0;
}

// ---------------------------------------------------------------------------
// strategies
// ---------------------------------------------------------------------------

struct StrategiesOpts {
    ScenarioOpts scenario;
    std::vector<std::uint64_t> seeds{1};
    std::int64_t explore = 0;
    std::string detection = "expected";
    std::string json_path;
};

int cmd_strategies(const StrategiesOpts& o) {
    const auto sc = o.scenario.load();
    AgentConfig base;
    base.explore_episodes = o.explore;
    const DetectionMode mode = o.detection == "binomial" ? DetectionMode::Binomial
                                                         : DetectionMode::Expected;
    const auto cmp = compare_strategies(sc, o.seeds, base, mode);
    std::printf("%-18s %18s %22s\n", "strategy", "mean exploit qual",
                "mean exploit detections");
    for (const auto& r : cmp.ranked)
        std::printf("%-18s %18.3f %22.1f\n", strategy_name(r.strategy),
                    r.mean_exploit_quality, r.mean_exploit_detections);
    if (!o.json_path.empty()) {
        if (o.json_path == "-") std::cout << cmp.to_json() << "\n";
        else {
            std::ofstream out(o.json_path);
            if (!out) throw IoError("cannot write '" + o.json_path + "'");
            out << cmp.to_json() << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// estimator-eval
// ---------------------------------------------------------------------------

struct EstimatorOpts {
    ScenarioOpts scenario;
    std::string phase;
    double noise = 5.0;
    std::int64_t samples = 2000;
    std::uint64_t seed = 1;
    int grid_step = 10;
    std::string json_path;
};

int cmd_estimator_eval(const EstimatorOpts& o) {
    const auto sc = o.scenario.load();
    const auto& phase = pick_phase(sc, o.phase);
    if (o.samples < 2) throw ConfigError("need at least 2 samples");
    const auto grid = enumerate_grid(o.grid_step);
    json out = json::array();
    std::printf("%-6s %10s %10s %8s\n", "AU", "pearson", "spearman", "n");
    for (const auto& au : sc.au_profiles) {
        Rng settings_rng(Rng::derive(o.seed, "eval-settings:" + au.name));
        Rng noise_rng(Rng::derive(o.seed, "eval-noise:" + au.name));
        std::vector<std::pair<double, double>> pairs;
        pairs.reserve(static_cast<std::size_t>(o.samples));
        const Frame no_frame;
        for (std::int64_t k = 0; k < o.samples; ++k) {
            const auto& s = grid.values[settings_rng.uniform_int(
                static_cast<std::uint32_t>(grid.values.size()))];
            const double truth = true_accuracy(au, s, phase);
            const double est =
                estimate(au, no_frame, s, phase, o.noise, noise_rng).score;
            pairs.emplace_back(truth, est);
        }
        const auto rep = correlation(pairs);
        std::printf("%-6s %10.4f %10.4f %8zu\n", au.name.c_str(), rep.pearson,
                    rep.spearman, rep.sample_count);
        json j;
        j["au"] = au.name;
        j["pearson"] = rep.pearson;
        j["spearman"] = rep.spearman;
        j["n"] = rep.sample_count;
        out.push_back(std::move(j));
    }
    emit_json(out, o.json_path);
    return 0;
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

struct ServeOpts {
    ScenarioOpts scenario;
    std::string host = "127.0.0.1";
    int port = 0;
    bool wall_clock = false;
    double run_seconds = 0.0; // 0: until SIGINT
    std::string latency_file;
    LatencyModel latency;
};

LatencyModel load_latency_file(const std::string& path, LatencyModel base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open latency file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("latency file line " + std::to_string(lineno) +
                             ": expected key=value");
        const std::string key = line.substr(0, eq);
        const double value = std::stod(line.substr(eq + 1));
        if (key == "set_params_ms") base.set_params_ms = value;
        else if (key == "frame_upload_ms") base.frame_upload_ms = value;
        else if (key == "estimator_ms") base.estimator_ms = value;
        else if (key == "aggregate_ms") base.aggregate_ms = value;
        else throw ParseError("unknown latency key '" + key + "'");
    }
    return base;
}

int cmd_serve(const ServeOpts& o) {
    auto sc = o.scenario.load();
    LatencyModel latency = o.latency;
    if (!o.latency_file.empty()) latency = load_latency_file(o.latency_file, latency);
    VirtualCamera camera(sc, latency,
                         o.wall_clock ? ClockMode::Wall : ClockMode::Virtual);
    CameraServer server(camera);
    const int port = server.start(o.host, o.port);
    std::cout << "camera control plane on " << o.host << ":" << port << " ("
              << (o.wall_clock ? "wall" : "virtual") << " clock, scenario '"
              << sc.name << "')\n"
              << std::flush;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto t0 = std::chrono::steady_clock::now();
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        if (o.run_seconds > 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count() >= o.run_seconds)
            break;
    }
    server.stop();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-AU camera tuning testbed"};
    app.require_subcommand(1);

    std::string kernel_choice = "auto";
    app.add_option("--kernels", kernel_choice,
                   "pixel kernel backend: auto, scalar, avx2");

    RunOpts run_opts;
    auto* run_cmd = app.add_subcommand("run", "run a policy over a scenario");
    add_scenario_opts(run_cmd, run_opts.scenario);
    run_cmd->add_option("--policy", run_opts.policy,
                        "default, timesharing or elixir");
    run_cmd->add_option("--out", run_opts.out_dir, "output directory");
    run_cmd->add_option("--seed", run_opts.seed, "run seed");
    run_cmd->add_option("--explore", run_opts.explore, "exploration steps (K)");
    run_cmd->add_option("--slot-steps", run_opts.slot_steps,
                        "time-sharing slot length");
    run_cmd->add_option("--strategy", run_opts.strategy,
                        "linear, weighted or winner-takes-all");
    run_cmd->add_option("--reward-mode", run_opts.reward_mode, "delta or raw");
    run_cmd->add_option("--detection", run_opts.detection,
                        "expected or binomial");
    run_cmd->add_option("--gamma", run_opts.gamma, "discount factor");
    run_cmd->add_option("--step", run_opts.step, "action stride");
    run_cmd->add_option("--bins", run_opts.bins, "measurement bins");
    run_cmd->add_option("--save-qtables", run_opts.save_qtables,
                        "write learned Q-tables here (elixir only)");
    run_cmd->add_option("--load-qtables", run_opts.load_qtables,
                        "bootstrap the agent from persisted Q-tables");

    OracleOpts oracle_opts;
    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force ground truth");
    oracle_cmd->require_subcommand(1);
    auto* fb = oracle_cmd->add_subcommand("find-best", "per-AU optimal settings");
    auto* cf = oracle_cmd->add_subcommand("conflict", "cross-AU conflict matrix");
    auto* co = oracle_cmd->add_subcommand("common", "common-optimal settings");
    for (auto* cmd : {fb, cf, co}) {
        add_scenario_opts(cmd, oracle_opts.scenario);
        cmd->add_option("--phase", oracle_opts.phase, "phase name (default: first)");
        cmd->add_option("--grid-step", oracle_opts.grid_step, "grid stride");
        cmd->add_option("--threads", oracle_opts.threads, "sweep threads (0: auto)");
        cmd->add_option("--json", oracle_opts.json_path,
                        "write JSON here ('-' for stdout)");
    }
    fb->add_option("--au", oracle_opts.au, "restrict to one AU");
    co->add_option("--strategy", oracle_opts.strategy,
                   "linear, weighted or winner-takes-all");

    StrategiesOpts strat_opts;
    auto* strat_cmd =
        app.add_subcommand("strategies", "compare the aggregation strategies");
    add_scenario_opts(strat_cmd, strat_opts.scenario);
    strat_cmd->add_option("--seeds", strat_opts.seeds, "run seeds");
    strat_cmd->add_option("--explore", strat_opts.explore, "exploration steps (K)");
    strat_cmd->add_option("--detection", strat_opts.detection,
                          "expected or binomial");
    strat_cmd->add_option("--json", strat_opts.json_path,
                          "write JSON here ('-' for stdout)");

    EstimatorOpts est_opts;
    auto* est_cmd = app.add_subcommand(
        "estimator-eval", "correlate noisy estimates with ground truth");
    add_scenario_opts(est_cmd, est_opts.scenario);
    est_cmd->add_option("--phase", est_opts.phase, "phase name (default: first)");
    est_cmd->add_option("--noise", est_opts.noise, "estimator noise sigma");
    est_cmd->add_option("--samples", est_opts.samples, "settings samples per AU");
    est_cmd->add_option("--seed", est_opts.seed, "sampling seed");
    est_cmd->add_option("--grid-step", est_opts.grid_step, "grid stride");
    est_cmd->add_option("--json", est_opts.json_path,
                        "write JSON here ('-' for stdout)");

    ServeOpts serve_opts;
    auto* serve_cmd =
        app.add_subcommand("serve", "run the mock camera control plane (TCP)");
    add_scenario_opts(serve_cmd, serve_opts.scenario);
    serve_cmd->add_option("--host", serve_opts.host, "listen address");
    serve_cmd->add_option("--port", serve_opts.port, "listen port (0: ephemeral)");
    serve_cmd->add_flag("--wall-clock", serve_opts.wall_clock,
                        "real time instead of the virtual clock");
    serve_cmd->add_option("--run-seconds", serve_opts.run_seconds,
                          "stop after this many seconds (0: until SIGINT)");
    serve_cmd->add_option("--latency-file", serve_opts.latency_file,
                          "key=value latency overrides");
    serve_cmd->add_option("--set-params-ms", serve_opts.latency.set_params_ms,
                          "settings apply latency");
    serve_cmd->add_option("--frame-upload-ms", serve_opts.latency.frame_upload_ms,
                          "frame upload latency");
    serve_cmd->add_option("--estimator-ms", serve_opts.latency.estimator_ms,
                          "estimator latency");
    serve_cmd->add_option("--aggregate-ms", serve_opts.latency.aggregate_ms,
                          "aggregation latency");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_kernel_choice(kernel_choice);
        if (*run_cmd) return cmd_run(run_opts);
        if (*fb) return cmd_oracle_find_best(oracle_opts);
        if (*cf) return cmd_oracle_conflict(oracle_opts);
        if (*co) return cmd_oracle_common(oracle_opts);
        if (*strat_cmd) return cmd_strategies(strat_opts);
        if (*est_cmd) return cmd_estimator_eval(est_opts);
        if (*serve_cmd) return cmd_serve(serve_opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
