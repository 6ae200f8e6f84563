#include "elixir/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "elixir/errors.hpp"

namespace elixir {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(std::string("bad ") + what + " value '" + tok + "'");
    return v;
}

std::int64_t parse_int(const std::string& tok, const char* what) {
    std::int64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(std::string("bad ") + what + " value '" + tok + "'");
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

SimEnv::SimEnv(ScenarioConfig scenario, std::uint64_t run_seed)
    : scenario_(std::move(scenario)) {
    scenario_.validate();
    names_ = scenario_.au_names();
    au_rngs_.reserve(names_.size());
    for (const auto& name : names_)
        au_rngs_.emplace_back(Rng::derive(run_seed, "est:" + name));
}

Observation SimEnv::observe() {
    const int pidx = scenario_.phase_index_at(t_);
    const PhaseSpec& phase = scenario_.phases[static_cast<std::size_t>(pidx)];
    const Frame captured = capture(latent_.at(scenario_, pidx), settings_);

    Observation obs;
    obs.t = t_;
    obs.phase_index = pidx;
    obs.phase = phase.name;
    obs.applied = settings_;
    obs.measurements = measure(captured);
    obs.estimates.reserve(names_.size());
    obs.true_quality.reserve(names_.size());
    for (std::size_t i = 0; i < scenario_.au_profiles.size(); ++i) {
        const auto& au = scenario_.au_profiles[i];
        obs.true_quality.push_back(true_accuracy(au, settings_, phase));
        obs.estimates.push_back(estimate(au, captured, settings_, phase,
                                         scenario_.estimator_noise_sigma,
                                         au_rngs_[i])
                                    .score);
    }
    obs.object_counts = scenario_.object_counts[static_cast<std::size_t>(pidx)];
    return obs;
}

Observation SimEnv::reset() {
    t_ = 0;
    settings_ = CameraSettings{};
    return observe();
}

Observation SimEnv::step(const CameraSettings& settings) {
    settings_ = settings;
    ++t_;
    return observe();
}

SingleAuView::SingleAuView(ControlEnv& inner, std::size_t au_index)
    : inner_(inner), index_(au_index) {
    if (au_index >= inner.au_names().size())
        throw ConfigError("AU index out of range");
    names_ = {inner.au_names()[au_index]};
}

Observation SingleAuView::select_au(const Observation& full, std::size_t i) {
    Observation o = full;
    o.estimates = {full.estimates.at(i)};
    o.true_quality = {full.true_quality.at(i)};
    o.object_counts = {full.object_counts.at(i)};
    return o;
}

Observation SingleAuView::reset() {
    full_ = inner_.reset();
    return select_au(full_, index_);
}

Observation SingleAuView::step(const CameraSettings& settings) {
    full_ = inner_.step(settings);
    return select_au(full_, index_);
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

const char* policy_type_name(PolicyType t) {
    switch (t) {
        case PolicyType::Default: return "default";
        case PolicyType::TimeSharing: return "timesharing";
        case PolicyType::Elixir: return "elixir";
    }
    return "?";
}

std::size_t timesharing_active_au(std::int64_t step, std::int64_t slot_steps,
                                  std::size_t au_count) {
    if (slot_steps < 1) throw ConfigError("slot_steps must be >= 1");
    if (au_count == 0) throw ConfigError("need at least one AU");
    return static_cast<std::size_t>((step / slot_steps) %
                                    static_cast<std::int64_t>(au_count));
}

namespace {

std::vector<std::int64_t> detection_proxies(const Observation& obs,
                                            DetectionMode mode,
                                            std::vector<Rng>& det_rngs) {
    std::vector<std::int64_t> counts(obs.true_quality.size(), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double p = obs.true_quality[i] / 100.0;
        const std::int64_t n = obs.object_counts[i];
        if (mode == DetectionMode::Expected) {
            counts[i] = std::llround(static_cast<double>(n) * p);
        } else {
            std::int64_t hits = 0;
            for (std::int64_t k = 0; k < n; ++k)
                if (det_rngs[i].uniform() < p) ++hits;
            counts[i] = hits;
        }
    }
    return counts;
}

TraceRow make_row(std::int64_t t, const std::string& policy,
                  const Observation& obs, Action action, DetectionMode mode,
                  std::vector<Rng>& det_rngs) {
    TraceRow row;
    row.t = t;
    row.policy = policy;
    row.phase = obs.phase;
    row.settings = obs.applied;
    row.measurements = obs.measurements;
    row.quality = obs.true_quality;
    row.detections = detection_proxies(obs, mode, det_rngs);
    row.action = action;
    return row;
}

} // namespace

std::vector<TraceRow> run_policy(const PolicyKind& policy,
                                 const ScenarioConfig& scenario,
                                 std::uint64_t seed, DetectionMode mode,
                                 const QTableSet* bootstrap,
                                 QTableSet* final_tables) {
    scenario.validate();
    if ((bootstrap || final_tables) && policy.type != PolicyType::Elixir)
        throw ConfigError("Q-table bootstrap/save is only defined for the elixir policy");
    const std::int64_t total = scenario.total_steps();
    const std::string name = policy_type_name(policy.type);

    SimEnv env(scenario, seed);
    std::vector<Rng> det_rngs;
    for (const auto& au : env.au_names())
        det_rngs.emplace_back(Rng::derive(seed, "det:" + au));

    std::vector<TraceRow> rows;
    rows.reserve(static_cast<std::size_t>(total));

    switch (policy.type) {
        case PolicyType::Default: {
            env.reset();
            for (std::int64_t t = 1; t <= total; ++t) {
                const Observation obs = env.step(CameraSettings{});
                rows.push_back(make_row(t, name, obs, Action::NoChange, mode, det_rngs));
            }
            break;
        }
        case PolicyType::Elixir: {
            MorlAgent agent(env.au_names(), policy.agent, Rng::derive(seed, "elixir"));
            if (bootstrap) agent.adopt_tables(*bootstrap);
            agent.sync(env.reset());
            const std::int64_t explore = policy.agent.explore_episodes;
            for (std::int64_t t = 1; t <= total; ++t) {
                const auto rec = agent.step(env, t <= explore);
                rows.push_back(make_row(t, name, rec.obs, rec.action, mode, det_rngs));
            }
            if (final_tables) *final_tables = agent.tables();
            break;
        }
        case PolicyType::TimeSharing: {
            if (policy.slot_steps < 1)
                throw ConfigError("time-sharing slot_steps must be >= 1");
            const std::size_t n = env.au_names().size();
            // one persistent single-objective tuner per AU, warm across slots
            AgentConfig per_au = policy.agent;
            per_au.strategy = AggregationStrategy{StrategyKind::Linear, {}};
            std::vector<MorlAgent> agents;
            std::vector<SingleAuView> views;
            agents.reserve(n);
            views.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                agents.emplace_back(
                    std::vector<std::string>{env.au_names()[i]}, per_au,
                    Rng::derive(seed, "ts:" + env.au_names()[i]));
                views.emplace_back(env, i);
            }
            std::vector<std::int64_t> own_steps(n, 0);
            Observation full = env.reset();
            for (std::int64_t t = 1; t <= total; ++t) {
                const std::size_t au =
                    timesharing_active_au(t - 1, policy.slot_steps, n);
                if ((t - 1) % policy.slot_steps == 0)
                    agents[au].sync(SingleAuView::select_au(full, au));
                const bool explore = own_steps[au] < policy.agent.explore_episodes;
                const auto rec = agents[au].step(views[au], explore);
                ++own_steps[au];
                full = views[au].last_full();
                rows.push_back(make_row(t, name, full, rec.action, mode, det_rngs));
            }
            break;
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows,
                     const std::vector<std::string>& au_names) {
    out << "t,policy,phase,b,c,co,s,mb,mc,mco,ms";
    for (const auto& au : au_names) out << ',' << au << "_q";
    for (const auto& au : au_names) out << ',' << au << "_det";
    out << ",action\n";
    for (const auto& row : rows) {
        if (row.quality.size() != au_names.size() ||
            row.detections.size() != au_names.size())
            throw ConfigError("trace row AU count does not match the header");
        out << row.t << ',' << row.policy << ',' << row.phase;
        for (int d = 0; d < kNumDims; ++d) out << ',' << row.settings[static_cast<std::size_t>(d)];
        const auto m = row.measurements.as_array();
        for (const double v : m) out << ',' << fmt(v);
        for (const double q : row.quality) out << ',' << fmt(q);
        for (const auto c : row.detections) out << ',' << c;
        out << ',' << action_name(row.action) << '\n';
    }
}

std::string trace_to_csv(const std::vector<TraceRow>& rows,
                         const std::vector<std::string>& au_names) {
    std::ostringstream out;
    write_trace_csv(out, rows, au_names);
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

} // namespace

ParsedTrace parse_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    constexpr std::size_t kFixed = 11; // t..ms
    if (header.size() < kFixed + 1 || (header.size() - kFixed - 1) % 2 != 0)
        throw ParseError("malformed trace header");
    const std::size_t n_au = (header.size() - kFixed - 1) / 2;

    ParsedTrace trace;
    for (std::size_t i = 0; i < n_au; ++i) {
        const auto& q_col = header[kFixed + i];
        const auto& d_col = header[kFixed + n_au + i];
        if (q_col.size() < 3 || q_col.substr(q_col.size() - 2) != "_q" ||
            d_col != q_col.substr(0, q_col.size() - 2) + "_det")
            throw ParseError("malformed trace header AU columns");
        trace.au_names.push_back(q_col.substr(0, q_col.size() - 2));
    }
    if (header.back() != "action") throw ParseError("trace header must end with action");

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("trace row width does not match the header");
        TraceRow row;
        row.t = parse_int(cells[0], "t");
        row.policy = cells[1];
        row.phase = cells[2];
        for (int d = 0; d < kNumDims; ++d) {
            const auto v = parse_int(cells[3 + static_cast<std::size_t>(d)], "setting");
            if (v < kSettingMin || v > kSettingMax)
                throw ParseError("trace setting out of range");
            row.settings[static_cast<std::size_t>(d)] = static_cast<int>(v);
        }
        row.measurements.brightness = parse_double(cells[7], "measurement");
        row.measurements.contrast = parse_double(cells[8], "measurement");
        row.measurements.color = parse_double(cells[9], "measurement");
        row.measurements.sharpness = parse_double(cells[10], "measurement");
        for (std::size_t i = 0; i < n_au; ++i)
            row.quality.push_back(parse_double(cells[kFixed + i], "quality"));
        for (std::size_t i = 0; i < n_au; ++i)
            row.detections.push_back(parse_int(cells[kFixed + n_au + i], "detections"));
        row.action = parse_action(cells.back());
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

ParsedTrace parse_trace_csv_text(const std::string& text) {
    std::istringstream in(text);
    return parse_trace_csv(in);
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

SummaryReport summarize(const std::map<std::string, std::vector<TraceRow>>& traces,
                        const std::vector<std::string>& au_names) {
    if (traces.empty()) throw ConfigError("summarize needs at least one trace");
    SummaryReport report;
    report.au_names = au_names;

    bool first = true;
    for (const auto& [policy, rows] : traces) {
        if (rows.empty()) throw ConfigError("empty trace for policy " + policy);
        if (first) {
            report.first_step = rows.front().t;
            report.last_step = rows.back().t;
            first = false;
        } else if (rows.front().t != report.first_step ||
                   rows.back().t != report.last_step ||
                   rows.size() != traces.begin()->second.size()) {
            throw ConfigError("traces cover different step ranges");
        }

        PolicySummary ps;
        ps.policy = policy;
        ps.cumulative_detections.assign(au_names.size(), 0);
        ps.mean_quality.assign(au_names.size(), 0.0);
        for (const auto& row : rows) {
            if (row.detections.size() != au_names.size() ||
                row.quality.size() != au_names.size())
                throw ConfigError("trace row AU count mismatch in " + policy);
            for (std::size_t i = 0; i < au_names.size(); ++i) {
                ps.cumulative_detections[i] += row.detections[i];
                ps.mean_quality[i] += row.quality[i];
            }
        }
        for (auto& q : ps.mean_quality) q /= static_cast<double>(rows.size());
        for (const auto c : ps.cumulative_detections) ps.total_detections += c;
        report.policies.push_back(std::move(ps));
    }

    // deltas for every ordered pair, in the policies' (sorted) order
    for (const auto& a : report.policies) {
        for (const auto& b : report.policies) {
            if (a.policy == b.policy) continue;
            PolicyDelta d;
            d.policy = a.policy;
            d.baseline = b.policy;
            for (std::size_t i = 0; i < au_names.size(); ++i) {
                const auto diff =
                    a.cumulative_detections[i] - b.cumulative_detections[i];
                d.absolute.push_back(diff);
                if (b.cumulative_detections[i] > 0)
                    d.percent.push_back(100.0 * static_cast<double>(diff) /
                                        static_cast<double>(b.cumulative_detections[i]));
                else
                    d.percent.push_back(std::nullopt);
            }
            report.deltas.push_back(std::move(d));
        }
    }
    return report;
}

std::string SummaryReport::to_json() const {
    json j;
    j["au_names"] = au_names;
    j["first_step"] = first_step;
    j["last_step"] = last_step;
    j["policies"] = json::array();
    for (const auto& p : policies) {
        json jp;
        jp["policy"] = p.policy;
        jp["cumulative_detections"] = p.cumulative_detections;
        jp["total_detections"] = p.total_detections;
        jp["mean_quality"] = p.mean_quality;
        jp["wall_ms"] = p.wall_ms;
        j["policies"].push_back(std::move(jp));
    }
    j["deltas"] = json::array();
    for (const auto& d : deltas) {
        json jd;
        jd["policy"] = d.policy;
        jd["baseline"] = d.baseline;
        jd["absolute"] = d.absolute;
        jd["percent"] = json::array();
        for (const auto& p : d.percent) {
            if (p) jd["percent"].push_back(*p);
            else jd["percent"].push_back(nullptr);
        }
        j["deltas"].push_back(std::move(jd));
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Strategy comparison
// ---------------------------------------------------------------------------

StrategyComparison compare_strategies(const ScenarioConfig& scenario,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AgentConfig& base_config,
                                      DetectionMode mode) {
    if (seeds.empty()) throw ConfigError("compare_strategies needs >= 1 seed");
    scenario.validate();

    StrategyComparison cmp;
    cmp.au_names = scenario.au_names();
    cmp.seeds = seeds;

    std::vector<double> priorities;
    for (const auto& au : scenario.au_profiles) priorities.push_back(au.priority);

    for (const auto kind : {StrategyKind::Linear, StrategyKind::Weighted,
                            StrategyKind::WinnerTakesAll}) {
        AgentConfig cfg = base_config;
        cfg.strategy.kind = kind;
        cfg.strategy.weights =
            kind == StrategyKind::Weighted ? priorities : std::vector<double>{};

        StrategyOutcome outcome;
        outcome.strategy = kind;
        const auto start = std::chrono::steady_clock::now();
        double quality_acc = 0.0;
        std::int64_t quality_n = 0;
        double det_acc = 0.0;
        for (const auto seed : seeds) {
            PolicyKind policy;
            policy.type = PolicyType::Elixir;
            policy.agent = cfg;
            const auto rows = run_policy(policy, scenario, seed, mode);
            std::int64_t dets = 0;
            for (const auto& row : rows) {
                if (row.t <= cfg.explore_episodes) continue;
                quality_acc += aggregate_value(row.quality, cfg.strategy);
                ++quality_n;
                for (const auto c : row.detections) dets += c;
            }
            det_acc += static_cast<double>(dets);
        }
        outcome.mean_exploit_quality =
            quality_n > 0 ? quality_acc / static_cast<double>(quality_n) : 0.0;
        outcome.mean_exploit_detections = det_acc / static_cast<double>(seeds.size());
        outcome.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        cmp.ranked.push_back(outcome);
    }

    std::stable_sort(cmp.ranked.begin(), cmp.ranked.end(),
                     [](const StrategyOutcome& a, const StrategyOutcome& b) {
                         return a.mean_exploit_detections > b.mean_exploit_detections;
                     });
    return cmp;
}

std::string StrategyComparison::to_json() const {
    json j;
    j["au_names"] = au_names;
    j["seeds"] = seeds;
    j["ranked"] = json::array();
    for (const auto& o : ranked) {
        json jo;
        jo["strategy"] = strategy_name(o.strategy);
        jo["mean_exploit_quality"] = o.mean_exploit_quality;
        jo["mean_exploit_detections"] = o.mean_exploit_detections;
        jo["wall_ms"] = o.wall_ms;
        j["ranked"].push_back(std::move(jo));
    }
    return j.dump(2);
}

} // namespace elixir
