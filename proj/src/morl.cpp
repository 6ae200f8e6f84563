#include "elixir/morl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "elixir/errors.hpp"

namespace elixir {

const char* reward_mode_name(RewardMode m) {
    return m == RewardMode::Delta ? "delta" : "raw";
}

RewardMode parse_reward_mode(std::string_view name) {
    if (name == "delta") return RewardMode::Delta;
    if (name == "raw") return RewardMode::Raw;
    throw ParseError("unknown reward mode: '" + std::string(name) + "'");
}

const char* strategy_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::Linear: return "linear";
        case StrategyKind::Weighted: return "weighted";
        case StrategyKind::WinnerTakesAll: return "winner-takes-all";
    }
    return "?";
}

StrategyKind parse_strategy(std::string_view name) {
    if (name == "linear") return StrategyKind::Linear;
    if (name == "weighted") return StrategyKind::Weighted;
    if (name == "winner-takes-all" || name == "wta")
        return StrategyKind::WinnerTakesAll;
    throw ParseError("unknown aggregation strategy: '" + std::string(name) + "'");
}

double aggregate_value(std::span<const double> per_au_values,
                       const AggregationStrategy& strategy) {
    if (per_au_values.empty())
        throw ConfigError("aggregate_value needs at least one AU value");
    switch (strategy.kind) {
        case StrategyKind::Linear: {
            double acc = 0.0;
            for (const double v : per_au_values) acc += v;
            return acc / static_cast<double>(per_au_values.size());
        }
        case StrategyKind::Weighted: {
            if (strategy.weights.size() != per_au_values.size())
                throw ConfigError("weighted aggregation needs one weight per AU");
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < per_au_values.size(); ++i) {
                if (!(strategy.weights[i] > 0.0))
                    throw ConfigError("aggregation weights must be > 0");
                num += strategy.weights[i] * per_au_values[i];
                den += strategy.weights[i];
            }
            return num / den;
        }
        case StrategyKind::WinnerTakesAll:
            return *std::max_element(per_au_values.begin(), per_au_values.end());
    }
    throw ConfigError("unreachable strategy kind");
}

void AgentConfig::validate(std::size_t au_count) const {
    auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in01(alpha_explore) || !in01(alpha_exploit))
        throw ConfigError("alpha must be in [0,1]");
    if (!in01(epsilon_explore) || !in01(epsilon_exploit))
        throw ConfigError("epsilon must be in [0,1]");
    if (!in01(gamma)) throw ConfigError("gamma must be in [0,1]");
    if (explore_episodes < 0) throw ConfigError("explore episodes must be >= 0");
    if (step <= 0 || step > 100) throw ConfigError("action step must be in 1..100");
    if (bins < 2) throw ConfigError("measurement bins must be >= 2");
    if (strategy.kind == StrategyKind::Weighted &&
        strategy.weights.size() != au_count)
        throw ConfigError("weighted strategy needs one weight per AU");
}

double q_value(const QTable& table, const StateKey& s, Action a) {
    const auto it = table.find(s);
    return it == table.end() ? 0.0 : it->second[static_cast<std::size_t>(a)];
}

double max_q(const QTable& table, const StateKey& s) {
    const auto it = table.find(s);
    if (it == table.end()) return 0.0;
    return *std::max_element(it->second.begin(), it->second.end());
}

Action greedy_action(const QTable& table, const StateKey& s) {
    const auto it = table.find(s);
    if (it == table.end()) return static_cast<Action>(0); // all zeros, lowest index
    int best = 0;
    for (int a = 1; a < kNumActions; ++a)
        if (it->second[static_cast<std::size_t>(a)] >
            it->second[static_cast<std::size_t>(best)])
            best = a;
    return static_cast<Action>(best);
}

double bellman_update(double q, double r, double max_next, double alpha,
                      double gamma) {
    return q + alpha * (r + gamma * max_next - q);
}

Action choose_action(const QTable& aggregate, const StateKey& s, double epsilon,
                     Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw ConfigError("epsilon must be in [0,1]");
    const double u = rng.uniform();
    if (u > epsilon)
        return static_cast<Action>(rng.uniform_int(kNumActions));
    return greedy_action(aggregate, s);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMagic = "elixir-qtables v1";
constexpr const char* kAggName = "AGG";

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct EntryRef {
    const std::string* table;
    const StateKey* key;
    int action;
    double value;
};

void append_entries(std::vector<EntryRef>& out, const std::string& table_name,
                    const QTable& table) {
    for (const auto& [key, row] : table)
        for (int a = 0; a < kNumActions; ++a)
            out.push_back(EntryRef{&table_name, &key, a,
                                   row[static_cast<std::size_t>(a)]});
}

} // namespace

void save_tables(const QTableSet& tables, const std::filesystem::path& path) {
    if (tables.per_au.size() != tables.au_names.size())
        throw ConfigError("QTableSet has mismatched AU names and tables");
    for (const auto& name : tables.au_names)
        if (name == kAggName)
            throw ConfigError("AU name 'AGG' is reserved for the aggregate table");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

    out << kMagic << '\n' << "aus";
    for (const auto& name : tables.au_names) out << ' ' << name;
    out << '\n';

    const std::string agg_name = kAggName;
    std::vector<EntryRef> entries;
    for (std::size_t i = 0; i < tables.per_au.size(); ++i)
        append_entries(entries, tables.au_names[i], tables.per_au[i]);
    append_entries(entries, agg_name, tables.aggregate);

    std::sort(entries.begin(), entries.end(),
              [](const EntryRef& a, const EntryRef& b) {
                  if (*a.table != *b.table) return *a.table < *b.table;
                  if (*a.key != *b.key) return *a.key < *b.key;
                  return a.action < b.action;
              });

    for (const auto& e : entries) {
        out << "entry " << *e.table;
        for (const auto x : e.key->setting_bins) out << ' ' << x;
        for (const auto x : e.key->measurement_bins) out << ' ' << x;
        out << ' ' << e.action << ' ' << format_double(e.value) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

QTableSet load_tables(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw ParseError("not a Q-table file: '" + path.string() + "'");
    if (!std::getline(in, line) || line.rfind("aus", 0) != 0)
        throw ParseError("missing AU list in '" + path.string() + "'");

    QTableSet tables;
    {
        std::istringstream header(line.substr(3));
        std::string name;
        while (header >> name) tables.au_names.push_back(name);
    }
    tables.per_au.resize(tables.au_names.size());

    auto table_for = [&tables](const std::string& name) -> QTable& {
        if (name == kAggName) return tables.aggregate;
        for (std::size_t i = 0; i < tables.au_names.size(); ++i)
            if (tables.au_names[i] == name) return tables.per_au[i];
        throw ParseError("entry references unknown table '" + name + "'");
    };

    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, table_name;
        StateKey key;
        int action = -1;
        std::string value_text;
        ls >> tag >> table_name;
        for (auto& x : key.setting_bins) ls >> x;
        for (auto& x : key.measurement_bins) ls >> x;
        ls >> action >> value_text;
        std::string extra;
        if (tag != "entry" || !ls || (ls >> extra) || action < 0 ||
            action >= kNumActions)
            throw ParseError("malformed Q-table entry at line " +
                             std::to_string(lineno));
        double value = 0.0;
        const auto res = std::from_chars(
            value_text.data(), value_text.data() + value_text.size(), value);
        if (res.ec != std::errc() || res.ptr != value_text.data() + value_text.size() ||
            !std::isfinite(value))
            throw ParseError("bad Q-value at line " + std::to_string(lineno));
        table_for(table_name)[key][static_cast<std::size_t>(action)] = value;
    }
    return tables;
}

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

MorlAgent::MorlAgent(std::vector<std::string> au_names, AgentConfig config,
                     std::uint64_t seed)
    : cfg_(std::move(config)), rng_(Rng::derive(seed, "morl-agent")) {
    if (au_names.empty()) throw ConfigError("agent needs at least one AU");
    cfg_.validate(au_names.size());
    tables_.au_names = std::move(au_names);
    tables_.per_au.resize(tables_.au_names.size());
    last_estimates_.resize(tables_.au_names.size(), 0.0);
}

void MorlAgent::sync(const Observation& obs) {
    if (obs.estimates.size() != tables_.au_names.size())
        throw ConfigError("observation AU count mismatch");
    settings_ = obs.applied;
    state_ = discretize(settings_, obs.measurements, cfg_.step, cfg_.bins);
    last_estimates_ = obs.estimates;
    synced_ = true;
}

void MorlAgent::adopt_tables(QTableSet tables) {
    if (tables.au_names != tables_.au_names)
        throw ConfigError("bootstrapped tables have a different AU set");
    tables_ = std::move(tables);
}

TransitionRecord MorlAgent::step(ControlEnv& env, bool explore) {
    if (!synced_) sync(env.reset());
    const double epsilon = explore ? cfg_.epsilon_explore : cfg_.epsilon_exploit;
    const double alpha = explore ? cfg_.alpha_explore : cfg_.alpha_exploit;

    const Action a = choose_action(tables_.aggregate, state_, epsilon, rng_);
    const CameraSettings requested = apply_action(settings_, a, cfg_.step);
    Observation obs = env.step(requested);
    if (obs.estimates.size() != tables_.au_names.size())
        throw ConfigError("observation AU count mismatch");

    const StateKey next =
        discretize(obs.applied, obs.measurements, cfg_.step, cfg_.bins);

    TransitionRecord rec;
    rec.t = obs.t;
    rec.state = state_;
    rec.action = a;
    rec.next_state = next;
    rec.explore = explore;
    rec.estimates = obs.estimates;

    const std::size_t n = tables_.au_names.size();
    rec.rewards.resize(n);
    std::vector<double> updated(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = cfg_.reward_mode == RewardMode::Delta
                             ? obs.estimates[i] - last_estimates_[i]
                             : obs.estimates[i];
        rec.rewards[i] = r;
        QTable& q_i = tables_.per_au[i];
        const double q = q_value(q_i, state_, a);
        const double max_next = max_q(q_i, next);
        const double v = bellman_update(q, r, max_next, alpha, cfg_.gamma);
        q_i[state_][static_cast<std::size_t>(a)] = v;
        updated[i] = v;
    }
    rec.aggregate_q = aggregate_value(updated, cfg_.strategy);
    tables_.aggregate[state_][static_cast<std::size_t>(a)] = rec.aggregate_q;

    settings_ = obs.applied;
    state_ = next;
    last_estimates_ = obs.estimates;
    rec.obs = std::move(obs);
    return rec;
}

std::vector<TransitionRecord> MorlAgent::run(ControlEnv& env,
                                             std::int64_t explore_steps,
                                             std::int64_t exploit_steps) {
    if (explore_steps < 0 || exploit_steps < 0)
        throw ConfigError("step counts must be >= 0");
    sync(env.reset());
    std::vector<TransitionRecord> trace;
    trace.reserve(static_cast<std::size_t>(explore_steps + exploit_steps));
    for (std::int64_t k = 0; k < explore_steps + exploit_steps; ++k)
        trace.push_back(step(env, k < explore_steps));
    return trace;
}

} // namespace elixir
