#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "elixir/frame.hpp"
#include "elixir/rng.hpp"
#include "elixir/settings.hpp"

namespace elixir {

// How the per-AU quality estimates become per-AU rewards.
//   Delta: r_i = q_i(s') - q_i(s)  (positive when the action improved the AU)
//   Raw:   r_i = q_i(s')
enum class RewardMode { Delta, Raw };

const char* reward_mode_name(RewardMode m);
RewardMode parse_reward_mode(std::string_view name);

enum class StrategyKind { Linear, Weighted, WinnerTakesAll };

const char* strategy_name(StrategyKind k);
StrategyKind parse_strategy(std::string_view name);

// Scalarization of per-AU values into one number.
//   Linear          — plain mean
//   Weighted        — sum(p_i * v_i) / sum(p_i), weights aligned to the AU order
//   WinnerTakesAll  — max
struct AggregationStrategy {
    StrategyKind kind = StrategyKind::Linear;
    std::vector<double> weights; // Weighted only; one entry per AU
};

double aggregate_value(std::span<const double> per_au_values,
                       const AggregationStrategy& strategy);

// Exploration/exploitation schedule and state-space knobs. Epsilon follows
// the source system's convention: epsilon is the probability of the GREEDY
// action (a random action is taken when the uniform draw exceeds it), which
// is inverted relative to textbook epsilon-greedy.
struct AgentConfig {
    double alpha_explore = 0.8;
    double alpha_exploit = 0.2;
    double epsilon_explore = 0.1;
    double epsilon_exploit = 0.9;
    double gamma = 0.9;
    std::int64_t explore_episodes = 0; // K
    int step = 10;                     // action stride
    int bins = 5;                      // measurement bins per dimension
    AggregationStrategy strategy;
    RewardMode reward_mode = RewardMode::Delta;

    void validate(std::size_t au_count) const; // throws ConfigError
};

// Sparse Q-table: rows materialize on first write, absent entries read 0.
using QTable = std::unordered_map<StateKey, std::array<double, kNumActions>, StateKeyHash>;

double q_value(const QTable& table, const StateKey& s, Action a);
double max_q(const QTable& table, const StateKey& s);
// Ties broken by lowest action index.
Action greedy_action(const QTable& table, const StateKey& s);

// N per-AU tables plus the aggregate table ("N+1 Q-tables").
struct QTableSet {
    std::vector<std::string> au_names;
    std::vector<QTable> per_au;
    QTable aggregate;

    bool operator==(const QTableSet&) const = default;
};

// One exact Q-learning backup: q + alpha * (r + gamma * max_next - q).
double bellman_update(double q, double r, double max_next, double alpha,
                      double gamma);

// Draw u ~ U[0,1); u > epsilon -> uniformly random action, otherwise the
// greedy action from the aggregate table.
Action choose_action(const QTable& aggregate, const StateKey& s, double epsilon,
                     Rng& rng);

// Canonical text persistence: header with the AU list, then one line per
// (table, state, action) entry sorted by (table name, state, action index),
// Q-values as shortest round-trip decimals. load(save(x)) == x bit-exactly.
void save_tables(const QTableSet& tables, const std::filesystem::path& path);
QTableSet load_tables(const std::filesystem::path& path);

// What the environment reports after a control step.
struct Observation {
    std::int64_t t = 0; // capture index
    int phase_index = 0;
    std::string phase;
    CameraSettings applied; // settings actually in effect at capture time
    FrameMeasurements measurements;
    std::vector<double> estimates;    // agent-visible per-AU quality
    std::vector<double> true_quality; // ground truth, reporting only
    std::vector<std::int64_t> object_counts;
};

// A camera/estimator environment the agent can drive: the in-process
// simulator and the protocol-backed client both implement this.
class ControlEnv {
public:
    virtual ~ControlEnv() = default;
    virtual const std::vector<std::string>& au_names() const = 0;
    // Capture at the current scene step without applying anything.
    virtual Observation reset() = 0;
    // Apply settings, advance one control step, capture and estimate.
    virtual Observation step(const CameraSettings& settings) = 0;
};

struct TransitionRecord {
    std::int64_t t = 0; // capture index of next_state
    StateKey state;
    Action action = Action::NoChange;
    StateKey next_state;
    std::vector<double> rewards;   // r_i per AU
    std::vector<double> estimates; // q_i(s') per AU
    double aggregate_q = 0.0;      // Q_aggregate(s, a) written this step
    bool explore = false;
    Observation obs; // full observation backing next_state
};

// Single-policy MORL agent: one Q-table per AU plus the aggregate table
// recomputed from them after every backup. One logical control loop; may be
// moved between threads but never shared mutably.
class MorlAgent {
public:
    MorlAgent(std::vector<std::string> au_names, AgentConfig config,
              std::uint64_t seed);

    // Adopt the observation as current state without learning from the jump
    // (start of a run, or retaking control after another tuner held the
    // camera).
    void sync(const Observation& obs);

    TransitionRecord step(ControlEnv& env, bool explore);

    // reset + K exploration steps (alpha/epsilon explore) followed by
    // exploit_steps exploitation steps. Trace length K + exploit_steps.
    std::vector<TransitionRecord> run(ControlEnv& env, std::int64_t explore_steps,
                                      std::int64_t exploit_steps);

    const QTableSet& tables() const { return tables_; }
    void adopt_tables(QTableSet tables); // bootstrap from persisted values
    const AgentConfig& config() const { return cfg_; }
    const CameraSettings& settings() const { return settings_; }

private:
    AgentConfig cfg_;
    QTableSet tables_;
    Rng rng_;
    StateKey state_{};
    CameraSettings settings_{};
    std::vector<double> last_estimates_;
    bool synced_ = false;
};

} // namespace elixir
