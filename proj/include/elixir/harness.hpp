#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elixir/camsim.hpp"
#include "elixir/estimators.hpp"
#include "elixir/morl.hpp"
#include "elixir/scenario.hpp"

namespace elixir {

// In-process camera + estimator environment over the simulated scene.
// One control step = apply settings, advance the scene one step, capture,
// measure, estimate. The latent frame is cached per phase (the layout is a
// function of the phase, not of t).
class SimEnv : public ControlEnv {
public:
    SimEnv(ScenarioConfig scenario, std::uint64_t run_seed);

    const std::vector<std::string>& au_names() const override { return names_; }
    Observation reset() override;
    Observation step(const CameraSettings& settings) override;

    const ScenarioConfig& scenario() const { return scenario_; }

private:
    Observation observe();

    ScenarioConfig scenario_;
    std::vector<std::string> names_;
    std::vector<Rng> au_rngs_;
    CameraSettings settings_{};
    std::int64_t t_ = 0;
    LatentCache latent_;
};

// Restrict a multi-AU environment to one AU (the time-sharing per-slot
// tuner is the same agent with N = 1).
class SingleAuView : public ControlEnv {
public:
    SingleAuView(ControlEnv& inner, std::size_t au_index);

    const std::vector<std::string>& au_names() const override { return names_; }
    Observation reset() override;
    Observation step(const CameraSettings& settings) override;

    const Observation& last_full() const { return full_; }

    static Observation select_au(const Observation& full, std::size_t au_index);

private:
    ControlEnv& inner_;
    std::size_t index_;
    std::vector<std::string> names_;
    Observation full_;
};

enum class PolicyType { Default, TimeSharing, Elixir };

const char* policy_type_name(PolicyType t);

// Round-robin slot assignment: which AU the time-sharing policy favours
// during 0-based control step `step`. The target changes every slot_steps
// steps (at step = slot_steps, 2*slot_steps, ...).
std::size_t timesharing_active_au(std::int64_t step, std::int64_t slot_steps,
                                  std::size_t au_count);

struct PolicyKind {
    PolicyType type = PolicyType::Default;
    std::int64_t slot_steps = 1; // TimeSharing only
    AgentConfig agent;           // TimeSharing and Elixir
};

// How detection proxies are drawn from (object count, true accuracy):
//   Expected — round(count * accuracy / 100), byte-identical runs
//   Binomial — seeded Binomial(count, accuracy / 100) for rougher realism
enum class DetectionMode { Expected, Binomial };

struct TraceRow {
    std::int64_t t = 0;
    std::string policy;
    std::string phase;
    CameraSettings settings; // applied at capture time
    FrameMeasurements measurements;
    std::vector<double> quality;            // per-AU true accuracy
    std::vector<std::int64_t> detections;   // per-AU proxy counts this step
    Action action = Action::NoChange;
};

// Runs one policy over the scenario's full timeline (one row per control
// step, t = 1 .. total_steps). Identical (policy, scenario, seed) produce
// byte-identical traces. For the Elixir policy, `bootstrap` pre-loads the
// agent's Q-tables (offline pre-learning) and `final_tables`, when non-null,
// receives the tables after the run; both are rejected for other policies.
std::vector<TraceRow> run_policy(const PolicyKind& policy,
                                 const ScenarioConfig& scenario,
                                 std::uint64_t seed,
                                 DetectionMode mode = DetectionMode::Expected,
                                 const QTableSet* bootstrap = nullptr,
                                 QTableSet* final_tables = nullptr);

// CSV round trip. Header:
//   t,policy,phase,b,c,co,s,mb,mc,mco,ms,<au>_q...,<au>_det...,action
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows,
                     const std::vector<std::string>& au_names);
std::string trace_to_csv(const std::vector<TraceRow>& rows,
                         const std::vector<std::string>& au_names);

struct ParsedTrace {
    std::vector<std::string> au_names;
    std::vector<TraceRow> rows;
};
ParsedTrace parse_trace_csv(std::istream& in);
ParsedTrace parse_trace_csv_text(const std::string& text);

struct PolicySummary {
    std::string policy;
    std::vector<std::int64_t> cumulative_detections; // per AU
    std::int64_t total_detections = 0;
    std::vector<double> mean_quality; // per AU
    double wall_ms = 0.0;
};

// Absolute and percent gain of `policy` over `baseline`, per AU.
// percent is empty when the baseline count is zero.
struct PolicyDelta {
    std::string policy;
    std::string baseline;
    std::vector<std::int64_t> absolute;
    std::vector<std::optional<double>> percent;
};

struct SummaryReport {
    std::vector<std::string> au_names;
    std::int64_t first_step = 0;
    std::int64_t last_step = 0;
    std::vector<PolicySummary> policies; // sorted by policy name
    std::vector<PolicyDelta> deltas;     // every ordered policy pair

    std::string to_json() const;
};

// Cumulative counts and pairwise deltas. All traces must cover the identical
// step range; throws ConfigError otherwise.
SummaryReport summarize(const std::map<std::string, std::vector<TraceRow>>& traces,
                        const std::vector<std::string>& au_names);

struct StrategyOutcome {
    StrategyKind strategy = StrategyKind::Linear;
    // aggregate true quality under the run's own strategy, averaged over
    // exploitation steps and seeds
    double mean_exploit_quality = 0.0;
    // detection proxies summed across AUs over the exploitation window,
    // averaged over seeds
    double mean_exploit_detections = 0.0;
    double wall_ms = 0.0;
};

struct StrategyComparison {
    std::vector<std::string> au_names;
    std::vector<std::uint64_t> seeds;
    std::vector<StrategyOutcome> ranked; // descending by mean_exploit_detections

    std::string to_json() const;
};

// Runs Elixir once per strategy per seed on the identical scenario. The
// weighted strategy takes its weights from the AU priorities. base_config's
// strategy field is overwritten per run.
StrategyComparison compare_strategies(const ScenarioConfig& scenario,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AgentConfig& base_config,
                                      DetectionMode mode = DetectionMode::Expected);

} // namespace elixir
