#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elixir/morl.hpp"
#include "elixir/scenario.hpp"
#include "elixir/settings.hpp"

namespace elixir {

// Result of an exhaustive grid sweep. primary_score is the accuracy surface
// value; secondary_score is the mean primary over the point's 8 axial grid
// neighbours (one step up/down per dimension, clamped at the range ends) —
// a smoothness proxy that fills the role of the IoU tie-break.
struct OracleResult {
    CameraSettings best_settings;
    double primary_score = 0.0;
    double secondary_score = 0.0;
    std::int64_t evaluations = 0;
};

// entries[i][j] = accuracy of AU j at AU i's optimal settings.
struct ConflictMatrix {
    std::vector<std::string> au_names;
    std::vector<std::vector<double>> entries;
};

// Scores every grid point and returns the best under the ordering
// (primary desc, secondary desc, lexicographically smallest settings).
// threads <= 0 picks the hardware concurrency; the result is independent of
// the thread count (selection happens after all scores are collected).
OracleResult find_best_conf(const AuProfile& profile, const PhaseSpec& phase,
                            const SettingsGrid& grid, int threads = 0);

// Cross-AU conflict table; needs at least two profiles.
ConflictMatrix conflict_matrix(std::span<const AuProfile> profiles,
                               const PhaseSpec& phase, const SettingsGrid& grid,
                               int threads = 0);

// argmax over the grid of the aggregated per-AU accuracy, same tie-break
// chain as find_best_conf (secondary is the neighbourhood mean of the
// aggregate score).
OracleResult common_optimal(std::span<const AuProfile> profiles,
                            const PhaseSpec& phase, const SettingsGrid& grid,
                            const AggregationStrategy& strategy,
                            int threads = 0);

// Post-capture digital transformation: a transform t composes additively
// around the identity, effective[i] = clamp(captured[i] + (t[i] - 50)).
// Returns the transform maximizing the AU's accuracy at the effective
// settings (ties: lexicographically smallest transform) and that score.
// Throws ConfigError when the identity transform is not in the grid.
struct PostTransformResult {
    CameraSettings transform;
    double boosted_score = 0.0;
};

PostTransformResult best_post_transform(const CameraSettings& captured,
                                        const AuProfile& profile,
                                        const PhaseSpec& phase,
                                        const SettingsGrid& transform_grid);

} // namespace elixir
