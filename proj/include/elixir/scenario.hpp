#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "elixir/settings.hpp"

namespace elixir {

// One environmental condition on the scenario timeline (DAY, NIGHT, ...).
// ambient scales the latent scene's luminance.
struct PhaseSpec {
    std::string name;
    double ambient = 1.0;

    bool operator==(const PhaseSpec&) const = default;
};

// Synthetic analytical unit: a ground-truth accuracy surface with a
// phase-dependent optimum. The surface is a Gaussian bump over the settings
// grid,
//   score = 100 * exp(-D / (2 width^2)),
//   D = sum_i dimension_weights[i] * ((settings[i] - optimum[i]) / 10)^2,
// so the optimum is exactly on-grid and every test has an analytic oracle.
struct AuProfile {
    std::string name;
    std::map<std::string, CameraSettings> optimum; // phase name -> v*
    double width = 6.0;                            // sigma, in grid units
    std::array<double, 4> dimension_weights{1.0, 1.0, 1.0, 1.0};
    double priority = 1.0; // weight p_i for the Weighted aggregation strategy

    // Throws ConfigError when the phase has no declared optimum.
    const CameraSettings& optimum_for(const PhaseSpec& phase) const;

    bool operator==(const AuProfile&) const = default;
};

// Everything a run needs: the phase timeline, the AUs, and the latent-scene
// parameters. object_counts[phase_index][au_index] is the number of
// detectable objects the scene shows for that AU during that phase.
struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 0;
    int image_size = 64;
    std::int64_t steps_per_phase = 1;
    double estimator_noise_sigma = 0.0;
    std::vector<PhaseSpec> phases;
    std::vector<AuProfile> au_profiles;
    std::vector<std::vector<std::int64_t>> object_counts;

    std::size_t au_count() const { return au_profiles.size(); }
    std::vector<std::string> au_names() const;

    // Phase covering step t; the last phase repeats past the timeline end.
    int phase_index_at(std::int64_t t) const;
    const PhaseSpec& phase_at(std::int64_t t) const;
    std::int64_t total_steps() const {
        return steps_per_phase * static_cast<std::int64_t>(phases.size());
    }

    // Throws ConfigError describing the first violated invariant.
    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

// Built-in scenario presets (also shipped as files under scenarios/):
//   "demo3d"   — single LAB phase, FD/PD/CD with the 3D-model optima
//   "twoau"    — DAY+NIGHT, FD/PD with the day/night optima
//   "daynight" — DAY/NIGHT alternation, four AUs (FD, LPD, PD, CD)
ScenarioConfig scenario_preset(const std::string& name);
std::vector<std::string> scenario_preset_names();

} // namespace elixir
