#include "elixir/scenario.hpp"

#include <cctype>

#include "elixir/errors.hpp"

namespace elixir {

namespace {

// Phase and AU names flow into the scenario format, Q-table files and CSV
// headers; keep them single-token.
bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (const char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
            return false;
    return true;
}

} // namespace

const CameraSettings& AuProfile::optimum_for(const PhaseSpec& phase) const {
    const auto it = optimum.find(phase.name);
    if (it == optimum.end())
        throw ConfigError("AU '" + name + "' has no optimum for phase '" +
                          phase.name + "'");
    return it->second;
}

std::vector<std::string> ScenarioConfig::au_names() const {
    std::vector<std::string> names;
    names.reserve(au_profiles.size());
    for (const auto& p : au_profiles) names.push_back(p.name);
    return names;
}

int ScenarioConfig::phase_index_at(std::int64_t t) const {
    if (t < 0) throw ConfigError("negative step index");
    const auto idx = t / steps_per_phase;
    const auto last = static_cast<std::int64_t>(phases.size()) - 1;
    return static_cast<int>(idx > last ? last : idx);
}

const PhaseSpec& ScenarioConfig::phase_at(std::int64_t t) const {
    return phases[static_cast<std::size_t>(phase_index_at(t))];
}

void ScenarioConfig::validate() const {
    if (!valid_name(name))
        throw ConfigError("scenario name must be a [A-Za-z0-9_-]+ token");
    if (phases.empty()) throw ConfigError("scenario needs at least one phase");
    if (steps_per_phase < 1) throw ConfigError("steps_per_phase must be >= 1");
    if (image_size < 8) throw ConfigError("image_size must be >= 8");
    if (estimator_noise_sigma < 0)
        throw ConfigError("estimator_noise_sigma must be >= 0");
    for (const auto& ph : phases) {
        if (!valid_name(ph.name))
            throw ConfigError("phase name must be a [A-Za-z0-9_-]+ token");
        if (!(ph.ambient > 0.0 && ph.ambient <= 1.0))
            throw ConfigError("phase '" + ph.name + "' ambient must be in (0,1]");
    }
    if (au_profiles.empty()) throw ConfigError("scenario needs at least one AU");
    for (std::size_t i = 0; i < au_profiles.size(); ++i) {
        const auto& au = au_profiles[i];
        if (!valid_name(au.name))
            throw ConfigError("AU name must be a [A-Za-z0-9_-]+ token");
        if (au.name == "AGG")
            throw ConfigError("AU name 'AGG' is reserved for the aggregate table");
        for (std::size_t j = 0; j < i; ++j)
            if (au_profiles[j].name == au.name)
                throw ConfigError("duplicate AU name '" + au.name + "'");
        if (!(au.width > 0.0))
            throw ConfigError("AU '" + au.name + "' width must be > 0");
        if (!(au.priority > 0.0))
            throw ConfigError("AU '" + au.name + "' priority must be > 0");
        for (const double w : au.dimension_weights)
            if (!(w > 0.0))
                throw ConfigError("AU '" + au.name + "' dimension weights must be > 0");
        for (const auto& ph : phases) {
            const auto it = au.optimum.find(ph.name);
            if (it == au.optimum.end())
                throw ConfigError("AU '" + au.name + "' has no optimum for phase '" +
                                  ph.name + "'");
            if (!it->second.valid())
                throw ConfigError("AU '" + au.name + "' optimum for phase '" +
                                  ph.name + "' is out of range");
        }
    }
    if (object_counts.size() != phases.size())
        throw ConfigError("object_counts must have one row per phase");
    for (const auto& row : object_counts) {
        if (row.size() != au_profiles.size())
            throw ConfigError("object_counts row must have one entry per AU");
        for (const auto c : row)
            if (c < 0) throw ConfigError("object counts must be >= 0");
    }
}

namespace {

AuProfile make_au(std::string name, double width, double priority,
                  std::map<std::string, CameraSettings> optimum) {
    AuProfile au;
    au.name = std::move(name);
    au.width = width;
    au.priority = priority;
    au.optimum = std::move(optimum);
    return au;
}

ScenarioConfig make_demo3d() {
    ScenarioConfig s;
    s.name = "demo3d";
    s.seed = 7702;
    s.image_size = 48;
    s.steps_per_phase = 30000;
    s.phases = {{"LAB", 1.0}};
    s.au_profiles = {
        make_au("FD", 7.0, 3.0, {{"LAB", {60, 30, 40, 80}}}),
        make_au("PD", 7.0, 1.0, {{"LAB", {80, 60, 50, 40}}}),
        make_au("CD", 7.0, 1.0, {{"LAB", {70, 50, 60, 60}}}),
    };
    s.object_counts = {{40, 60, 50}};
    return s;
}

ScenarioConfig make_twoau() {
    ScenarioConfig s;
    s.name = "twoau";
    s.seed = 1311;
    s.image_size = 48;
    s.steps_per_phase = 2000;
    s.phases = {{"DAY", 1.0}, {"NIGHT", 0.35}};
    s.au_profiles = {
        make_au("PD", 6.0, 1.0,
                {{"DAY", {40, 90, 60, 100}}, {"NIGHT", {80, 90, 70, 100}}}),
        make_au("FD", 6.0, 3.0,
                {{"DAY", {60, 40, 90, 90}}, {"NIGHT", {80, 90, 60, 80}}}),
    };
    s.object_counts = {{30, 20}, {20, 10}};
    return s;
}

ScenarioConfig make_daynight() {
    ScenarioConfig s;
    s.name = "daynight";
    s.seed = 4144;
    s.image_size = 48;
    s.steps_per_phase = 3000;
    s.phases = {{"DAY", 1.0}, {"NIGHT", 0.35}, {"DAY", 1.0}, {"NIGHT", 0.35}};
    s.au_profiles = {
        make_au("FD", 7.0, 3.0,
                {{"DAY", {75, 20, 75, 85}}, {"NIGHT", {80, 80, 60, 80}}}),
        make_au("LPD", 7.0, 2.0,
                {{"DAY", {85, 30, 65, 90}}, {"NIGHT", {90, 70, 55, 90}}}),
        make_au("PD", 7.0, 1.0,
                {{"DAY", {75, 30, 80, 70}}, {"NIGHT", {85, 80, 65, 95}}}),
        make_au("CD", 7.0, 1.0,
                {{"DAY", {85, 20, 65, 75}}, {"NIGHT", {85, 65, 50, 80}}}),
    };
    s.object_counts = {{15, 10, 25, 40}, {8, 6, 15, 30}, {15, 10, 25, 40}, {8, 6, 15, 30}};
    return s;
}

} // namespace

ScenarioConfig scenario_preset(const std::string& name) {
    if (name == "demo3d") return make_demo3d();
    if (name == "twoau") return make_twoau();
    if (name == "daynight") return make_daynight();
    throw ConfigError("unknown scenario preset '" + name + "'");
}

std::vector<std::string> scenario_preset_names() {
    return {"demo3d", "twoau", "daynight"};
}

} // namespace elixir
