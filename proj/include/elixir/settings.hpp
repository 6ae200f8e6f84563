#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace elixir {

// The four tunable camera parameters, each on an integer 0..100 scale.
// 50 is the manufacturer default for every dimension (identity enhancement).
inline constexpr int kSettingMin = 0;
inline constexpr int kSettingMax = 100;
inline constexpr int kSettingDefault = 50;
inline constexpr int kNumDims = 4;

enum class Dim : int { Brightness = 0, Contrast = 1, Color = 2, Sharpness = 3 };

const char* dim_name(Dim d);

struct CameraSettings {
    std::array<int, kNumDims> v{kSettingDefault, kSettingDefault,
                                kSettingDefault, kSettingDefault};

    constexpr CameraSettings() = default;
    constexpr CameraSettings(int brightness, int contrast, int color, int sharpness)
        : v{brightness, contrast, color, sharpness} {}

    int operator[](std::size_t i) const { return v[i]; }
    int& operator[](std::size_t i) { return v[i]; }
    int brightness() const { return v[0]; }
    int contrast() const { return v[1]; }
    int color() const { return v[2]; }
    int sharpness() const { return v[3]; }

    bool valid() const;

    friend auto operator<=>(const CameraSettings&, const CameraSettings&) = default;
};

// Canonical textual form "[b,c,co,s]", e.g. "[40,90,60,100]".
std::string to_string(const CameraSettings& s);
// Parses the canonical form. Throws ParseError on malformed input or
// out-of-range values.
CameraSettings parse_settings(std::string_view text);

// The 9-action space: increase/decrease one of the four settings, or no
// change. Integer encoding 0..8 is stable and load-bearing (Q-table files,
// argmax tie-breaks).
enum class Action : int {
    IncreaseBrightness = 0,
    DecreaseBrightness = 1,
    IncreaseContrast = 2,
    DecreaseContrast = 3,
    IncreaseColor = 4,
    DecreaseColor = 5,
    IncreaseSharpness = 6,
    DecreaseSharpness = 7,
    NoChange = 8,
};

inline constexpr int kNumActions = 9;

const char* action_name(Action a);
// Throws ParseError on an unknown name.
Action parse_action(std::string_view name);

// Dimension touched by an action, or -1 for NoChange.
int action_dim(Action a);
// +1, -1, or 0 for NoChange.
int action_direction(Action a);
// The opposite movement; NoChange maps to itself.
Action opposite_action(Action a);

// Applies one action with the given stride, clamping to [0, 100].
// Total: clamping makes every input legal.
CameraSettings apply_action(const CameraSettings& s, Action a, int step);

// Full Cartesian grid over the four settings dimensions with the given
// stride, in lexicographic order over (brightness, contrast, color,
// sharpness).
struct SettingsGrid {
    int step = 10;
    std::vector<CameraSettings> values;
};

// Throws ConfigError unless step > 0 and step divides 100.
SettingsGrid enumerate_grid(int step);

// Discretized MORL state: the applied-settings grid position plus the
// binned frame measurements.
struct StateKey {
    std::array<std::int16_t, kNumDims> setting_bins{};
    std::array<std::int16_t, kNumDims> measurement_bins{};

    friend auto operator<=>(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::int16_t x) {
            h ^= static_cast<std::uint16_t>(x);
            h *= 1099511628211ull;
        };
        for (auto x : k.setting_bins) mix(x);
        for (auto x : k.measurement_bins) mix(x);
        return static_cast<std::size_t>(h);
    }
};

struct FrameMeasurements; // camsim

// setting_bins[i] = round-half-up(setting[i] / step);
// measurement_bins[i] = min(floor(m[i] * bins), bins - 1).
// Pure and total for measurements in [0, 1], bins >= 2.
StateKey discretize(const CameraSettings& s, const FrameMeasurements& m,
                    int step, int bins);

} // namespace elixir
