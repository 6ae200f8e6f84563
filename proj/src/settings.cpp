#include "elixir/settings.hpp"

#include <algorithm>
#include <charconv>

#include "elixir/errors.hpp"
#include "elixir/frame.hpp"

namespace elixir {

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::Brightness: return "brightness";
        case Dim::Contrast: return "contrast";
        case Dim::Color: return "color";
        case Dim::Sharpness: return "sharpness";
    }
    return "?";
}

bool CameraSettings::valid() const {
    return std::all_of(v.begin(), v.end(), [](int x) {
        return x >= kSettingMin && x <= kSettingMax;
    });
}

std::string to_string(const CameraSettings& s) {
    std::string out = "[";
    for (int i = 0; i < kNumDims; ++i) {
        if (i) out += ',';
        out += std::to_string(s.v[i]);
    }
    out += ']';
    return out;
}

CameraSettings parse_settings(std::string_view text) {
    // Strict canonical form: '[' int ',' int ',' int ',' int ']', optional
    // spaces after commas.
    auto fail = [&text]() -> CameraSettings {
        throw ParseError("malformed settings vector: '" + std::string(text) + "'");
    };
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && text[pos] == ' ') ++pos;
    };
    skip_ws();
    if (pos >= text.size() || text[pos] != '[') return fail();
    ++pos;
    CameraSettings s;
    for (int i = 0; i < kNumDims; ++i) {
        skip_ws();
        int value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
        if (ec != std::errc()) return fail();
        pos = static_cast<std::size_t>(ptr - text.data());
        if (value < kSettingMin || value > kSettingMax)
            throw ParseError("settings value out of [0,100]: " + std::to_string(value));
        s.v[i] = value;
        skip_ws();
        const char expect = (i + 1 < kNumDims) ? ',' : ']';
        if (pos >= text.size() || text[pos] != expect) return fail();
        ++pos;
    }
    skip_ws();
    if (pos != text.size()) return fail();
    return s;
}

namespace {

constexpr const char* kActionNames[kNumActions] = {
    "IncreaseBrightness", "DecreaseBrightness", "IncreaseContrast",
    "DecreaseContrast",   "IncreaseColor",      "DecreaseColor",
    "IncreaseSharpness",  "DecreaseSharpness",  "NoChange",
};

} // namespace

const char* action_name(Action a) { return kActionNames[static_cast<int>(a)]; }

Action parse_action(std::string_view name) {
    for (int i = 0; i < kNumActions; ++i)
        if (name == kActionNames[i]) return static_cast<Action>(i);
    throw ParseError("unknown action: '" + std::string(name) + "'");
}

int action_dim(Action a) {
    const int i = static_cast<int>(a);
    return i < 8 ? i / 2 : -1;
}

int action_direction(Action a) {
    const int i = static_cast<int>(a);
    if (i >= 8) return 0;
    return (i % 2 == 0) ? +1 : -1;
}

Action opposite_action(Action a) {
    const int i = static_cast<int>(a);
    if (i >= 8) return Action::NoChange;
    return static_cast<Action>(i % 2 == 0 ? i + 1 : i - 1);
}

CameraSettings apply_action(const CameraSettings& s, Action a, int step) {
    CameraSettings out = s;
    const int dim = action_dim(a);
    if (dim >= 0) {
        const int raw = out.v[dim] + action_direction(a) * step;
        out.v[dim] = std::clamp(raw, kSettingMin, kSettingMax);
    }
    return out;
}

SettingsGrid enumerate_grid(int step) {
    if (step <= 0 || 100 % step != 0)
        throw ConfigError("grid stride must divide 100, got " + std::to_string(step));
    SettingsGrid grid;
    grid.step = step;
    const int per_dim = 100 / step + 1;
    grid.values.reserve(static_cast<std::size_t>(per_dim) * per_dim * per_dim * per_dim);
    for (int b = 0; b <= 100; b += step)
        for (int c = 0; c <= 100; c += step)
            for (int co = 0; co <= 100; co += step)
                for (int sh = 0; sh <= 100; sh += step)
                    grid.values.push_back(CameraSettings{b, c, co, sh});
    return grid;
}

StateKey discretize(const CameraSettings& s, const FrameMeasurements& m,
                    int step, int bins) {
    StateKey key;
    for (int i = 0; i < kNumDims; ++i) {
        // round-half-up to the nearest grid index, in integer arithmetic
        key.setting_bins[i] = static_cast<std::int16_t>((2 * s.v[i] + step) / (2 * step));
    }
    const auto values = m.as_array();
    for (int i = 0; i < kNumDims; ++i) {
        auto bin = static_cast<std::int64_t>(values[i] * bins);
        if (bin < 0) bin = 0;
        if (bin > bins - 1) bin = bins - 1;
        key.measurement_bins[i] = static_cast<std::int16_t>(bin);
    }
    return key;
}

} // namespace elixir
