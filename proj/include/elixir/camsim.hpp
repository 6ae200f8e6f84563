#pragma once

#include <cstdint>
#include <map>

#include "elixir/frame.hpp"
#include "elixir/scenario.hpp"
#include "elixir/settings.hpp"

namespace elixir {

// Latent scene at control step t: a deterministic function of
// (scenario.seed, phase name, object counts), luminance-scaled by the
// phase's ambient factor. A phase name recurring later in the timeline
// reproduces the same layout.
struct SceneView {
    Frame frame;
    int phase_index = 0;
};

SceneView scene_at(const ScenarioConfig& scenario, std::int64_t t);

// Per-phase latent frame cache. The layout depends on the phase, not on t,
// so regenerating per step would only burn cycles; the cached frame is the
// exact scene_at output for that phase.
class LatentCache {
public:
    const Frame& at(const ScenarioConfig& scenario, int phase_index);

private:
    std::map<int, Frame> frames_;
};

// What the camera emits for the given settings: the four enhancement
// transforms applied in fixed order brightness -> contrast -> color ->
// sharpness, each with factor f = v / 50 (f = 1 is the identity and the
// stage is skipped, so all-default settings reproduce the latent frame
// bit-exactly).
//   brightness: p' = clamp(f * p)
//   contrast:   p' = clamp(mu + f * (p - mu)),  mu = pre-stage mean luminance
//   color:      p' = clamp(g + f * (p - g)),    g = per-pixel gray (luminance)
//   sharpness:  p' = clamp(b + f * (p - b)),    b = 3x3 box blur, edge-replicated
Frame capture(const Frame& latent, const CameraSettings& settings);

FrameMeasurements measure(const Frame& frame);

} // namespace elixir
