#include "elixir/camsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "elixir/errors.hpp"
#include "elixir/kernels.hpp"
#include "elixir/rng.hpp"
#include "kernels_impl.hpp"

namespace elixir {

namespace {

// Stream tag for a phase's latent layout: name plus the object counts, so a
// repeated phase name with the same counts reproduces the same scene.
std::string layout_tag(const ScenarioConfig& sc, int phase_index) {
    std::string tag = sc.phases[static_cast<std::size_t>(phase_index)].name;
    for (const auto c : sc.object_counts[static_cast<std::size_t>(phase_index)]) {
        tag += ':';
        tag += std::to_string(c);
    }
    return tag;
}

void fill_rect(Frame& f, int x0, int y0, int w, int h, float cr, float cg, float cb) {
    const int x1 = std::min(f.size, x0 + w);
    const int y1 = std::min(f.size, y0 + h);
    for (int y = std::max(0, y0); y < y1; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * f.size;
        for (int x = std::max(0, x0); x < x1; ++x) {
            f.r[row + x] = cr;
            f.g[row + x] = cg;
            f.b[row + x] = cb;
        }
    }
}

} // namespace

const Frame& LatentCache::at(const ScenarioConfig& scenario, int phase_index) {
    auto it = frames_.find(phase_index);
    if (it == frames_.end()) {
        auto view = scene_at(scenario, static_cast<std::int64_t>(phase_index) *
                                           scenario.steps_per_phase);
        it = frames_.emplace(phase_index, std::move(view.frame)).first;
    }
    return it->second;
}

SceneView scene_at(const ScenarioConfig& scenario, std::int64_t t) {
    if (t < 0) throw ConfigError("scene_at: negative step index");
    const int pidx = scenario.phase_index_at(t);
    const PhaseSpec& phase = scenario.phases[static_cast<std::size_t>(pidx)];

    Rng rng(Rng::derive(scenario.seed, layout_tag(scenario, pidx)));
    const int side = scenario.image_size;
    Frame frame(side, t);

    // Gradient background.
    float base[3], gx[3], gy[3];
    for (int c = 0; c < 3; ++c) {
        base[c] = static_cast<float>(0.2 + 0.4 * rng.uniform());
        gx[c] = static_cast<float>(0.6 * rng.uniform() - 0.3);
        gy[c] = static_cast<float>(0.6 * rng.uniform() - 0.3);
    }
    const float inv = side > 1 ? 1.0f / static_cast<float>(side - 1) : 0.0f;
    for (int y = 0; y < side; ++y) {
        const float fy = static_cast<float>(y) * inv - 0.5f;
        const std::size_t row = static_cast<std::size_t>(y) * side;
        for (int x = 0; x < side; ++x) {
            const float fx = static_cast<float>(x) * inv - 0.5f;
            frame.r[row + x] = kernels::detail::clamp01(base[0] + gx[0] * fx + gy[0] * fy);
            frame.g[row + x] = kernels::detail::clamp01(base[1] + gx[1] * fx + gy[1] * fy);
            frame.b[row + x] = kernels::detail::clamp01(base[2] + gx[2] * fx + gy[2] * fy);
        }
    }

    // One axis-aligned colored rectangle per declared object, in AU order.
    const auto& counts = scenario.object_counts[static_cast<std::size_t>(pidx)];
    for (std::size_t au = 0; au < counts.size(); ++au) {
        for (std::int64_t obj = 0; obj < counts[au]; ++obj) {
            const int x0 = static_cast<int>(rng.uniform() * side);
            const int y0 = static_cast<int>(rng.uniform() * side);
            const int w = std::max(1, static_cast<int>((0.05 + 0.2 * rng.uniform()) * side));
            const int h = std::max(1, static_cast<int>((0.05 + 0.2 * rng.uniform()) * side));
            const float cr = static_cast<float>(0.05 + 0.9 * rng.uniform());
            const float cg = static_cast<float>(0.05 + 0.9 * rng.uniform());
            const float cb = static_cast<float>(0.05 + 0.9 * rng.uniform());
            fill_rect(frame, x0, y0, w, h, cr, cg, cb);
        }
    }

    // Ambient luminance scaling; ambient is in (0,1] so values stay in range.
    const float amb = static_cast<float>(phase.ambient);
    if (amb != 1.0f) {
        const auto& K = kernels::active();
        const std::size_t n = frame.pixel_count();
        K.scale_clamp(frame.r.data(), frame.r.data(), n, amb);
        K.scale_clamp(frame.g.data(), frame.g.data(), n, amb);
        K.scale_clamp(frame.b.data(), frame.b.data(), n, amb);
    }
    return SceneView{std::move(frame), pidx};
}

Frame capture(const Frame& latent, const CameraSettings& settings) {
    Frame out = latent;
    const auto& K = kernels::active();
    const std::size_t n = out.pixel_count();
    float* planes[3] = {out.r.data(), out.g.data(), out.b.data()};

    // A stage at its default value (factor exactly 1) is the identity and is
    // skipped; the float expression for factor 1 would not be bit-exact.
    if (settings.brightness() != kSettingDefault) {
        const float f = static_cast<float>(settings.brightness()) / 50.0f;
        for (float* p : planes) K.scale_clamp(p, p, n, f);
    }

    std::vector<float> tmp(n);
    if (settings.contrast() != kSettingDefault) {
        const float f = static_cast<float>(settings.contrast()) / 50.0f;
        K.luminance(tmp.data(), planes[0], planes[1], planes[2], n);
        const float mu = static_cast<float>(K.sum(tmp.data(), n) / static_cast<double>(n));
        for (float* p : planes) K.toward_pivot_clamp(p, p, n, mu, f);
    }

    if (settings.color() != kSettingDefault) {
        const float f = static_cast<float>(settings.color()) / 50.0f;
        K.luminance(tmp.data(), planes[0], planes[1], planes[2], n);
        for (float* p : planes) K.toward_base_clamp(p, p, tmp.data(), n, f);
    }

    if (settings.sharpness() != kSettingDefault) {
        const float f = static_cast<float>(settings.sharpness()) / 50.0f;
        for (float* p : planes) {
            K.box_blur3(tmp.data(), p, out.size, out.size);
            K.toward_base_clamp(p, p, tmp.data(), n, f);
        }
    }
    return out;
}

FrameMeasurements measure(const Frame& frame) {
    const auto& K = kernels::active();
    const std::size_t n = frame.pixel_count();
    if (n == 0) throw ConfigError("measure: empty frame");
    const double dn = static_cast<double>(n);

    std::vector<float> lum(n), tmp(n);
    K.luminance(lum.data(), frame.r.data(), frame.g.data(), frame.b.data(), n);

    FrameMeasurements m;
    m.brightness = K.sum(lum.data(), n) / dn;

    K.sq_dev(tmp.data(), lum.data(), n, static_cast<float>(m.brightness));
    const double variance = K.sum(tmp.data(), n) / dn;
    m.contrast = std::min(std::sqrt(variance) / 0.5, 1.0);

    K.saturation(tmp.data(), frame.r.data(), frame.g.data(), frame.b.data(), n);
    m.color = std::min(K.sum(tmp.data(), n) / dn, 1.0);

    K.abs_laplacian(tmp.data(), lum.data(), frame.size, frame.size);
    m.sharpness = std::min(K.sum(tmp.data(), n) / dn * 0.25, 1.0);
    return m;
}

} // namespace elixir
