#pragma once

// Shared scalar bodies for the pixel kernels. The scalar backend is built
// from these directly; the AVX2 backend reuses them for row borders and
// vector tails so both backends execute identical IEEE operations wherever
// they overlap. Any change to an expression here is an ABI-level change for
// saved traces: keep operation order intact.

#include <cmath>
#include <cstddef>

namespace elixir::kernels::detail {

inline float clamp01(float x) {
    x = x < 1.0f ? x : 1.0f;
    return x > 0.0f ? x : 0.0f;
}

inline float scale_clamp_px(float s, float f) { return clamp01(f * s); }

inline float toward_pivot_clamp_px(float s, float pivot, float f) {
    return clamp01(pivot + f * (s - pivot));
}

inline float toward_base_clamp_px(float s, float base, float f) {
    return clamp01(base + f * (s - base));
}

inline float luminance_px(float r, float g, float b) {
    return ((r + g) + b) * (1.0f / 3.0f);
}

inline float saturation_px(float r, float g, float b) {
    float hi = r > g ? r : g;
    hi = hi > b ? hi : b;
    float lo = r < g ? r : g;
    lo = lo < b ? lo : b;
    return hi - lo;
}

inline float sq_dev_px(float s, float mean) {
    const float t = s - mean;
    return t * t;
}

inline int clamp_index(int i, int last) {
    if (i < 0) return 0;
    return i > last ? last : i;
}

// One blurred pixel with replicated edges: rows summed left to right, then
// rows combined top to bottom.
inline float box_blur3_px(const float* src, int w, int h, int x, int y) {
    const int xm = clamp_index(x - 1, w - 1);
    const int xp = clamp_index(x + 1, w - 1);
    const int ym = clamp_index(y - 1, h - 1);
    const int yp = clamp_index(y + 1, h - 1);
    const float* r0 = src + static_cast<std::size_t>(ym) * w;
    const float* r1 = src + static_cast<std::size_t>(y) * w;
    const float* r2 = src + static_cast<std::size_t>(yp) * w;
    const float t0 = (r0[xm] + r0[x]) + r0[xp];
    const float t1 = (r1[xm] + r1[x]) + r1[xp];
    const float t2 = (r2[xm] + r2[x]) + r2[xp];
    return ((t0 + t1) + t2) * (1.0f / 9.0f);
}

inline float abs_laplacian_px(const float* src, int w, int h, int x, int y) {
    const int xm = clamp_index(x - 1, w - 1);
    const int xp = clamp_index(x + 1, w - 1);
    const int ym = clamp_index(y - 1, h - 1);
    const int yp = clamp_index(y + 1, h - 1);
    const float* row = src + static_cast<std::size_t>(y) * w;
    const float up = src[static_cast<std::size_t>(ym) * w + x];
    const float down = src[static_cast<std::size_t>(yp) * w + x];
    const float left = row[xm];
    const float right = row[xp];
    const float t = 4.0f * row[x] - ((up + down) + (left + right));
    return std::fabs(t);
}

// Reduction contract shared by both backends: interleaved accumulators plus
// a fixed combine tree.
inline double combine8(const double acc[8]) {
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
           ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

} // namespace elixir::kernels::detail
