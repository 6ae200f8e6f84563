#pragma once

#include <cstddef>
#include <string_view>

namespace elixir::kernels {

// Pixel-plane primitives behind the camera simulation. Every kernel has a
// scalar reference implementation and (on x86-64) an AVX2 variant selected at
// runtime. The two backends are bit-exact equivalents, not approximations:
//
//  - element-wise kernels perform the same IEEE operations in the same order
//    per element;
//  - reductions accumulate into 8 interleaved double accumulators
//    (acc[i mod 8]) and combine them with the fixed tree
//    ((a0+a1)+(a2+a3)) + ((a4+a5)+(a6+a7)),
//    which an 8-lane float / 2x4-lane double vectorization reproduces exactly.
//
// The equivalence suite asserts bit equality on random planes, so traces do
// not depend on which backend the dispatcher picked.
struct Ops {
    // dst[i] = clamp01(f * src[i])
    void (*scale_clamp)(float* dst, const float* src, std::size_t n, float f);
    // dst[i] = clamp01(pivot + f * (src[i] - pivot))
    void (*toward_pivot_clamp)(float* dst, const float* src, std::size_t n,
                               float pivot, float f);
    // dst[i] = clamp01(base[i] + f * (src[i] - base[i]))
    void (*toward_base_clamp)(float* dst, const float* src, const float* base,
                              std::size_t n, float f);
    // dst[i] = ((r[i] + g[i]) + b[i]) * (1/3)
    void (*luminance)(float* dst, const float* r, const float* g,
                      const float* b, std::size_t n);
    // dst[i] = max(r,g,b) - min(r,g,b)
    void (*saturation)(float* dst, const float* r, const float* g,
                       const float* b, std::size_t n);
    // dst[i] = (src[i] - mean)^2
    void (*sq_dev)(float* dst, const float* src, std::size_t n, float mean);
    // 3x3 box blur with edge replication; dst and src must not alias.
    void (*box_blur3)(float* dst, const float* src, int w, int h);
    // dst = |4*c - (up + down) - (left + right)|, edge replication;
    // dst and src must not alias.
    void (*abs_laplacian)(float* dst, const float* src, int w, int h);
    // 8-accumulator interleaved sum, double precision.
    double (*sum)(const float* src, std::size_t n);
};

enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend b);

// True when this build carries AVX2 kernels and the CPU reports AVX2.
bool avx2_supported();

// Table for an explicit backend. Requesting Avx2 when unsupported throws
// ConfigError.
const Ops& ops(Backend b);

// Process-wide active backend. Initialized on first use: ELIXIR_KERNELS
// environment variable ("scalar", "avx2", "auto") if set, otherwise the best
// supported backend.
Backend active_backend();
void set_backend(Backend b);
const Ops& active();

} // namespace elixir::kernels
