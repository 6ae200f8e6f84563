// AVX2 variants of the pixel kernels. Only compiled on x86-64; this TU gets
// -mavx2 (no -mfma: the scalar reference has no fused ops, so neither may we).
// Borders and vector tails run the shared scalar bodies from kernels_impl.hpp,
// keeping both backends bit-identical over the full plane.

#include "elixir/kernels.hpp"

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace elixir::kernels {
namespace {

using namespace detail;

inline __m256 clamp01_v(__m256 x) {
    const __m256 ones = _mm256_set1_ps(1.0f);
    const __m256 zeros = _mm256_setzero_ps();
    return _mm256_max_ps(_mm256_min_ps(x, ones), zeros);
}

void scale_clamp(float* dst, const float* src, std::size_t n, float f) {
    const __m256 fv = _mm256_set1_ps(f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 s = _mm256_loadu_ps(src + i);
        _mm256_storeu_ps(dst + i, clamp01_v(_mm256_mul_ps(fv, s)));
    }
    for (; i < n; ++i) dst[i] = scale_clamp_px(src[i], f);
}

void toward_pivot_clamp(float* dst, const float* src, std::size_t n,
                        float pivot, float f) {
    const __m256 fv = _mm256_set1_ps(f);
    const __m256 pv = _mm256_set1_ps(pivot);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 s = _mm256_loadu_ps(src + i);
        const __m256 t = _mm256_add_ps(pv, _mm256_mul_ps(fv, _mm256_sub_ps(s, pv)));
        _mm256_storeu_ps(dst + i, clamp01_v(t));
    }
    for (; i < n; ++i) dst[i] = toward_pivot_clamp_px(src[i], pivot, f);
}

void toward_base_clamp(float* dst, const float* src, const float* base,
                       std::size_t n, float f) {
    const __m256 fv = _mm256_set1_ps(f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 s = _mm256_loadu_ps(src + i);
        const __m256 bv = _mm256_loadu_ps(base + i);
        const __m256 t = _mm256_add_ps(bv, _mm256_mul_ps(fv, _mm256_sub_ps(s, bv)));
        _mm256_storeu_ps(dst + i, clamp01_v(t));
    }
    for (; i < n; ++i) dst[i] = toward_base_clamp_px(src[i], base[i], f);
}

void luminance(float* dst, const float* r, const float* g, const float* b,
               std::size_t n) {
    const __m256 third = _mm256_set1_ps(1.0f / 3.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 rv = _mm256_loadu_ps(r + i);
        const __m256 gv = _mm256_loadu_ps(g + i);
        const __m256 bv = _mm256_loadu_ps(b + i);
        const __m256 t = _mm256_add_ps(_mm256_add_ps(rv, gv), bv);
        _mm256_storeu_ps(dst + i, _mm256_mul_ps(t, third));
    }
    for (; i < n; ++i) dst[i] = luminance_px(r[i], g[i], b[i]);
}

void saturation(float* dst, const float* r, const float* g, const float* b,
                std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 rv = _mm256_loadu_ps(r + i);
        const __m256 gv = _mm256_loadu_ps(g + i);
        const __m256 bv = _mm256_loadu_ps(b + i);
        const __m256 hi = _mm256_max_ps(_mm256_max_ps(rv, gv), bv);
        const __m256 lo = _mm256_min_ps(_mm256_min_ps(rv, gv), bv);
        _mm256_storeu_ps(dst + i, _mm256_sub_ps(hi, lo));
    }
    for (; i < n; ++i) dst[i] = saturation_px(r[i], g[i], b[i]);
}

void sq_dev(float* dst, const float* src, std::size_t n, float mean) {
    const __m256 mv = _mm256_set1_ps(mean);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 t = _mm256_sub_ps(_mm256_loadu_ps(src + i), mv);
        _mm256_storeu_ps(dst + i, _mm256_mul_ps(t, t));
    }
    for (; i < n; ++i) dst[i] = sq_dev_px(src[i], mean);
}

void box_blur3(float* dst, const float* src, int w, int h) {
    const __m256 inv9 = _mm256_set1_ps(1.0f / 9.0f);
    for (int y = 0; y < h; ++y) {
        float* out = dst + static_cast<std::size_t>(y) * w;
        if (y == 0 || y == h - 1 || w < 11) {
            for (int x = 0; x < w; ++x) out[x] = box_blur3_px(src, w, h, x, y);
            continue;
        }
        const float* r0 = src + static_cast<std::size_t>(y - 1) * w;
        const float* r1 = src + static_cast<std::size_t>(y) * w;
        const float* r2 = src + static_cast<std::size_t>(y + 1) * w;
        out[0] = box_blur3_px(src, w, h, 0, y);
        int x = 1;
        for (; x + 8 <= w - 1; x += 8) {
            const __m256 t0 = _mm256_add_ps(
                _mm256_add_ps(_mm256_loadu_ps(r0 + x - 1), _mm256_loadu_ps(r0 + x)),
                _mm256_loadu_ps(r0 + x + 1));
            const __m256 t1 = _mm256_add_ps(
                _mm256_add_ps(_mm256_loadu_ps(r1 + x - 1), _mm256_loadu_ps(r1 + x)),
                _mm256_loadu_ps(r1 + x + 1));
            const __m256 t2 = _mm256_add_ps(
                _mm256_add_ps(_mm256_loadu_ps(r2 + x - 1), _mm256_loadu_ps(r2 + x)),
                _mm256_loadu_ps(r2 + x + 1));
            const __m256 s = _mm256_add_ps(_mm256_add_ps(t0, t1), t2);
            _mm256_storeu_ps(out + x, _mm256_mul_ps(s, inv9));
        }
        for (; x < w; ++x) out[x] = box_blur3_px(src, w, h, x, y);
    }
}

void abs_laplacian(float* dst, const float* src, int w, int h) {
    const __m256 four = _mm256_set1_ps(4.0f);
    const __m256 sign_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
    for (int y = 0; y < h; ++y) {
        float* out = dst + static_cast<std::size_t>(y) * w;
        if (y == 0 || y == h - 1 || w < 11) {
            for (int x = 0; x < w; ++x) out[x] = abs_laplacian_px(src, w, h, x, y);
            continue;
        }
        const float* up = src + static_cast<std::size_t>(y - 1) * w;
        const float* row = src + static_cast<std::size_t>(y) * w;
        const float* down = src + static_cast<std::size_t>(y + 1) * w;
        out[0] = abs_laplacian_px(src, w, h, 0, y);
        int x = 1;
        for (; x + 8 <= w - 1; x += 8) {
            const __m256 c = _mm256_loadu_ps(row + x);
            const __m256 vert = _mm256_add_ps(_mm256_loadu_ps(up + x),
                                              _mm256_loadu_ps(down + x));
            const __m256 horiz = _mm256_add_ps(_mm256_loadu_ps(row + x - 1),
                                               _mm256_loadu_ps(row + x + 1));
            const __m256 t = _mm256_sub_ps(_mm256_mul_ps(four, c),
                                           _mm256_add_ps(vert, horiz));
            _mm256_storeu_ps(out + x, _mm256_and_ps(t, sign_mask));
        }
        for (; x < w; ++x) out[x] = abs_laplacian_px(src, w, h, x, y);
    }
}

double sum(const float* src, std::size_t n) {
    __m256d acc_lo = _mm256_setzero_pd(); // accumulators for i mod 8 in 0..3
    __m256d acc_hi = _mm256_setzero_pd(); // accumulators for i mod 8 in 4..7
    const std::size_t n8 = n & ~static_cast<std::size_t>(7);
    for (std::size_t i = 0; i < n8; i += 8) {
        const __m256 x = _mm256_loadu_ps(src + i);
        acc_lo = _mm256_add_pd(acc_lo, _mm256_cvtps_pd(_mm256_castps256_ps128(x)));
        acc_hi = _mm256_add_pd(acc_hi, _mm256_cvtps_pd(_mm256_extractf128_ps(x, 1)));
    }
    double acc[8];
    _mm256_storeu_pd(acc, acc_lo);
    _mm256_storeu_pd(acc + 4, acc_hi);
    for (std::size_t i = n8; i < n; ++i)
        acc[i & 7] += static_cast<double>(src[i]);
    return combine8(acc);
}

} // namespace

const Ops& avx2_ops() {
    static const Ops table{
        scale_clamp, toward_pivot_clamp, toward_base_clamp, luminance,
        saturation,  sq_dev,             box_blur3,         abs_laplacian,
        sum,
    };
    return table;
}

} // namespace elixir::kernels
