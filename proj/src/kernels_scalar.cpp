#include "elixir/kernels.hpp"

#include "kernels_impl.hpp"

namespace elixir::kernels {
namespace {

using namespace detail;

void scale_clamp(float* dst, const float* src, std::size_t n, float f) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = scale_clamp_px(src[i], f);
}

void toward_pivot_clamp(float* dst, const float* src, std::size_t n,
                        float pivot, float f) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = toward_pivot_clamp_px(src[i], pivot, f);
}

void toward_base_clamp(float* dst, const float* src, const float* base,
                       std::size_t n, float f) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = toward_base_clamp_px(src[i], base[i], f);
}

void luminance(float* dst, const float* r, const float* g, const float* b,
               std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = luminance_px(r[i], g[i], b[i]);
}

void saturation(float* dst, const float* r, const float* g, const float* b,
                std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = saturation_px(r[i], g[i], b[i]);
}

void sq_dev(float* dst, const float* src, std::size_t n, float mean) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = sq_dev_px(src[i], mean);
}

void box_blur3(float* dst, const float* src, int w, int h) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            dst[static_cast<std::size_t>(y) * w + x] = box_blur3_px(src, w, h, x, y);
}

void abs_laplacian(float* dst, const float* src, int w, int h) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            dst[static_cast<std::size_t>(y) * w + x] =
                abs_laplacian_px(src, w, h, x, y);
}

double sum(const float* src, std::size_t n) {
    double acc[8] = {};
    for (std::size_t i = 0; i < n; ++i)
        acc[i & 7] += static_cast<double>(src[i]);
    return combine8(acc);
}

} // namespace

const Ops& scalar_ops() {
    static const Ops table{
        scale_clamp, toward_pivot_clamp, toward_base_clamp, luminance,
        saturation,  sq_dev,             box_blur3,         abs_laplacian,
        sum,
    };
    return table;
}

} // namespace elixir::kernels
