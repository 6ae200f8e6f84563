#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace elixir {

// Square RGB frame, planar float storage, channel values in [0, 1].
// Planar layout keeps the enhancement kernels straight-line over each plane.
struct Frame {
    int size = 0;          // pixels per side
    std::int64_t timestamp = 0;
    std::vector<float> r, g, b;

    Frame() = default;
    explicit Frame(int side, std::int64_t t = 0)
        : size(side), timestamp(t),
          r(static_cast<std::size_t>(side) * side, 0.0f),
          g(static_cast<std::size_t>(side) * side, 0.0f),
          b(static_cast<std::size_t>(side) * side, 0.0f) {}

    std::size_t pixel_count() const { return r.size(); }

    bool operator==(const Frame& o) const {
        return size == o.size && r == o.r && g == o.g && b == o.b;
    }
};

// The measured frame statistics M_t, all scaled into [0, 1]:
//   brightness — mean luminance, luminance = (R + G + B) / 3
//   contrast   — standard deviation of luminance, divided by 0.5
//   color      — mean saturation, saturation = max(R,G,B) - min(R,G,B)
//   sharpness  — mean |4-neighbour Laplacian| of luminance, times 0.25, clamped
// These are a stand-in for whatever a real deployment would measure; state
// discretization is their only consumer.
struct FrameMeasurements {
    double brightness = 0.0;
    double contrast = 0.0;
    double color = 0.0;
    double sharpness = 0.0;

    std::array<double, 4> as_array() const {
        return {brightness, contrast, color, sharpness};
    }

    bool operator==(const FrameMeasurements&) const = default;
};

// Binary PPM (P6) dump for eyeballing frames; 8-bit per channel.
void write_ppm(std::ostream& out, const Frame& frame);

} // namespace elixir
