#include "elixir/frame.hpp"

#include <algorithm>
#include <ostream>

namespace elixir {

void write_ppm(std::ostream& out, const Frame& frame) {
    out << "P6\n" << frame.size << ' ' << frame.size << "\n255\n";
    const std::size_t n = frame.pixel_count();
    auto to_byte = [](float v) {
        const int b = static_cast<int>(v * 255.0f + 0.5f);
        return static_cast<unsigned char>(std::clamp(b, 0, 255));
    };
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char px[3] = {to_byte(frame.r[i]), to_byte(frame.g[i]),
                                     to_byte(frame.b[i])};
        out.write(reinterpret_cast<const char*>(px), 3);
    }
}

} // namespace elixir
