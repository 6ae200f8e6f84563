#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace elixir {

// Deterministic random stream.
//
// The engine (std::mt19937_64) is fully specified by the standard; the
// distributions below are implemented by hand because the standard library's
// distribution objects are implementation-defined and would break
// byte-identical traces across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Multiply-shift; bias is < 2^-32 for the
    // small n used here.
    std::uint32_t uniform_int(std::uint32_t n) {
        const std::uint64_t x = eng_();
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(x) * n) >> 64);
    }

    // Gaussian via Box-Muller. Always consumes exactly two draws, no caching,
    // so the stream position is a pure function of the call count.
    double gaussian(double mean, double sigma) {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * mag * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Derive an independent stream seed from a base seed and a textual tag
    // (per-AU streams, per-phase scene streams, ...).
    static std::uint64_t derive(std::uint64_t seed, std::string_view tag) {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a 64
        for (const char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return split_mix(seed ^ h);
    }

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
        return split_mix(seed ^ (salt * 0x9e3779b97f4a7c15ull));
    }

private:
    static std::uint64_t split_mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 eng_;
};

} // namespace elixir
