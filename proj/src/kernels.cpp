#include "elixir/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "elixir/errors.hpp"

namespace elixir::kernels {

const Ops& scalar_ops(); // kernels_scalar.cpp
#if ELIXIR_HAVE_AVX2
const Ops& avx2_ops(); // kernels_avx2.cpp
#endif

const char* backend_name(Backend b) {
    return b == Backend::Scalar ? "scalar" : "avx2";
}

bool avx2_supported() {
#if ELIXIR_HAVE_AVX2
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Ops& ops(Backend b) {
    if (b == Backend::Scalar) return scalar_ops();
#if ELIXIR_HAVE_AVX2
    if (avx2_supported()) return avx2_ops();
#endif
    throw ConfigError("avx2 kernel backend requested but not supported on this CPU/build");
}

namespace {

Backend initial_backend() {
    if (const char* env = std::getenv("ELIXIR_KERNELS")) {
        const std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2") {
            if (!avx2_supported())
                throw ConfigError("ELIXIR_KERNELS=avx2 but AVX2 is unavailable");
            return Backend::Avx2;
        }
        if (!v.empty() && v != "auto")
            throw ConfigError("unknown ELIXIR_KERNELS value: '" + v + "'");
    }
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> b{initial_backend()};
    return b;
}

} // namespace

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    (void)ops(b); // validates availability
    current().store(b, std::memory_order_relaxed);
}

const Ops& active() { return ops(active_backend()); }

} // namespace elixir::kernels
