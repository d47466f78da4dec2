#include <cstdlib>
#include <string>

#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"

namespace yoda::kernels {

#if defined(YODA_BUILD_AVX2)
const KernelTable* avx2_table_impl();
#endif
#if defined(__aarch64__)
const KernelTable* neon_table_impl();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(YODA_BUILD_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Backend pick_backend() {
    const char* env = std::getenv("YODA_KERNELS");
    const std::string want = env ? env : "";
    if (want == "scalar") return Backend::scalar;
    if (want == "avx2") {
        if (!cpu_has_avx2()) fail(errc::bad_config, "YODA_KERNELS=avx2 but AVX2 is unavailable");
        return Backend::avx2;
    }
    if (want == "neon") {
#if defined(__aarch64__)
        return Backend::neon;
#else
        fail(errc::bad_config, "YODA_KERNELS=neon but NEON is unavailable");
#endif
    }
    if (!want.empty() && want != "auto")
        fail(errc::bad_config, "unknown YODA_KERNELS value: " + want);
    if (cpu_has_avx2()) return Backend::avx2;
#if defined(__aarch64__)
    return Backend::neon;
#else
    return Backend::scalar;
#endif
}

} // namespace

Backend active_backend() {
    static const Backend b = pick_backend();
    return b;
}

const KernelTable* simd_table() {
#if defined(YODA_BUILD_AVX2)
    if (cpu_has_avx2()) return avx2_table_impl();
#endif
#if defined(__aarch64__)
    return neon_table_impl();
#endif
    return nullptr;
}

const KernelTable& table() {
    switch (active_backend()) {
#if defined(YODA_BUILD_AVX2)
    case Backend::avx2: return *avx2_table_impl();
#endif
#if defined(__aarch64__)
    case Backend::neon: return *neon_table_impl();
#endif
    default: return scalar_table();
    }
}

const char* backend_name(Backend b) {
    switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
    }
    return "?";
}

} // namespace yoda::kernels
