#pragma once

#include <cstddef>
#include <cstdint>

// Hot-loop kernels with a scalar reference implementation and SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected once at startup. Every variant
// is required to be bit-identical to the scalar reference:
//   - elementwise kernels evaluate mul/add unfused (no FMA, -ffp-contract=off),
//   - reductions accumulate in a fixed "striped-4" order: per row of work the
//     terms are consumed in chunks of four into four independent accumulators
//     (term j of a chunk goes to accumulator j, a short tail fills 0..r-1),
//     carried across the whole reduction and combined at the end as
//     (acc0+acc1)+(acc2+acc3),
//   - conv3x3 accumulates per output pixel in (ic, ky, kx) order starting
//     from the bias; SIMD variants vectorize across output pixels only.
// The equivalence suite asserts bit equality, so runtime dispatch never
// changes results, only throughput.

namespace yoda::kernels {

struct KernelTable {
    // out = a*x + b*y
    void (*axpby)(size_t n, double a, const double* x, double b, const double* y, double* out);
    // out = x + s*y
    void (*add_scaled)(size_t n, const double* x, double s, const double* y, double* out);
    // out = m ? a : b
    void (*select)(size_t n, const uint8_t* m, const double* a, const double* b, double* out);
    // out = m ? a : 0
    void (*mask_zero)(size_t n, const uint8_t* m, const double* a, double* out);
    void (*clamp01)(size_t n, const double* x, double* out);
    // out = m ? sign(a-b) : 0, sign(0) = 0
    void (*masked_sign)(size_t n, const uint8_t* m, const double* a, const double* b, double* out);

    double (*sum)(size_t n, const double* x);
    double (*sum_sq_diff)(size_t n, const double* a, const double* b);
    double (*masked_abs_diff)(size_t n, const uint8_t* m, const double* a, const double* b);
    double (*dot)(size_t n, const double* a, const double* b);

    // 3x3 convolution on zero-padded planes. Planes are (h+2)x(w+2) with the
    // one-pixel border kept at zero; in has cin planes, out cout planes and
    // only interior pixels of out are written. Weights are laid out
    // [oc][ic][ky][kx], bias one entry per output channel (may be null).
    void (*conv3x3)(const double* in, int cin, int h, int w,
                    const double* wts, const double* bias, int cout, double* out);
    // Gradients of conv3x3 wrt weights and bias: wg[oc][ic][ky][kx] and
    // bg[oc] are accumulated fresh (overwritten) from gout (padded layout).
    void (*conv3x3_wgrad)(const double* in, int cin, int h, int w,
                          const double* gout, int cout, double* wg, double* bg);
};

enum class Backend { scalar, avx2, neon };

const KernelTable& table();            // active backend (env YODA_KERNELS overrides)
const KernelTable& scalar_table();     // always available
const KernelTable* simd_table();       // null when the CPU/build has none
Backend active_backend();
const char* backend_name(Backend b);

inline size_t padded_plane_size(int h, int w) {
    return static_cast<size_t>(h + 2) * (w + 2);
}
inline size_t padded_index(int h, int w, int ci, int y, int x) {
    (void)h;
    return (static_cast<size_t>(ci) * (h + 2) + (y + 1)) * (w + 2) + (x + 1);
}

} // namespace yoda::kernels
