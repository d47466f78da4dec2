#include <arm_neon.h>

#include "yoda/kernels.hpp"

// NEON variants (aarch64). Two q-registers emulate the 4-lane stripe of the
// reduction contract; mul/add stay unfused to match the scalar reference.
// Conv kernels fall back to the scalar reference on this backend.

namespace yoda::kernels {
namespace {

void axpby_k(size_t n, double a, const double* x, double b, const double* y, double* out) {
    const float64x2_t va = vdupq_n_f64(a), vb = vdupq_n_f64(b);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t t = vaddq_f64(vmulq_f64(va, vld1q_f64(x + i)),
                                        vmulq_f64(vb, vld1q_f64(y + i)));
        vst1q_f64(out + i, t);
    }
    for (; i < n; ++i) out[i] = (a * x[i]) + (b * y[i]);
}

void add_scaled_k(size_t n, const double* x, double s, const double* y, double* out) {
    const float64x2_t vs = vdupq_n_f64(s);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t t = vaddq_f64(vld1q_f64(x + i), vmulq_f64(vs, vld1q_f64(y + i)));
        vst1q_f64(out + i, t);
    }
    for (; i < n; ++i) out[i] = x[i] + (s * y[i]);
}

inline uint64x2_t load_mask2(const uint8_t* m) {
    const uint64x2_t lanes = {static_cast<uint64_t>(m[0]), static_cast<uint64_t>(m[1])};
    return vcgtq_u64(lanes, vdupq_n_u64(0));
}

void select_k(size_t n, const uint8_t* m, const double* a, const double* b, double* out) {
    size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vbslq_f64(load_mask2(m + i), vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = m[i] ? a[i] : b[i];
}

void mask_zero_k(size_t n, const uint8_t* m, const double* a, double* out) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vbslq_f64(load_mask2(m + i), vld1q_f64(a + i), zero));
    for (; i < n; ++i) out[i] = m[i] ? a[i] : 0.0;
}

void clamp01_k(size_t n, const double* x, double* out) {
    const float64x2_t zero = vdupq_n_f64(0.0), one = vdupq_n_f64(1.0);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        v = vbslq_f64(vcltq_f64(v, zero), zero, v);
        v = vbslq_f64(vcgtq_f64(v, one), one, v);
        vst1q_f64(out + i, v);
    }
    for (; i < n; ++i) {
        double v = x[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        out[i] = v;
    }
}

void masked_sign_k(size_t n, const uint8_t* m, const double* a, const double* b, double* out) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    const float64x2_t one = vdupq_n_f64(1.0), neg = vdupq_n_f64(-1.0);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        float64x2_t s = vbslq_f64(vcgtq_f64(d, zero), one, zero);
        s = vbslq_f64(vcltq_f64(d, zero), neg, s);
        vst1q_f64(out + i, vbslq_f64(load_mask2(m + i), s, zero));
    }
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        double s = 0.0;
        if (d > 0.0) s = 1.0;
        if (d < 0.0) s = -1.0;
        out[i] = m[i] ? s : 0.0;
    }
}

struct VAcc4 {
    float64x2_t lo = vdupq_n_f64(0.0); // lanes 0,1
    float64x2_t hi = vdupq_n_f64(0.0); // lanes 2,3
};

double sum_k(size_t n, const double* x) {
    VAcc4 acc;
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc.lo = vaddq_f64(acc.lo, vld1q_f64(x + i));
        acc.hi = vaddq_f64(acc.hi, vld1q_f64(x + i + 2));
    }
    double lane[4] = {vgetq_lane_f64(acc.lo, 0), vgetq_lane_f64(acc.lo, 1),
                      vgetq_lane_f64(acc.hi, 0), vgetq_lane_f64(acc.hi, 1)};
    for (size_t j = 0; i + j < n; ++j) lane[j] += x[i + j];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_sq_diff_k(size_t n, const double* a, const double* b) {
    VAcc4 acc;
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc.lo = vaddq_f64(acc.lo, vmulq_f64(d0, d0));
        acc.hi = vaddq_f64(acc.hi, vmulq_f64(d1, d1));
    }
    double lane[4] = {vgetq_lane_f64(acc.lo, 0), vgetq_lane_f64(acc.lo, 1),
                      vgetq_lane_f64(acc.hi, 0), vgetq_lane_f64(acc.hi, 1)};
    for (size_t j = 0; i + j < n; ++j) {
        const double d = a[i + j] - b[i + j];
        lane[j] += d * d;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_k(size_t n, const double* a, const double* b) {
    VAcc4 acc;
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc.lo = vaddq_f64(acc.lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc.hi = vaddq_f64(acc.hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double lane[4] = {vgetq_lane_f64(acc.lo, 0), vgetq_lane_f64(acc.lo, 1),
                      vgetq_lane_f64(acc.hi, 0), vgetq_lane_f64(acc.hi, 1)};
    for (size_t j = 0; i + j < n; ++j) lane[j] += a[i + j] * b[i + j];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

} // namespace

const KernelTable* neon_table_impl() {
    static const KernelTable t = [] {
        KernelTable n = scalar_table(); // conv + masked_abs_diff stay scalar
        n.axpby = axpby_k;
        n.add_scaled = add_scaled_k;
        n.select = select_k;
        n.mask_zero = mask_zero_k;
        n.clamp01 = clamp01_k;
        n.masked_sign = masked_sign_k;
        n.sum = sum_k;
        n.sum_sq_diff = sum_sq_diff_k;
        n.dot = dot_k;
        return n;
    }();
    return &t;
}

} // namespace yoda::kernels
