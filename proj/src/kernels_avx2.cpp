#include <immintrin.h>

#include <cstring>

#include "yoda/kernels.hpp"

// AVX2 variants. Deliberately FMA-free (separate mul/add) and lane-striped so
// every value is produced by the exact same sequence of IEEE operations as the
// scalar reference. Vector width 4 matches the striped-4 reduction contract.

namespace yoda::kernels {
namespace {

inline __m256d load_mask4(const uint8_t* m) {
    uint32_t packed;
    std::memcpy(&packed, m, 4);
    const __m128i bytes = _mm_cvtsi32_si128(static_cast<int>(packed));
    const __m256i lanes = _mm256_cvtepu8_epi64(bytes);
    return _mm256_castsi256_pd(_mm256_cmpgt_epi64(lanes, _mm256_setzero_si256()));
}

void axpby_k(size_t n, double a, const double* x, double b, const double* y, double* out) {
    const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                        _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(out + i, t);
    }
    for (; i < n; ++i) out[i] = (a * x[i]) + (b * y[i]);
}

void add_scaled_k(size_t n, const double* x, double s, const double* y, double* out) {
    const __m256d vs = _mm256_set1_pd(s);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_add_pd(_mm256_loadu_pd(x + i),
                                        _mm256_mul_pd(vs, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(out + i, t);
    }
    for (; i < n; ++i) out[i] = x[i] + (s * y[i]);
}

void select_k(size_t n, const uint8_t* m, const double* a, const double* b, double* out) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mk = load_mask4(m + i);
        _mm256_storeu_pd(out + i,
                         _mm256_blendv_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(a + i), mk));
    }
    for (; i < n; ++i) out[i] = m[i] ? a[i] : b[i];
}

void mask_zero_k(size_t n, const uint8_t* m, const double* a, double* out) {
    const __m256d zero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mk = load_mask4(m + i);
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(zero, _mm256_loadu_pd(a + i), mk));
    }
    for (; i < n; ++i) out[i] = m[i] ? a[i] : 0.0;
}

void clamp01_k(size_t n, const double* x, double* out) {
    const __m256d zero = _mm256_setzero_pd(), one = _mm256_set1_pd(1.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        v = _mm256_blendv_pd(v, zero, _mm256_cmp_pd(v, zero, _CMP_LT_OQ));
        v = _mm256_blendv_pd(v, one, _mm256_cmp_pd(v, one, _CMP_GT_OQ));
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i) {
        double v = x[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        out[i] = v;
    }
}

void masked_sign_k(size_t n, const uint8_t* m, const double* a, const double* b, double* out) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0), neg = _mm256_set1_pd(-1.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d s = _mm256_or_pd(
            _mm256_and_pd(_mm256_cmp_pd(d, zero, _CMP_GT_OQ), one),
            _mm256_and_pd(_mm256_cmp_pd(d, zero, _CMP_LT_OQ), neg));
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(zero, s, load_mask4(m + i)));
    }
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        double s = 0.0;
        if (d > 0.0) s = 1.0;
        if (d < 0.0) s = -1.0;
        out[i] = m[i] ? s : 0.0;
    }
}

inline double hsum_striped(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_k(size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (size_t j = 0; i + j < n; ++j) lane[j] += x[i + j];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_sq_diff_k(size_t n, const double* a, const double* b) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (size_t j = 0; i + j < n; ++j) {
        const double d = a[i + j] - b[i + j];
        lane[j] += d * d;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double masked_abs_diff_k(size_t n, const uint8_t* m, const double* a, const double* b) {
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d t = _mm256_blendv_pd(_mm256_setzero_pd(),
                                           _mm256_and_pd(d, absmask), load_mask4(m + i));
        acc = _mm256_add_pd(acc, t);
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (size_t j = 0; i + j < n; ++j) {
        const double d = a[i + j] - b[i + j];
        lane[j] += m[i + j] ? (d < 0.0 ? -d : d) : 0.0;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_k(size_t n, const double* a, const double* b) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (size_t j = 0; i + j < n; ++j) lane[j] += a[i + j] * b[i + j];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void conv3x3_k(const double* in, int cin, int h, int w,
               const double* wts, const double* bias, int cout, double* out) {
    const int pw = w + 2;
    const size_t plane = padded_plane_size(h, w);
    for (int oc = 0; oc < cout; ++oc) {
        double* op = out + static_cast<size_t>(oc) * plane;
        const double* wbase = wts + static_cast<size_t>(oc) * cin * 9;
        const double bv = bias ? bias[oc] : 0.0;
        for (int y = 0; y < h; ++y) {
            double* orow = op + static_cast<size_t>(y + 1) * pw + 1;
            int x = 0;
            for (; x + 4 <= w; x += 4) {
                __m256d acc = _mm256_set1_pd(bv);
                const double* wp = wbase;
                for (int ic = 0; ic < cin; ++ic) {
                    const double* ip = in + ic * plane + static_cast<size_t>(y) * pw + x;
                    for (int ky = 0; ky < 3; ++ky) {
                        const double* irow = ip + static_cast<size_t>(ky) * pw;
                        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(wp[0]),
                                                               _mm256_loadu_pd(irow)));
                        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(wp[1]),
                                                               _mm256_loadu_pd(irow + 1)));
                        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(wp[2]),
                                                               _mm256_loadu_pd(irow + 2)));
                        wp += 3;
                    }
                }
                _mm256_storeu_pd(orow + x, acc);
            }
            for (; x < w; ++x) {
                double acc = bv;
                const double* wp = wbase;
                for (int ic = 0; ic < cin; ++ic) {
                    const double* ip = in + ic * plane + static_cast<size_t>(y) * pw + x;
                    for (int ky = 0; ky < 3; ++ky) {
                        const double* irow = ip + static_cast<size_t>(ky) * pw;
                        acc += wp[0] * irow[0];
                        acc += wp[1] * irow[1];
                        acc += wp[2] * irow[2];
                        wp += 3;
                    }
                }
                orow[x] = acc;
            }
        }
    }
}

void conv3x3_wgrad_k(const double* in, int cin, int h, int w,
                     const double* gout, int cout, double* wg, double* bg) {
    const int pw = w + 2;
    const size_t plane = padded_plane_size(h, w);
    const bool tail = (w % 4) != 0;
    for (int oc = 0; oc < cout; ++oc) {
        const double* gp = gout + static_cast<size_t>(oc) * plane;
        for (int ic = 0; ic < cin; ++ic) {
            const double* inp = in + static_cast<size_t>(ic) * plane;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    __m256d acc = _mm256_setzero_pd();
                    for (int y = 0; y < h; ++y) {
                        const double* grow = gp + static_cast<size_t>(y + 1) * pw + 1;
                        const double* irow = inp + static_cast<size_t>(y + ky) * pw + kx;
                        int x = 0;
                        for (; x + 4 <= w; x += 4)
                            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(grow + x),
                                                                   _mm256_loadu_pd(irow + x)));
                        if (tail) {
                            alignas(32) double lane[4];
                            _mm256_store_pd(lane, acc);
                            for (int j = 0; x + j < w; ++j) lane[j] += grow[x + j] * irow[x + j];
                            acc = _mm256_load_pd(lane);
                        }
                    }
                    wg[((static_cast<size_t>(oc) * cin + ic) * 3 + ky) * 3 + kx] = hsum_striped(acc);
                }
            }
        }
        __m256d acc = _mm256_setzero_pd();
        for (int y = 0; y < h; ++y) {
            const double* grow = gp + static_cast<size_t>(y + 1) * pw + 1;
            int x = 0;
            for (; x + 4 <= w; x += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(grow + x));
            if (tail) {
                alignas(32) double lane[4];
                _mm256_store_pd(lane, acc);
                for (int j = 0; x + j < w; ++j) lane[j] += grow[x + j];
                acc = _mm256_load_pd(lane);
            }
        }
        bg[oc] = hsum_striped(acc);
    }
}

} // namespace

const KernelTable* avx2_table_impl() {
    static const KernelTable t = {
        axpby_k, add_scaled_k, select_k, mask_zero_k, clamp01_k, masked_sign_k,
        sum_k, sum_sq_diff_k, masked_abs_diff_k, dot_k,
        conv3x3_k, conv3x3_wgrad_k,
    };
    return &t;
}

} // namespace yoda::kernels
