#include "yoda/kernels.hpp"

// Reference kernels. These define the numeric contract for every backend:
// identical association order per output value, striped-4 reductions. Keep
// the loops dumb; the SIMD variants mirror them lane for lane.

namespace yoda::kernels {
namespace {

void axpby_k(size_t n, double a, const double* x, double b, const double* y, double* out) {
    for (size_t i = 0; i < n; ++i) out[i] = (a * x[i]) + (b * y[i]);
}

void add_scaled_k(size_t n, const double* x, double s, const double* y, double* out) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i] + (s * y[i]);
}

void select_k(size_t n, const uint8_t* m, const double* a, const double* b, double* out) {
    for (size_t i = 0; i < n; ++i) out[i] = m[i] ? a[i] : b[i];
}

void mask_zero_k(size_t n, const uint8_t* m, const double* a, double* out) {
    for (size_t i = 0; i < n; ++i) out[i] = m[i] ? a[i] : 0.0;
}

void clamp01_k(size_t n, const double* x, double* out) {
    for (size_t i = 0; i < n; ++i) {
        double v = x[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        out[i] = v; // NaN passes through both compares untouched
    }
}

void masked_sign_k(size_t n, const uint8_t* m, const double* a, const double* b, double* out) {
    for (size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        double s = 0.0;
        if (d > 0.0) s = 1.0;
        if (d < 0.0) s = -1.0;
        out[i] = m[i] ? s : 0.0;
    }
}

struct Acc4 {
    double a[4] = {0.0, 0.0, 0.0, 0.0};
    double total() const { return (a[0] + a[1]) + (a[2] + a[3]); }
};

double sum_k(size_t n, const double* x) {
    Acc4 acc;
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int j = 0; j < 4; ++j) acc.a[j] += x[i + j];
    for (size_t j = 0; i + j < n; ++j) acc.a[j] += x[i + j];
    return acc.total();
}

double sum_sq_diff_k(size_t n, const double* a, const double* b) {
    Acc4 acc;
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int j = 0; j < 4; ++j) {
            const double d = a[i + j] - b[i + j];
            acc.a[j] += d * d;
        }
    }
    for (size_t j = 0; i + j < n; ++j) {
        const double d = a[i + j] - b[i + j];
        acc.a[j] += d * d;
    }
    return acc.total();
}

double masked_abs_diff_k(size_t n, const uint8_t* m, const double* a, const double* b) {
    Acc4 acc;
    auto term = [&](size_t k) {
        const double d = a[k] - b[k];
        return m[k] ? (d < 0.0 ? -d : d) : 0.0;
    };
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int j = 0; j < 4; ++j) acc.a[j] += term(i + j);
    for (size_t j = 0; i + j < n; ++j) acc.a[j] += term(i + j);
    return acc.total();
}

double dot_k(size_t n, const double* a, const double* b) {
    Acc4 acc;
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int j = 0; j < 4; ++j) acc.a[j] += a[i + j] * b[i + j];
    for (size_t j = 0; i + j < n; ++j) acc.a[j] += a[i + j] * b[i + j];
    return acc.total();
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
            for (int x = 0; x < w; ++x) {
                double acc = bv;
                const double* wp = wbase;
                for (int ic = 0; ic < cin; ++ic) {
                    // padded coords: window top-left is [y][x]
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
    for (int oc = 0; oc < cout; ++oc) {
        const double* gp = gout + static_cast<size_t>(oc) * plane;
        for (int ic = 0; ic < cin; ++ic) {
            const double* inp = in + static_cast<size_t>(ic) * plane;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    Acc4 acc;
                    for (int y = 0; y < h; ++y) {
                        const double* grow = gp + static_cast<size_t>(y + 1) * pw + 1;
                        const double* irow = inp + static_cast<size_t>(y + ky) * pw + kx;
                        int x = 0;
                        for (; x + 4 <= w; x += 4)
                            for (int j = 0; j < 4; ++j) acc.a[j] += grow[x + j] * irow[x + j];
                        for (int j = 0; x + j < w; ++j) acc.a[j] += grow[x + j] * irow[x + j];
                    }
                    wg[((static_cast<size_t>(oc) * cin + ic) * 3 + ky) * 3 + kx] = acc.total();
                }
            }
        }
        Acc4 acc;
        for (int y = 0; y < h; ++y) {
            const double* grow = gp + static_cast<size_t>(y + 1) * pw + 1;
            int x = 0;
            for (; x + 4 <= w; x += 4)
                for (int j = 0; j < 4; ++j) acc.a[j] += grow[x + j];
            for (int j = 0; x + j < w; ++j) acc.a[j] += grow[x + j];
        }
        bg[oc] = acc.total();
    }
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable t = {
        axpby_k, add_scaled_k, select_k, mask_zero_k, clamp01_k, masked_sign_k,
        sum_k, sum_sq_diff_k, masked_abs_diff_k, dot_k,
        conv3x3_k, conv3x3_wgrad_k,
    };
    return t;
}

} // namespace yoda::kernels
