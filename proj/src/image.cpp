#include "yoda/image.hpp"

#include <cmath>

#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"

namespace yoda {

bool all_finite(const ImageTensor& t) {
    for (double v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

void clamp01_inplace(ImageTensor& t) {
    kernels::table().clamp01(t.size(), t.data.data(), t.data.data());
}

double channel_mean(const ImageTensor& t, int ci) {
    if (t.pixels() == 0) fail(errc::shape_mismatch, "channel_mean on empty tensor");
    return kernels::table().sum(t.pixels(), t.plane(ci)) / static_cast<double>(t.pixels());
}

std::vector<double> luma(const ImageTensor& t) {
    std::vector<double> y(t.pixels());
    if (t.c == 1) {
        const double* p = t.plane(0);
        y.assign(p, p + t.pixels());
        return y;
    }
    if (t.c != 3) fail(errc::shape_mismatch, "luma expects 1 or 3 channels");
    const double* r = t.plane(0);
    const double* g = t.plane(1);
    const double* b = t.plane(2);
    for (size_t i = 0; i < t.pixels(); ++i) y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    return y;
}

void validate_attention(const AttentionMap& a) {
    for (double v : a.v) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            fail(errc::value_range, "attention value outside [0,1]");
    }
}

} // namespace yoda
