#include "yoda/resize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "yoda/errors.hpp"

namespace yoda {
namespace {

// Catmull-Rom (bicubic with a = -0.5)
double cubic_kernel(double t) {
    t = std::abs(t);
    if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
    if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

struct Taps {
    int first = 0;
    std::vector<double> w;
};

// filter taps for one output coordinate; kernel stretched by `support_scale`
// (>1 when shrinking) and weights normalized to sum 1
Taps make_taps(double center, double support_scale, int in_size) {
    Taps t;
    const double radius = 2.0 * support_scale;
    t.first = static_cast<int>(std::ceil(center - radius));
    const int last = static_cast<int>(std::floor(center + radius));
    t.w.resize(last - t.first + 1);
    double sum = 0.0;
    for (int i = t.first; i <= last; ++i) {
        const double v = cubic_kernel((i - center) / support_scale);
        t.w[i - t.first] = v;
        sum += v;
    }
    if (sum != 0.0)
        for (double& v : t.w) v /= sum;
    (void)in_size;
    return t;
}

} // namespace

ImageTensor bicubic_resize(const ImageTensor& img, int out_h, int out_w) {
    if (img.h < 1 || img.w < 1 || img.c < 1) fail(errc::shape_mismatch, "resize of empty image");
    if (out_h < 1 || out_w < 1) fail(errc::shape_mismatch, "resize to empty shape");
    if (out_h == img.h && out_w == img.w) return img;

    const double sx = static_cast<double>(img.w) / out_w;
    const double sy = static_cast<double>(img.h) / out_h;
    const double fsx = std::max(1.0, sx), fsy = std::max(1.0, sy);

    std::vector<Taps> xt(out_w), yt(out_h);
    for (int x = 0; x < out_w; ++x) xt[x] = make_taps((x + 0.5) * sx - 0.5, fsx, img.w);
    for (int y = 0; y < out_h; ++y) yt[y] = make_taps((y + 0.5) * sy - 0.5, fsy, img.h);

    ImageTensor out(out_h, out_w, img.c);
    std::vector<double> tmp(static_cast<size_t>(img.h) * out_w);
    for (int ci = 0; ci < img.c; ++ci) {
        const double* src = img.plane(ci);
        for (int y = 0; y < img.h; ++y) { // horizontal pass
            const double* row = src + static_cast<size_t>(y) * img.w;
            for (int x = 0; x < out_w; ++x) {
                const Taps& t = xt[x];
                double acc = 0.0;
                for (size_t k = 0; k < t.w.size(); ++k) {
                    const int xi = std::clamp(t.first + static_cast<int>(k), 0, img.w - 1);
                    acc += t.w[k] * row[xi];
                }
                tmp[static_cast<size_t>(y) * out_w + x] = acc;
            }
        }
        double* dst = out.plane(ci);
        for (int y = 0; y < out_h; ++y) { // vertical pass
            const Taps& t = yt[y];
            for (int x = 0; x < out_w; ++x) {
                double acc = 0.0;
                for (size_t k = 0; k < t.w.size(); ++k) {
                    const int yi = std::clamp(t.first + static_cast<int>(k), 0, img.h - 1);
                    acc += t.w[k] * tmp[static_cast<size_t>(yi) * out_w + x];
                }
                dst[static_cast<size_t>(y) * out_w + x] = acc;
            }
        }
    }
    return out;
}

} // namespace yoda
