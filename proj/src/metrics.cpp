#include "yoda/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"

namespace yoda {
namespace {

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* who) {
    if (!a.same_shape(b)) fail(errc::shape_mismatch, std::string(who) + ": shape mismatch");
}

} // namespace

double psnr(const ImageTensor& a, const ImageTensor& ref) {
    require_same_shape(a, ref, "psnr");
    if (a.size() == 0) fail(errc::shape_mismatch, "psnr of empty image");
    // running mean keeps constant squared differences exact for any pixel count
    double mse = 0.0;
    const double* pa = a.data.data();
    const double* pb = ref.data.data();
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = pa[i] - pb[i];
        mse += (d * d - mse) / static_cast<double>(i + 1);
    }
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageTensor& a, const ImageTensor& ref) {
    require_same_shape(a, ref, "ssim");
    constexpr int kWin = 8;
    if (a.h < kWin || a.w < kWin) fail(errc::shape_mismatch, "ssim needs at least 8x8");
    constexpr double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    const std::vector<double> pa = luma(a), pb = luma(ref);
    const int h = a.h, w = a.w;

    // summed-area tables, one guard row/col of zeros
    const int sw = w + 1;
    auto build = [&](auto&& f) {
        std::vector<double> s(static_cast<size_t>(h + 1) * sw, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                s[static_cast<size_t>(y + 1) * sw + (x + 1)] =
                    f(static_cast<size_t>(y) * w + x) + s[static_cast<size_t>(y) * sw + (x + 1)] +
                    s[static_cast<size_t>(y + 1) * sw + x] - s[static_cast<size_t>(y) * sw + x];
        return s;
    };
    const auto sa = build([&](size_t i) { return pa[i]; });
    const auto sb = build([&](size_t i) { return pb[i]; });
    const auto saa = build([&](size_t i) { return pa[i] * pa[i]; });
    const auto sbb = build([&](size_t i) { return pb[i] * pb[i]; });
    const auto sab = build([&](size_t i) { return pa[i] * pb[i]; });
    auto box = [&](const std::vector<double>& s, int y, int x) {
        return s[static_cast<size_t>(y + kWin) * sw + (x + kWin)] -
               s[static_cast<size_t>(y) * sw + (x + kWin)] -
               s[static_cast<size_t>(y + kWin) * sw + x] + s[static_cast<size_t>(y) * sw + x];
    };

    constexpr double inv_n = 1.0 / (kWin * kWin);
    double total = 0.0;
    long long windows = 0;
    for (int y = 0; y + kWin <= h; ++y) {
        for (int x = 0; x + kWin <= w; ++x) {
            const double ma = box(sa, y, x) * inv_n, mb = box(sb, y, x) * inv_n;
            const double va = box(saa, y, x) * inv_n - ma * ma;
            const double vb = box(sbb, y, x) * inv_n - mb * mb;
            const double cab = box(sab, y, x) * inv_n - ma * mb;
            const double num = (2.0 * (ma * mb) + C1) * (2.0 * cab + C2);
            const double den = (ma * ma + mb * mb + C1) * (va + vb + C2);
            total += num / den;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

ColorShift color_shift(const ImageTensor& a, const ImageTensor& ref) {
    require_same_shape(a, ref, "color_shift");
    ColorShift cs;
    cs.per_channel.resize(a.c);
    double abs_sum = 0.0;
    for (int ci = 0; ci < a.c; ++ci) {
        cs.per_channel[ci] = channel_mean(a, ci) - channel_mean(ref, ci);
        abs_sum += std::abs(cs.per_channel[ci]);
    }
    cs.summary = abs_sum / static_cast<double>(a.c);
    return cs;
}

ImageTensor normalize_means(const ImageTensor& a, const ImageTensor& ref) {
    const ColorShift cs = color_shift(a, ref);
    ImageTensor out = a;
    for (int ci = 0; ci < a.c; ++ci) {
        double* p = out.plane(ci);
        const double dev = cs.per_channel[ci];
        for (size_t i = 0; i < out.pixels(); ++i) p[i] -= dev;
    }
    return out;
}

RegionalReport regional_analysis(const ImageTensor& sr, const ImageTensor& hr,
                                 const AttentionMap& attention) {
    require_same_shape(sr, hr, "regional_analysis");
    if (attention.h != sr.h || attention.w != sr.w)
        fail(errc::shape_mismatch, "regional_analysis: attention shape mismatch");
    validate_attention(attention);

    RegionalReport r;
    std::array<double, kRegionalBins> sq_sum{};
    for (int y = 0; y < sr.h; ++y) {
        for (int x = 0; x < sr.w; ++x) {
            int k = static_cast<int>(std::floor(attention.at(y, x) * kRegionalBins));
            if (k >= kRegionalBins) k = kRegionalBins - 1; // a == 1.0 joins the closed last bin
            ++r.count[k];
            for (int ci = 0; ci < sr.c; ++ci) {
                const double d = sr.at(ci, y, x) - hr.at(ci, y, x);
                sq_sum[k] += d * d;
            }
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < kRegionalBins; ++k) {
        if (r.count[k] == 0) {
            r.mse[k] = nan;
            r.psnr[k] = nan;
            continue;
        }
        ++r.populated_bins;
        r.mse[k] = sq_sum[k] / (static_cast<double>(r.count[k]) * sr.c);
        r.psnr[k] = r.mse[k] == 0.0 ? std::numeric_limits<double>::infinity()
                                    : 10.0 * std::log10(1.0 / r.mse[k]);
    }

    fit_regional_poly(r);
    return r;
}

void fit_regional_poly(RegionalReport& r) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.poly = {nan, nan, nan, nan};
    if (r.populated_bins < 4) return;
    // degree-3 least squares on (bin center, bin mse), normal equations
    double m[4][5] = {};
    for (int k = 0; k < kRegionalBins; ++k) {
        if (r.count[k] == 0) continue;
        const double xc = (k + 0.5) / kRegionalBins;
        double xp[7] = {1.0};
        for (int i = 1; i < 7; ++i) xp[i] = xp[i - 1] * xc;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) m[i][j] += xp[i + j];
            m[i][4] += xp[i] * r.mse[k];
        }
    }
    for (int col = 0; col < 4; ++col) { // gaussian elimination, partial pivoting
        int piv = col;
        for (int row = col + 1; row < 4; ++row)
            if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
        for (int j = 0; j < 5; ++j) std::swap(m[col][j], m[piv][j]);
        if (m[col][col] == 0.0) return; // degenerate: leave NaN coefficients
        for (int row = col + 1; row < 4; ++row) {
            const double f = m[row][col] / m[col][col];
            for (int j = col; j < 5; ++j) m[row][j] -= f * m[col][j];
        }
    }
    for (int i = 3; i >= 0; --i) {
        double acc = m[i][4];
        for (int j = i + 1; j < 4; ++j) acc -= m[i][j] * r.poly[j];
        r.poly[i] = acc / m[i][i];
    }
}

void write_regional_csv(const std::filesystem::path& path, const RegionalReport& r) {
    std::ofstream f(path);
    if (!f) fail(errc::missing_file, "cannot open for write: " + path.string());
    f << "bin_lo,bin_hi,count,mse,psnr\n";
    char line[160];
    for (int k = 0; k < kRegionalBins; ++k) {
        std::snprintf(line, sizeof line, "%.2f,%.2f,%lld,%.17g,%.17g\n",
                      static_cast<double>(k) / kRegionalBins,
                      static_cast<double>(k + 1) / kRegionalBins,
                      r.count[k], r.mse[k], r.psnr[k]);
        f << line;
    }
    for (int i = 0; i < 4; ++i) {
        std::snprintf(line, sizeof line, "poly,%d,%.17g,,\n", i, r.poly[i]);
        f << line;
    }
    if (!f) fail(errc::truncated, "short write: " + path.string());
}

} // namespace yoda
