#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "yoda/image.hpp"

namespace yoda {

// PSNR in dB against a [0,1] peak: 10*log10(1/MSE); +inf for identical inputs.
double psnr(const ImageTensor& a, const ImageTensor& ref);

// Mean SSIM over 8x8 uniform windows, stride 1, C1=(0.01)^2, C2=(0.03)^2,
// computed on the luma plane. Requires min(h,w) >= 8.
double ssim(const ImageTensor& a, const ImageTensor& ref);

struct ColorShift {
    std::vector<double> per_channel; // mean(a_c) - mean(ref_c)
    double summary = 0.0;            // mean of absolute deviations
};
ColorShift color_shift(const ImageTensor& a, const ImageTensor& ref);

// Shift each channel so its mean matches ref's; values are not re-clamped.
ImageTensor normalize_means(const ImageTensor& a, const ImageTensor& ref);

inline constexpr int kRegionalBins = 100; // width 0.01, last bin closed at 1.0

struct RegionalReport {
    std::array<long long, kRegionalBins> count{};
    std::array<double, kRegionalBins> mse{};  // NaN for empty bins
    std::array<double, kRegionalBins> psnr{}; // +inf when bin MSE is 0
    std::array<double, 4> poly{};             // degree-3 fit over bin centers, c0..c3; NaN when <4 bins
    int populated_bins = 0;
};

RegionalReport regional_analysis(const ImageTensor& sr, const ImageTensor& hr,
                                 const AttentionMap& attention);

// Recompute the cubic fit from the report's populated (bin center, mse)
// pairs; used after merging per-image reports into dataset-level bins.
void fit_regional_poly(RegionalReport& r);

void write_regional_csv(const std::filesystem::path& path, const RegionalReport& r);

} // namespace yoda
