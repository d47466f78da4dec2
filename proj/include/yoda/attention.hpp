#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "yoda/image.hpp"

namespace yoda {

enum class ExtractorKind { gaussian, edge, sift };
enum class AggregateMode { max, avg };

struct ExtractorConfig {
    ExtractorKind kind = ExtractorKind::edge;
    double gaussian_sigma_frac = 0.25;
    double canny_low = 0.1;  // thresholds on [0,1]-normalized gradient magnitude
    double canny_high = 0.2;
    int dilation_radius = 2;
    double blur_sigma = 2.0;
    int sift_octaves = 3;
    int sift_levels_per_octave = 4;
    double sift_blob_sigma_scale = 1.5;
};

ExtractorKind extractor_kind_from_name(const std::string& name);
const char* extractor_name(ExtractorKind k);

// Centered isotropic Gaussian prior, sigma = sigma_frac * min(h, w); value is
// exactly 1 at the pixel nearest the image center.
AttentionMap extract_gaussian(int h, int w, double sigma_frac);

// Canny edges -> dilation -> blur -> min-max normalize. All-zero stays all-zero.
AttentionMap extract_edge(const ImageTensor& img, const ExtractorConfig& cfg);

// Simplified SIFT: DoG keypoints splatted as Gaussian blobs, max-normalized.
AttentionMap extract_sift(const ImageTensor& img, const ExtractorConfig& cfg);

AttentionMap extract_attention(const ImageTensor& img, const ExtractorConfig& cfg);

AttentionMap aggregate(const std::vector<AttentionMap>& maps, AggregateMode mode);

// Bilinear resample (half-pixel centers, edge-clamped) followed by a [0,1] clamp.
AttentionMap resample_map(const AttentionMap& a, int out_h, int out_w);

// .ymap: "YMAP" magic, u32le h, u32le w, h*w float32le row-major in [0,1].
void write_ymap(const std::filesystem::path& path, const AttentionMap& a);
AttentionMap read_ymap(const std::filesystem::path& path);

} // namespace yoda
