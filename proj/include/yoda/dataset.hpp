#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "yoda/attention.hpp"
#include "yoda/image.hpp"

namespace yoda {

struct Sample {
    std::string id; // source filename without extension
    ImageTensor hr; // [0,1], dims divisible by the ingest scale
    ImageTensor lr; // anti-aliased bicubic downsample of hr
};

// Loads every .pgm/.ppm under dir in lexicographic filename order.
// Undecodable files are skipped with a stderr warning; HR dims not divisible
// by scale are center-cropped to the nearest multiple with a warning (images
// smaller than one scale block are skipped). Empty result is an error.
std::vector<Sample> ingest(const std::filesystem::path& dir, int scale);

// Synthetic dataset: band-limited background noise (bicubic-upsampled coarse
// grid) plus `round(density*12)+1` random axis-aligned rectangles and disks
// per image. Deterministic in (seed, index); files named img_###.(ppm|pgm).
struct SynthConfig {
    int count = 8;
    int h = 32, w = 32;
    int channels = 3; // 1 or 3
    double density = 0.5;
    uint64_t seed = 0;
};
std::vector<std::string> synth_dataset(const std::filesystem::path& out_dir,
                                       const SynthConfig& cfg);

struct AttentionPipeline {
    std::vector<ExtractorConfig> extractors; // at least one
    AggregateMode aggregate = AggregateMode::max;
};

// HR-resolution attention per sample: extract on the LR image (all the
// sampler sees at inference), aggregate, bilinearly resample to HR. Results
// are cached in cache_dir as <id>.ymap next to a <id>.hash sidecar keyed on
// the pipeline parameters and LR bytes; up-to-date entries are reused.
// `performed` (when non-null) reports how many fresh extractions ran.
std::vector<AttentionMap> precompute_attention(const std::vector<Sample>& samples,
                                               const AttentionPipeline& pipe,
                                               const std::filesystem::path& cache_dir,
                                               size_t* performed = nullptr);

// <id>.ymap files from dir (error when one is missing), resampled to HR dims.
std::vector<AttentionMap> load_external_attention(const std::vector<Sample>& samples,
                                                  const std::filesystem::path& dir);

} // namespace yoda
