#pragma once

#include <vector>

#include "yoda/config.hpp"

namespace yoda {

struct ModeSummary {
    double psnr_mean = 0.0;
    double ssim_mean = 0.0;
    double color_shift_mean = 0.0; // NaN for grayscale data
    std::vector<double> loss_log;
};

struct ExperimentReport {
    ModeSummary yoda;
    ModeSummary full;
    size_t images_train = 0;
    size_t images_held = 0;
};

// End-to-end harness: ingest, attention precompute (cached under
// out_dir/attention_cache), split off the last ceil(N/8) images (lexicographic
// order) as held-out, train mode=yoda and mode=full under identical seeds,
// sample the held-out split with each trained model (guided sampler for yoda,
// plain ancestral chain for full), and emit, in completion order: per-image
// mask-stats CSVs, per-mode loss CSVs + model files + sample images + eval
// CSVs, then summary.csv with one row per mode. Every artifact is flushed as
// soon as its stage completes, so aborted runs keep partial results.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

} // namespace yoda
