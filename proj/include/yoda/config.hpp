#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "yoda/dataset.hpp"
#include "yoda/train.hpp"

namespace yoda {

// Flat key=value file: one pair per line, '#' starts a comment, blank lines
// ignored, whitespace around key and value trimmed. Duplicate keys keep the
// last value.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

// "edge" or "edge,sift,gaussian" -> pipeline with per-kind default parameters.
AttentionPipeline parse_attention_spec(const std::string& spec, AggregateMode aggregate);

struct ExperimentConfig {
    std::filesystem::path data_dir;
    std::filesystem::path out_dir;
    int scale = 4;
    AttentionPipeline attention{{ExtractorConfig{}}, AggregateMode::max};
    int t_train = 500;
    int t_eval = 0; // 0 resolves to t_train
    double beta_start = 1e-4;
    double beta_end = 0.02;
    double lower_bound = 0.2;
    int iters = 200;
    int batch = 2;
    double lr = 5e-5;
    double weight_decay = 1e-4;
    uint64_t seed_train = 1;
    uint64_t seed_sample = 2;
    // Accepted for symmetry with `train`; the experiment harness always runs
    // and compares both modes.
    TrainMode mode = TrainMode::yoda;
};

// Keys: data_dir, out_dir, scale, extractor, aggregate, t_train, t_eval,
// beta_start, beta_end, lower_bound, iters, batch, lr, weight_decay,
// seed_train, seed_sample, mode, and the extractor tuning knobs
// gaussian_sigma_frac, canny_low, canny_high, dilation_radius, blur_sigma,
// sift_octaves, sift_levels, sift_blob_scale (applied to every extractor).
// `overrides` are CLI-supplied pairs that win over file values; unknown keys
// are an error.
ExperimentConfig make_experiment_config(
    const std::map<std::string, std::string>& file_values,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Paths exist, scale in {2,4,8}, 1 <= t_eval <= t_train, bounds in range.
void validate_experiment_config(const ExperimentConfig& cfg);

} // namespace yoda
