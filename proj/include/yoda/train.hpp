#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "yoda/denoiser_net.hpp"
#include "yoda/image.hpp"
#include "yoda/masking.hpp"

namespace yoda {

enum class TrainMode { yoda, full };

TrainMode train_mode_from_name(const std::string& name);
const char* train_mode_name(TrainMode m);

struct TrainConfig {
    TrainMode mode = TrainMode::yoda;
    int t_train = 500;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int iters = 0;
    int batch = 1;
    double lr = 5e-5;
    double weight_decay = 1e-4;
    double lower_bound = 0.2;
    uint64_t seed = 0;
};

// One training example: HR target, its bicubic-upsampled LR conditioning
// image (same shape), and an HR-resolution attention map.
struct TrainItem {
    std::string id;
    ImageTensor hr;
    ImageTensor x_up;
    AttentionMap attention;
};

// L1 over mask-active pixels, raw sum over channels and pixels (no
// normalization here; train() divides by the active-pixel count per sample).
double masked_loss(const ImageTensor& eps_true, const ImageTensor& eps_pred, const BinaryMask& m);
// d masked_loss / d eps_pred = -M o sign(eps_true - eps_pred), sign(0) = 0.
ImageTensor masked_loss_grad(const ImageTensor& eps_true, const ImageTensor& eps_pred,
                             const BinaryMask& m);

// Adaptive-moment optimizer with decoupled weight decay:
// p -= lr * (mhat/(sqrt(vhat)+eps) + wd*p), beta = (0.9, 0.999), eps = 1e-8.
class AdamW {
public:
    AdamW(size_t n, double lr, double weight_decay);
    void step(std::vector<double>& params, const std::vector<double>& grads);
    long long steps_taken() const { return steps_; }

private:
    double lr_, wd_;
    long long steps_ = 0;
    std::vector<double> m_, v_;
};

struct TrainResult {
    TinyDenoiser net;
    std::vector<double> loss_log; // one mean batch loss per iteration
};

// CSV with header "iter,loss", one row per iteration (1-based).
void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& log);

// Optimizes Eq.-13-style masked noise prediction. RNG layout from cfg.seed:
// split(0) initializes weights, split(1) draws (image index, t) per batch
// slot, split(2) draws the per-slot noise. Noise is pre-drawn sequentially
// per slot, so batch items can be processed in parallel while gradients are
// reduced post-join in slot order: results never depend on the worker count.
// mode full uses an all-ones mask (attention ignored), bit-identical to mode
// yoda with A == 1.
TrainResult train(const TrainConfig& cfg, const std::vector<TrainItem>& data);

} // namespace yoda
