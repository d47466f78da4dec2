#pragma once

#include <filesystem>
#include <vector>

#include "yoda/diffusion.hpp"
#include "yoda/rng.hpp"

namespace yoda {

// Four-layer 3x3 conv stack with SiLU activations and exact analytic
// gradients. Input is [z_t || x_up || gamma plane] (2C+1 channels); a fixed
// 16-dim sinusoidal embedding of gamma is added to the first layer's
// pre-activations, tiled by output channel index mod 16. No residual path.
// Parameters live in one flat vector: per layer, weights [out][in][3][3]
// row-major, then biases [out]; layers in order 1..4.
class TinyDenoiser : public Denoiser {
public:
    static constexpr int kHidden = 32;
    static constexpr int kEmbedDim = 16;

    explicit TinyDenoiser(int img_channels);

    // Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases.
    void init_params(RngStream& rng);

    int channels() const override { return img_c_; }
    ImageTensor predict(const ImageTensor& x_cond, const ImageTensor& z_t,
                        double gamma) const override;

    struct Cache {
        int h = 0, w = 0;
        // padded conv inputs of each layer plus pre-activation/sigmoid pairs
        std::vector<double> a0, act1, act2, act3;
        std::vector<double> pre1, pre2, pre3;
        std::vector<double> sig1, sig2, sig3;
    };
    ImageTensor forward(const ImageTensor& x_cond, const ImageTensor& z_t, double gamma,
                        Cache* cache) const;
    // dLoss/dparams for g_out = dLoss/d eps_hat; aligned with params().
    std::vector<double> backward(const Cache& cache, const ImageTensor& g_out) const;

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    size_t param_count() const { return params_.size(); }

private:
    struct Layer {
        int in = 0, out = 0;
        size_t w_off = 0, b_off = 0;
    };
    int img_c_;
    Layer layers_[4];
    std::vector<double> params_;
};

// gamma embedding used by the first layer (exposed for tests)
std::vector<double> gamma_embedding(double gamma);

// "YMDL" model file: magic, u32 version(=1), u32 img_channels, u32 t_train,
// f32 beta_start, f32 beta_end, u64 param_count, params as f32 LE in the
// flat layout above.
struct LoadedModel {
    TinyDenoiser net;
    int t_train = 0;
    double beta_start = 0.0, beta_end = 0.0;
};
void save_model(const std::filesystem::path& path, const TinyDenoiser& net, int t_train,
                double beta_start, double beta_end);
LoadedModel load_model(const std::filesystem::path& path);

} // namespace yoda
