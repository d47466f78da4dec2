#include "yoda/guided.hpp"

#include <algorithm>
#include <cmath>

#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"
#include "yoda/resize.hpp"

namespace yoda {
namespace {

constexpr uint64_t kLrNoiseLabel = 1; // split label for the LR branch stream

void check_config(const GuidedConfig& cfg) {
    validate_schedule(cfg.schedule);
    if (cfg.mask.T != cfg.schedule.T())
        fail(errc::bad_config, "mask schedule and noise schedule disagree on T");
}

ImageTensor step_unchecked(const Denoiser& d, const ImageTensor& x_up, const ImageTensor& z_t,
                           int t, const GuidedConfig& cfg, RngStream& rng, RngStream& lr_rng);

} // namespace

ImageTensor masked_state(const ImageTensor& z, const BinaryMask& m) {
    if (z.h != m.h || z.w != m.w) fail(errc::shape_mismatch, "masked_state shape mismatch");
    ImageTensor out(z.h, z.w, z.c);
    for (int ci = 0; ci < z.c; ++ci)
        kernels::table().mask_zero(z.pixels(), m.m.data(), z.plane(ci), out.plane(ci));
    return out;
}

ImageTensor guided_step(const Denoiser& d, const ImageTensor& x_up, const ImageTensor& z_t, int t,
                        const GuidedConfig& cfg, RngStream& rng, RngStream& lr_rng) {
    check_config(cfg);
    return step_unchecked(d, x_up, z_t, t, cfg, rng, lr_rng);
}

namespace {

ImageTensor step_unchecked(const Denoiser& d, const ImageTensor& x_up, const ImageTensor& z_t,
                           int t, const GuidedConfig& cfg, RngStream& rng, RngStream& lr_rng) {
    if (t < 1 || t > cfg.schedule.T()) fail(errc::usage, "guided_step: t outside [1,T]");
    if (!x_up.same_shape(z_t) || x_up.h != cfg.mask.attention.h || x_up.w != cfg.mask.attention.w)
        fail(errc::shape_mismatch, "guided_step shape mismatch");

    const BinaryMask m = mask_at(cfg.mask, t);
    const double alpha = cfg.schedule.alpha(t);
    const bool final_step = t == 1;
    const double sigma = std::sqrt(1.0 - alpha);

    const ImageTensor* denoiser_in = &z_t;
    ImageTensor masked;
    if (cfg.mask_denoiser_input) {
        masked = masked_state(z_t, m);
        denoiser_in = &masked;
    }
    ImageTensor z_sr = posterior_mean(d, x_up, *denoiser_in, alpha, cfg.schedule.gamma(t));
    ImageTensor z_lr = x_up;
    if (!final_step) {
        const ImageTensor xi_sr = gaussian_sample(rng, z_t.h, z_t.w, z_t.c);
        kernels::table().add_scaled(z_sr.size(), z_sr.data.data(), sigma, xi_sr.data.data(),
                                    z_sr.data.data());
        if (cfg.shared_branch_noise) {
            kernels::table().add_scaled(z_lr.size(), z_lr.data.data(), sigma, xi_sr.data.data(),
                                        z_lr.data.data());
        } else {
            const ImageTensor xi_lr = gaussian_sample(lr_rng, z_t.h, z_t.w, z_t.c);
            kernels::table().add_scaled(z_lr.size(), z_lr.data.data(), sigma, xi_lr.data.data(),
                                        z_lr.data.data());
        }
    }
    ImageTensor out(z_t.h, z_t.w, z_t.c);
    for (int ci = 0; ci < z_t.c; ++ci)
        kernels::table().select(z_t.pixels(), m.m.data(), z_sr.plane(ci), z_lr.plane(ci),
                                out.plane(ci));
    return out;
}

} // namespace

ImageTensor yoda_sample(const Denoiser& d, const ImageTensor& x_lr, const GuidedConfig& cfg,
                        RngStream& rng, std::vector<std::pair<int, ImageTensor>>* trajectory) {
    check_config(cfg);
    const int H = cfg.mask.attention.h, W = cfg.mask.attention.w;
    if (d.channels() != x_lr.c) fail(errc::shape_mismatch, "denoiser/input channel mismatch");
    const int T = cfg.schedule.T();

    std::vector<uint8_t> want_at(T + 1, 0);
    if (trajectory) {
        trajectory->clear();
        const int n = std::clamp(cfg.trajectory_checkpoints, 1, T);
        for (int k = 0; k < n; ++k)
            want_at[static_cast<size_t>(std::llround(static_cast<double>(k) * T / n))] = 1;
    }

    const ImageTensor x_up = bicubic_resize(x_lr, H, W);
    RngStream lr_rng = rng.split(kLrNoiseLabel);
    ImageTensor z = gaussian_sample(rng, H, W, x_lr.c);
    for (int t = T; t >= 1; --t) {
        z = step_unchecked(d, x_up, z, t, cfg, rng, lr_rng);
        if (trajectory && want_at[t - 1]) {
            ImageTensor snap = z;
            clamp01_inplace(snap);
            trajectory->emplace_back(t - 1, std::move(snap));
        }
    }
    if (!all_finite(z)) fail(errc::numeric, "yoda_sample produced non-finite values");
    clamp01_inplace(z);
    return z;
}

} // namespace yoda
