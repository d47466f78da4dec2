#pragma once

#include <vector>

#include "yoda/diffusion.hpp"
#include "yoda/masking.hpp"

namespace yoda {

// Attention-guided sampling configuration. The mask schedule and noise
// schedule must agree on T. RNG accounting per guided step: the SR branch
// consumes h*w*c normals from the main stream (none at the final step), the
// LR branch h*w*c from a dedicated stream split off the main seed (none at
// the final step, none in shared-noise mode). The main-stream consumption is
// therefore identical to baseline_sample's, which makes the all-ones-mask
// case bit-identical to the baseline under matched seeds.
struct GuidedConfig {
    NoiseSchedule schedule;
    MaskSchedule mask;
    bool mask_denoiser_input = true;   // feed z~_t = M(t) o z_t to the denoiser (Eq. 9)
    bool shared_branch_noise = false;  // ablation: both branches reuse the SR draw
    int trajectory_checkpoints = 10;
};

// z~ = M o z (exact select; binary masks make this Eq. 9 verbatim).
ImageTensor masked_state(const ImageTensor& z, const BinaryMask& m);

// One guided reverse transition t -> t-1 (Eqs. 9-12).
ImageTensor guided_step(const Denoiser& d, const ImageTensor& x_up, const ImageTensor& z_t, int t,
                        const GuidedConfig& cfg, RngStream& rng, RngStream& lr_rng);

// Full guided chain. x_lr is upsampled internally to the mask schedule's
// resolution. Trajectory (when requested) records `trajectory_checkpoints`
// evenly spaced states including the final one, as (t, clamped state).
ImageTensor yoda_sample(const Denoiser& d, const ImageTensor& x_lr, const GuidedConfig& cfg,
                        RngStream& rng,
                        std::vector<std::pair<int, ImageTensor>>* trajectory = nullptr);

} // namespace yoda
