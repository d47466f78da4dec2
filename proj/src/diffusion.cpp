#include "yoda/diffusion.hpp"

#include <cmath>

#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"

namespace yoda {

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(std::vector<double> mean, double stddev)
    : mean_(std::move(mean)), stddev_(stddev) {
    if (mean_.empty()) fail(errc::usage, "analytic denoiser needs at least one channel mean");
    if (!(stddev_ > 0.0)) fail(errc::usage, "analytic denoiser needs stddev > 0");
}

ImageTensor AnalyticGaussianDenoiser::predict(const ImageTensor& x_cond, const ImageTensor& z_t,
                                              double gamma) const {
    (void)x_cond;
    if (z_t.c != channels()) fail(errc::shape_mismatch, "analytic denoiser channel mismatch");
    if (!(gamma > 0.0 && gamma <= 1.0)) fail(errc::value_range, "predict needs gamma in (0,1]");
    const double denom = gamma * stddev_ * stddev_ + 1.0 - gamma;
    const double root_g = std::sqrt(gamma), root_1mg = std::sqrt(1.0 - gamma);
    ImageTensor out(z_t.h, z_t.w, z_t.c);
    for (int ci = 0; ci < z_t.c; ++ci) {
        const double* zp = z_t.plane(ci);
        double* op = out.plane(ci);
        const double shift = root_g * mean_[ci];
        const double scale = root_1mg / denom;
        for (size_t i = 0; i < z_t.pixels(); ++i) op[i] = scale * (zp[i] - shift);
    }
    return out;
}

std::pair<ImageTensor, ImageTensor> forward_sample(const ImageTensor& z0, double gamma,
                                                   RngStream& rng) {
    if (!(gamma > 0.0 && gamma <= 1.0)) fail(errc::value_range, "forward needs gamma in (0,1]");
    ImageTensor eps = gaussian_sample(rng, z0.h, z0.w, z0.c);
    ImageTensor z_t(z0.h, z0.w, z0.c);
    kernels::table().axpby(z0.size(), std::sqrt(gamma), z0.data.data(), std::sqrt(1.0 - gamma),
                           eps.data.data(), z_t.data.data());
    return {std::move(z_t), std::move(eps)};
}

ImageTensor posterior_mean(const Denoiser& d, const ImageTensor& x_cond, const ImageTensor& z_t,
                           double alpha, double gamma) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(errc::value_range, "posterior_mean needs alpha in (0,1)");
    if (!(gamma > 0.0 && gamma < 1.0))
        fail(errc::value_range, "posterior_mean undefined at gamma >= 1 (no noise to remove)");
    if (!x_cond.same_shape(z_t)) fail(errc::shape_mismatch, "posterior_mean shape mismatch");
    const ImageTensor eps_hat = d.predict(x_cond, z_t, gamma);
    const double inv_root_a = 1.0 / std::sqrt(alpha);
    const double coef = -inv_root_a * ((1.0 - alpha) / std::sqrt(1.0 - gamma));
    ImageTensor mu(z_t.h, z_t.w, z_t.c);
    kernels::table().axpby(z_t.size(), inv_root_a, z_t.data.data(), coef, eps_hat.data.data(),
                           mu.data.data());
    return mu;
}

ImageTensor reverse_step(const Denoiser& d, const ImageTensor& x_cond, const ImageTensor& z_t,
                         double alpha, double gamma, RngStream& rng, bool final_step) {
    ImageTensor mu = posterior_mean(d, x_cond, z_t, alpha, gamma);
    if (final_step) return mu;
    const ImageTensor xi = gaussian_sample(rng, z_t.h, z_t.w, z_t.c);
    ImageTensor out(z_t.h, z_t.w, z_t.c);
    kernels::table().add_scaled(mu.size(), mu.data.data(), std::sqrt(1.0 - alpha), xi.data.data(),
                                out.data.data());
    return out;
}

ImageTensor baseline_sample(const Denoiser& d, const ImageTensor& x_cond, const NoiseSchedule& s,
                            RngStream& rng) {
    validate_schedule(s);
    if (d.channels() != x_cond.c) fail(errc::shape_mismatch, "denoiser/conditioning channel mismatch");
    ImageTensor z = gaussian_sample(rng, x_cond.h, x_cond.w, x_cond.c);
    for (int t = s.T(); t >= 1; --t)
        z = reverse_step(d, x_cond, z, s.alpha(t), s.gamma(t), rng, t == 1);
    if (!all_finite(z)) fail(errc::numeric, "baseline_sample produced non-finite values");
    clamp01_inplace(z);
    return z;
}

} // namespace yoda
