#pragma once

#include <utility>
#include <vector>

#include "yoda/image.hpp"
#include "yoda/rng.hpp"
#include "yoda/schedule.hpp"

namespace yoda {

// Noise predictor interface: eps_hat = predict(x_cond, z_t, gamma_t).
// x_cond is the upsampled LR conditioning image with the same shape as z_t.
struct Denoiser {
    virtual ~Denoiser() = default;
    virtual int channels() const = 0;
    virtual ImageTensor predict(const ImageTensor& x_cond, const ImageTensor& z_t,
                                double gamma) const = 0;
};

// Closed-form optimal predictor for z_0 ~ N(mean, stddev^2 I):
// E[eps | z_t] = sqrt(1-g) * (z_t - sqrt(g)*m) / (g*s^2 + 1 - g).
// Ignores x_cond; exists to give samplers an exact oracle.
class AnalyticGaussianDenoiser : public Denoiser {
public:
    AnalyticGaussianDenoiser(std::vector<double> mean, double stddev);
    int channels() const override { return static_cast<int>(mean_.size()); }
    ImageTensor predict(const ImageTensor& x_cond, const ImageTensor& z_t,
                        double gamma) const override;

private:
    std::vector<double> mean_;
    double stddev_;
};

// z_t = sqrt(g)*z0 + sqrt(1-g)*eps, returns (z_t, eps). gamma in (0, 1].
std::pair<ImageTensor, ImageTensor> forward_sample(const ImageTensor& z0, double gamma,
                                                   RngStream& rng);

// mu = (z_t - (1-a)/sqrt(1-g) * eps_hat) / sqrt(a). gamma must be < 1.
ImageTensor posterior_mean(const Denoiser& d, const ImageTensor& x_cond, const ImageTensor& z_t,
                           double alpha, double gamma);

// mu + sqrt(1-a)*xi; the noise draw is skipped when final_step (t == 1).
ImageTensor reverse_step(const Denoiser& d, const ImageTensor& x_cond, const ImageTensor& z_t,
                         double alpha, double gamma, RngStream& rng, bool final_step);

// Full ancestral chain from z_T ~ N(0, I), clamped to [0,1] at the end.
// Consumes h*w*c normals for z_T plus h*w*c per non-final step, all from rng.
ImageTensor baseline_sample(const Denoiser& d, const ImageTensor& x_cond,
                            const NoiseSchedule& s, RngStream& rng);

} // namespace yoda
