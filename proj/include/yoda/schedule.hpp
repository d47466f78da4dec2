#pragma once

#include <vector>

namespace yoda {

// DDPM noise schedule. alphas[t-1] is the per-step retained fraction
// (1 - beta_t) and gammas[t-1] the cumulative product, strictly decreasing
// with gamma_T > 0. Indexing helpers take the 1-based step t.
struct NoiseSchedule {
    std::vector<double> alphas;
    std::vector<double> gammas;

    int T() const { return static_cast<int>(alphas.size()); }
    double alpha(int t) const { return alphas[t - 1]; }
    double gamma(int t) const { return gammas[t - 1]; }
};

NoiseSchedule make_linear_schedule(int T, double beta_start = 1e-4, double beta_end = 0.02);

// Evenly spaced gamma subsequence that keeps the original final gamma;
// alpha'_k = gamma'_k / gamma'_{k-1} with gamma'_0 = 1. T_eval == T returns
// the schedule unchanged.
NoiseSchedule respace_schedule(const NoiseSchedule& s, int T_eval);

void validate_schedule(const NoiseSchedule& s);

} // namespace yoda
