#include "yoda/schedule.hpp"

#include <cmath>

#include "yoda/errors.hpp"

namespace yoda {

NoiseSchedule make_linear_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) fail(errc::usage, "schedule needs T >= 1");
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_end < beta_start)
        fail(errc::usage, "betas must satisfy 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.alphas.resize(T);
    s.gammas.resize(T);
    double prod = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double beta =
            T == 1 ? beta_start : beta_start + (beta_end - beta_start) * (t - 1) / (T - 1);
        s.alphas[t - 1] = 1.0 - beta;
        prod *= s.alphas[t - 1];
        s.gammas[t - 1] = prod;
    }
    validate_schedule(s);
    return s;
}

NoiseSchedule respace_schedule(const NoiseSchedule& s, int T_eval) {
    const int T = s.T();
    if (T_eval < 1 || T_eval > T) fail(errc::usage, "respace needs 1 <= T_eval <= T");
    if (T_eval == T) return s;
    NoiseSchedule r;
    r.alphas.resize(T_eval);
    r.gammas.resize(T_eval);
    double prev = 1.0;
    for (int k = 1; k <= T_eval; ++k) {
        const int t = static_cast<int>((static_cast<long long>(k) * T) / T_eval);
        r.gammas[k - 1] = s.gammas[t - 1];
        r.alphas[k - 1] = r.gammas[k - 1] / prev;
        prev = r.gammas[k - 1];
    }
    validate_schedule(r);
    return r;
}

void validate_schedule(const NoiseSchedule& s) {
    const int T = s.T();
    if (T < 1 || s.gammas.size() != s.alphas.size())
        fail(errc::bad_config, "schedule arrays inconsistent");
    double prev_gamma = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double a = s.alpha(t), g = s.gamma(t);
        if (!(a > 0.0 && a < 1.0)) fail(errc::value_range, "alpha out of (0,1)");
        if (!(g > 0.0 && g < prev_gamma)) fail(errc::value_range, "gammas not strictly decreasing in (0,1)");
        const double recomputed = prev_gamma * a;
        if (std::abs(recomputed - g) > 1e-12 * g)
            fail(errc::value_range, "gamma does not match cumulative product of alphas");
        prev_gamma = g;
    }
}

} // namespace yoda
