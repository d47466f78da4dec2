#include "yoda/masking.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "yoda/errors.hpp"

namespace yoda {

MaskSchedule make_mask_schedule(AttentionMap attention, double lower_bound, int T) {
    if (T < 1) fail(errc::usage, "mask schedule needs T >= 1");
    if (!(lower_bound >= 0.0) || !(lower_bound <= 1.0))
        fail(errc::usage, "lower bound must be in [0,1]");
    if (attention.size() == 0) fail(errc::shape_mismatch, "empty attention map");
    validate_attention(attention);
    return MaskSchedule{std::move(attention), lower_bound, T};
}

BinaryMask mask_at(const MaskSchedule& s, int t) {
    if (t < 0 || t > s.T) fail(errc::usage, "mask_at: t outside [0,T]");
    BinaryMask m(s.attention.h, s.attention.w);
    const double T = static_cast<double>(s.T);
    for (size_t i = 0; i < m.size(); ++i)
        m.m[i] = T * (s.attention.v[i] + s.lower_bound) >= static_cast<double>(t) ? 1 : 0;
    return m;
}

long long active_steps(const MaskSchedule& s, int y, int x) {
    const double thr = static_cast<double>(s.T) * (s.attention.at(y, x) + s.lower_bound);
    const long long by_floor = static_cast<long long>(std::floor(thr));
    return by_floor < s.T ? by_floor : s.T;
}

double diffused_pixel_ratio(const MaskSchedule& s) {
    long long active = 0;
    for (int y = 0; y < s.attention.h; ++y)
        for (int x = 0; x < s.attention.w; ++x) active += active_steps(s, y, x);
    return static_cast<double>(active) /
           (static_cast<double>(s.T) * static_cast<double>(s.attention.size()));
}

std::vector<std::pair<int, double>> coverage_curve(const MaskSchedule& s) {
    std::vector<std::pair<int, double>> curve;
    curve.reserve(s.T + 1);
    const double n = static_cast<double>(s.attention.size());
    for (int t = s.T; t >= 0; --t) {
        const BinaryMask m = mask_at(s, t);
        curve.emplace_back(t, static_cast<double>(m.active_count()) / n);
    }
    return curve;
}

void write_mask_stats_csv(const std::filesystem::path& path, const MaskSchedule& s) {
    std::ofstream f(path);
    if (!f) fail(errc::missing_file, "cannot open for write: " + path.string());
    f << "t,active_fraction\n";
    char line[64];
    for (const auto& [t, frac] : coverage_curve(s)) {
        std::snprintf(line, sizeof line, "%d,%.17g\n", t, frac);
        f << line;
    }
    std::snprintf(line, sizeof line, "diffused_pixel_ratio,%.17g\n", diffused_pixel_ratio(s));
    f << line;
    if (!f) fail(errc::truncated, "short write: " + path.string());
}

} // namespace yoda
