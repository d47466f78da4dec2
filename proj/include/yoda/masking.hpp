#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "yoda/image.hpp"

namespace yoda {

// Time-dependent binary masks: pixel (i,j) is active at step t iff
// T*(A_ij + l) >= t (ties active, A + l deliberately unclamped). Every pixel
// is therefore active for at least floor(l*T) of the T steps, and active
// sets are nested as t decreases.
struct MaskSchedule {
    AttentionMap attention;
    double lower_bound = 0.2;
    int T = 0;
};

MaskSchedule make_mask_schedule(AttentionMap attention, double lower_bound, int T);

BinaryMask mask_at(const MaskSchedule& s, int t); // t in [0, T]

// Per-pixel count of active steps t in {1..T}; equals min(T, floor(T*(A+l))).
long long active_steps(const MaskSchedule& s, int y, int x);

// Mean active fraction over all pixels and steps 1..T.
double diffused_pixel_ratio(const MaskSchedule& s);

// (t, active fraction) for t = T down to 0; non-decreasing toward t = 0.
std::vector<std::pair<int, double>> coverage_curve(const MaskSchedule& s);

// CSV: header "t,active_fraction", one row per step from T down to 0, then a
// final "diffused_pixel_ratio,<value>" summary row.
void write_mask_stats_csv(const std::filesystem::path& path, const MaskSchedule& s);

} // namespace yoda
