#include "yoda/rng.hpp"

#include <cmath>

#include "yoda/errors.hpp"

namespace yoda {
namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

RngStream::RngStream(uint64_t seed) : state_(seed) {}

uint64_t RngStream::next_u64() {
    state_ += kGolden;
    ++draws_;
    return mix64(state_);
}

double RngStream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t RngStream::next_below(uint64_t n) {
    if (n == 0) fail(errc::usage, "next_below(0)");
    return next_u64() % n;
}

void RngStream::fill_normal(std::span<double> out) {
    for (size_t i = 0; i < out.size(); i += 2) {
        // u1 in (0,1] so log stays finite
        const double u1 = 1.0 - next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        out[i] = r * std::cos(kTwoPi * u2);
        if (i + 1 < out.size()) out[i + 1] = r * std::sin(kTwoPi * u2);
    }
}

double RngStream::next_normal() {
    double v[1];
    fill_normal(v);
    return v[0];
}

RngStream RngStream::split(uint64_t label) const {
    return RngStream(mix64(state_ ^ (kGolden * (2 * label + 1))));
}

ImageTensor gaussian_sample(RngStream& rng, int h, int w, int c) {
    if (h <= 0 || w <= 0 || c <= 0) fail(errc::shape_mismatch, "gaussian_sample: empty shape");
    ImageTensor t(h, w, c);
    rng.fill_normal(t.data);
    return t;
}

} // namespace yoda
