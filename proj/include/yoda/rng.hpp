#pragma once

#include <cstdint>
#include <span>

#include "yoda/image.hpp"

namespace yoda {

// Deterministic 64-bit stream built on splitmix64 (a named splittable
// generator). Normal variates come from Box-Muller with a fixed draw order:
// filling n outputs always consumes exactly 2*ceil(n/2) uniforms, whether or
// not n is odd, so consumers can account for stream positions exactly.
// split() derives an independent child stream from the current state without
// advancing the parent; identical (seed, draw sequence) always reproduces
// identical bits on a given platform/libm build.
class RngStream {
public:
    explicit RngStream(uint64_t seed);

    uint64_t next_u64();
    double next_uniform();           // [0, 1), 53-bit
    uint64_t next_below(uint64_t n); // uniform in [0, n)
    void fill_normal(std::span<double> out);
    double next_normal(); // one pair drawn, second value discarded

    RngStream split(uint64_t label) const;
    uint64_t draws() const { return draws_; } // uniforms consumed

private:
    uint64_t state_;
    uint64_t draws_ = 0;
};

// Standard-normal tensor of the given shape; consumes 2*ceil(h*w*c/2) uniforms.
ImageTensor gaussian_sample(RngStream& rng, int h, int w, int c);

} // namespace yoda
