#pragma once

#include <cstdint>
#include <vector>

namespace yoda {

// Planar float64 image tensor, data layout [c][h][w], values nominally in
// [0,1] for images. Diffusion states reuse the same container and may leave
// that range; nothing clamps until a sampler finishes.
struct ImageTensor {
    int h = 0, w = 0, c = 0;
    std::vector<double> data;

    ImageTensor() = default;
    ImageTensor(int h_, int w_, int c_, double fill = 0.0)
        : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, fill) {}

    double& at(int ci, int y, int x) { return data[(static_cast<size_t>(ci) * h + y) * w + x]; }
    double at(int ci, int y, int x) const { return data[(static_cast<size_t>(ci) * h + y) * w + x]; }

    double* plane(int ci) { return data.data() + static_cast<size_t>(ci) * h * w; }
    const double* plane(int ci) const { return data.data() + static_cast<size_t>(ci) * h * w; }

    size_t pixels() const { return static_cast<size_t>(h) * w; }
    size_t size() const { return data.size(); }
    bool same_shape(const ImageTensor& o) const { return h == o.h && w == o.w && c == o.c; }
};

// Single-channel attention map, values in [0,1].
struct AttentionMap {
    int h = 0, w = 0;
    std::vector<double> v;

    AttentionMap() = default;
    AttentionMap(int h_, int w_, double fill = 0.0)
        : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, fill) {}

    double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
    double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
    size_t size() const { return v.size(); }
};

struct BinaryMask {
    int h = 0, w = 0;
    std::vector<uint8_t> m;

    BinaryMask() = default;
    BinaryMask(int h_, int w_, uint8_t fill = 0)
        : h(h_), w(w_), m(static_cast<size_t>(h_) * w_, fill) {}

    uint8_t& at(int y, int x) { return m[static_cast<size_t>(y) * w + x]; }
    uint8_t at(int y, int x) const { return m[static_cast<size_t>(y) * w + x]; }
    size_t size() const { return m.size(); }
    size_t active_count() const {
        size_t n = 0;
        for (uint8_t b : m) n += b;
        return n;
    }
};

bool all_finite(const ImageTensor& t);
void clamp01_inplace(ImageTensor& t);
double channel_mean(const ImageTensor& t, int ci);
// ITU-R 601 luma for c==3, identity plane for c==1.
std::vector<double> luma(const ImageTensor& t);
void validate_attention(const AttentionMap& a); // values finite and in [0,1]

} // namespace yoda
