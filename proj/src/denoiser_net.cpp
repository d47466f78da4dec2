#include "yoda/denoiser_net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"

namespace yoda {
namespace {

using kernels::padded_plane_size;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

std::vector<double> gamma_embedding(double gamma) {
    std::vector<double> e(TinyDenoiser::kEmbedDim);
    double freq = 1.0;
    for (int i = 0; i < TinyDenoiser::kEmbedDim / 2; ++i) {
        const double arg = 3.14159265358979323846 * gamma * freq;
        e[2 * i] = std::sin(arg);
        e[2 * i + 1] = std::cos(arg);
        freq *= 2.0;
    }
    return e;
}

TinyDenoiser::TinyDenoiser(int img_channels) : img_c_(img_channels) {
    if (img_c_ < 1 || img_c_ > 64) fail(errc::usage, "TinyDenoiser channels out of range");
    const int in0 = 2 * img_c_ + 1;
    const int dims[5] = {in0, kHidden, kHidden, kHidden, img_c_};
    size_t off = 0;
    for (int l = 0; l < 4; ++l) {
        layers_[l].in = dims[l];
        layers_[l].out = dims[l + 1];
        layers_[l].w_off = off;
        off += static_cast<size_t>(layers_[l].out) * layers_[l].in * 9;
        layers_[l].b_off = off;
        off += layers_[l].out;
    }
    params_.assign(off, 0.0);
}

void TinyDenoiser::init_params(RngStream& rng) {
    for (const Layer& L : layers_) {
        const double fan_in = static_cast<double>(L.in) * 9;
        const double fan_out = static_cast<double>(L.out) * 9;
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        const size_t nw = static_cast<size_t>(L.out) * L.in * 9;
        for (size_t i = 0; i < nw; ++i)
            params_[L.w_off + i] = (2.0 * rng.next_uniform() - 1.0) * limit;
        for (int i = 0; i < L.out; ++i) params_[L.b_off + i] = 0.0;
    }
}

ImageTensor TinyDenoiser::forward(const ImageTensor& x_cond, const ImageTensor& z_t, double gamma,
                                  Cache* cache) const {
    if (z_t.c != img_c_ || !x_cond.same_shape(z_t))
        fail(errc::shape_mismatch, "TinyDenoiser input shape mismatch");
    const int h = z_t.h, w = z_t.w;
    const int pw = w + 2;
    const size_t plane = padded_plane_size(h, w);
    const int in0 = layers_[0].in;
    const auto& K = kernels::table();

    Cache local;
    Cache& c = cache ? *cache : local;
    c.h = h;
    c.w = w;
    c.a0.assign(static_cast<size_t>(in0) * plane, 0.0);
    auto copy_in = [&](int dst_plane, const double* src) {
        for (int y = 0; y < h; ++y)
            std::memcpy(c.a0.data() + dst_plane * plane + static_cast<size_t>(y + 1) * pw + 1,
                        src + static_cast<size_t>(y) * w, sizeof(double) * w);
    };
    for (int ci = 0; ci < img_c_; ++ci) copy_in(ci, z_t.plane(ci));
    for (int ci = 0; ci < img_c_; ++ci) copy_in(img_c_ + ci, x_cond.plane(ci));
    { // constant gamma plane
        double* gp = c.a0.data() + static_cast<size_t>(2 * img_c_) * plane;
        for (int y = 0; y < h; ++y) {
            double* row = gp + static_cast<size_t>(y + 1) * pw + 1;
            for (int x = 0; x < w; ++x) row[x] = gamma;
        }
    }

    const std::vector<double> emb = gamma_embedding(gamma);
    auto conv_layer = [&](int l, const std::vector<double>& in, std::vector<double>& pre) {
        pre.assign(static_cast<size_t>(layers_[l].out) * plane, 0.0);
        K.conv3x3(in.data(), layers_[l].in, h, w, params_.data() + layers_[l].w_off,
                  params_.data() + layers_[l].b_off, layers_[l].out, pre.data());
    };
    auto activate = [&](const std::vector<double>& pre, std::vector<double>& sig,
                        std::vector<double>& act, int nplanes) {
        sig.assign(pre.size(), 0.0);
        act.assign(pre.size(), 0.0);
        for (int p = 0; p < nplanes; ++p) {
            for (int y = 0; y < h; ++y) {
                const size_t row = p * plane + static_cast<size_t>(y + 1) * pw + 1;
                for (int x = 0; x < w; ++x) {
                    const double v = pre[row + x];
                    const double s = sigmoid(v);
                    sig[row + x] = s;
                    act[row + x] = v * s;
                }
            }
        }
    };

    conv_layer(0, c.a0, c.pre1);
    for (int p = 0; p < layers_[0].out; ++p) { // fixed sinusoidal bias, tiled mod 16
        const double b = emb[p % kEmbedDim];
        for (int y = 0; y < h; ++y) {
            double* row = c.pre1.data() + p * plane + static_cast<size_t>(y + 1) * pw + 1;
            for (int x = 0; x < w; ++x) row[x] += b;
        }
    }
    activate(c.pre1, c.sig1, c.act1, layers_[0].out);
    conv_layer(1, c.act1, c.pre2);
    activate(c.pre2, c.sig2, c.act2, layers_[1].out);
    conv_layer(2, c.act2, c.pre3);
    activate(c.pre3, c.sig3, c.act3, layers_[2].out);

    std::vector<double> out_pad(static_cast<size_t>(img_c_) * plane, 0.0);
    K.conv3x3(c.act3.data(), layers_[3].in, h, w, params_.data() + layers_[3].w_off,
              params_.data() + layers_[3].b_off, layers_[3].out, out_pad.data());

    ImageTensor out(h, w, img_c_);
    for (int ci = 0; ci < img_c_; ++ci)
        for (int y = 0; y < h; ++y)
            std::memcpy(out.plane(ci) + static_cast<size_t>(y) * w,
                        out_pad.data() + ci * plane + static_cast<size_t>(y + 1) * pw + 1,
                        sizeof(double) * w);
    return out;
}

ImageTensor TinyDenoiser::predict(const ImageTensor& x_cond, const ImageTensor& z_t,
                                  double gamma) const {
    return forward(x_cond, z_t, gamma, nullptr);
}

std::vector<double> TinyDenoiser::backward(const Cache& c, const ImageTensor& g_out) const {
    const int h = c.h, w = c.w;
    if (g_out.h != h || g_out.w != w || g_out.c != img_c_)
        fail(errc::shape_mismatch, "backward gradient shape mismatch");
    const int pw = w + 2;
    const size_t plane = padded_plane_size(h, w);
    const auto& K = kernels::table();
    std::vector<double> grads(params_.size(), 0.0);

    std::vector<double> g_pad(static_cast<size_t>(img_c_) * plane, 0.0);
    for (int ci = 0; ci < img_c_; ++ci)
        for (int y = 0; y < h; ++y)
            std::memcpy(g_pad.data() + ci * plane + static_cast<size_t>(y + 1) * pw + 1,
                        g_out.plane(ci) + static_cast<size_t>(y) * w, sizeof(double) * w);

    // conv gradient wrt input = conv with in/out-transposed, 180-rotated weights
    auto transpose_flip = [&](int l) {
        const Layer& L = layers_[l];
        std::vector<double> wt(static_cast<size_t>(L.in) * L.out * 9);
        const double* src = params_.data() + L.w_off;
        for (int oc = 0; oc < L.out; ++oc)
            for (int ic = 0; ic < L.in; ++ic)
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx)
                        wt[((static_cast<size_t>(ic) * L.out + oc) * 3 + (2 - ky)) * 3 + (2 - kx)] =
                            src[((static_cast<size_t>(oc) * L.in + ic) * 3 + ky) * 3 + kx];
        return wt;
    };
    auto apply_silu_grad = [&](std::vector<double>& g, const std::vector<double>& pre,
                               const std::vector<double>& sig, int nplanes) {
        for (int p = 0; p < nplanes; ++p) {
            for (int y = 0; y < h; ++y) {
                const size_t row = p * plane + static_cast<size_t>(y + 1) * pw + 1;
                for (int x = 0; x < w; ++x) {
                    const double s = sig[row + x], v = pre[row + x];
                    g[row + x] *= s * (1.0 + v * (1.0 - s));
                }
            }
        }
    };

    // layer 4
    K.conv3x3_wgrad(c.act3.data(), layers_[3].in, h, w, g_pad.data(), layers_[3].out,
                    grads.data() + layers_[3].w_off, grads.data() + layers_[3].b_off);
    std::vector<double> g3(static_cast<size_t>(kHidden) * plane, 0.0);
    {
        const auto wt = transpose_flip(3);
        K.conv3x3(g_pad.data(), layers_[3].out, h, w, wt.data(), nullptr, layers_[3].in, g3.data());
    }
    apply_silu_grad(g3, c.pre3, c.sig3, kHidden);

    // layer 3
    K.conv3x3_wgrad(c.act2.data(), layers_[2].in, h, w, g3.data(), layers_[2].out,
                    grads.data() + layers_[2].w_off, grads.data() + layers_[2].b_off);
    std::vector<double> g2(static_cast<size_t>(kHidden) * plane, 0.0);
    {
        const auto wt = transpose_flip(2);
        K.conv3x3(g3.data(), layers_[2].out, h, w, wt.data(), nullptr, layers_[2].in, g2.data());
    }
    apply_silu_grad(g2, c.pre2, c.sig2, kHidden);

    // layer 2
    K.conv3x3_wgrad(c.act1.data(), layers_[1].in, h, w, g2.data(), layers_[1].out,
                    grads.data() + layers_[1].w_off, grads.data() + layers_[1].b_off);
    std::vector<double> g1(static_cast<size_t>(kHidden) * plane, 0.0);
    {
        const auto wt = transpose_flip(1);
        K.conv3x3(g2.data(), layers_[1].out, h, w, wt.data(), nullptr, layers_[1].in, g1.data());
    }
    apply_silu_grad(g1, c.pre1, c.sig1, kHidden);

    // layer 1 (input gradient not needed)
    K.conv3x3_wgrad(c.a0.data(), layers_[0].in, h, w, g1.data(), layers_[0].out,
                    grads.data() + layers_[0].w_off, grads.data() + layers_[0].b_off);
    return grads;
}

// ==== YMDL model file ====

namespace {

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& buf, float v) { put_u32(buf, std::bit_cast<uint32_t>(v)); }

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    const std::string& name;
    void need(size_t n) {
        if (buf.size() - pos < n) fail(errc::truncated, "model file truncated: " + name);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos++])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos++])) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
};

} // namespace

void save_model(const std::filesystem::path& path, const TinyDenoiser& net, int t_train,
                double beta_start, double beta_end) {
    std::string buf;
    buf.reserve(40 + net.param_count() * 4);
    buf += "YMDL";
    put_u32(buf, 1); // version
    put_u32(buf, static_cast<uint32_t>(net.channels()));
    put_u32(buf, static_cast<uint32_t>(t_train));
    put_f32(buf, static_cast<float>(beta_start));
    put_f32(buf, static_cast<float>(beta_end));
    put_u64(buf, net.param_count());
    for (double v : net.params()) put_f32(buf, static_cast<float>(v));
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(errc::missing_file, "cannot open for write: " + path.string());
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) fail(errc::truncated, "short write: " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(errc::missing_file, "cannot open: " + path.string());
    const std::string name = path.string();
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 || buf.compare(0, 4, "YMDL") != 0)
        fail(errc::bad_magic, "not a model file: " + name);
    Reader r{buf, 4, name};
    const uint32_t version = r.u32();
    if (version != 1) fail(errc::bad_format, "unsupported model version: " + name);
    const uint32_t img_c = r.u32();
    const uint32_t t_train = r.u32();
    if (img_c < 1 || img_c > 64 || t_train < 1)
        fail(errc::value_range, "model header out of range: " + name);
    const double beta_start = r.f32();
    const double beta_end = r.f32();
    LoadedModel m{TinyDenoiser(static_cast<int>(img_c)), static_cast<int>(t_train), beta_start,
                  beta_end};
    const uint64_t count = r.u64();
    if (count != m.net.param_count()) fail(errc::bad_format, "model parameter count mismatch: " + name);
    r.need(count * 4);
    for (uint64_t i = 0; i < count; ++i) m.net.params()[i] = static_cast<double>(r.f32());
    return m;
}

} // namespace yoda
