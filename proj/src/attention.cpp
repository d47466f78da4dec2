#include "yoda/attention.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "yoda/errors.hpp"

namespace yoda {
namespace {

constexpr double kCannySmoothSigma = 1.0; // pre-Sobel smoothing
constexpr double kSiftBaseSigma = 1.6;
constexpr double kSiftContrastThresh = 0.03;

std::vector<double> blur_plane(const std::vector<double>& src, int h, int w, double sigma) {
    if (sigma <= 0.0) return src;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        ksum += k[i + radius];
    }
    for (double& v : k) v /= ksum;

    std::vector<double> tmp(src.size()), out(src.size());
    for (int y = 0; y < h; ++y) { // horizontal pass, edge clamp
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xx = std::clamp(x + i, 0, w - 1);
                acc += k[i + radius] * src[static_cast<size_t>(y) * w + xx];
            }
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yy = std::clamp(y + i, 0, h - 1);
                acc += k[i + radius] * tmp[static_cast<size_t>(yy) * w + x];
            }
            out[static_cast<size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

void minmax_normalize(AttentionMap& a) {
    double lo = a.v[0], hi = a.v[0];
    for (double v : a.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) {
        std::fill(a.v.begin(), a.v.end(), 0.0);
        return;
    }
    for (double& v : a.v) v = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

} // namespace

ExtractorKind extractor_kind_from_name(const std::string& name) {
    if (name == "gaussian") return ExtractorKind::gaussian;
    if (name == "edge") return ExtractorKind::edge;
    if (name == "sift") return ExtractorKind::sift;
    fail(errc::usage, "unknown extractor: " + name);
}

const char* extractor_name(ExtractorKind k) {
    switch (k) {
    case ExtractorKind::gaussian: return "gaussian";
    case ExtractorKind::edge: return "edge";
    case ExtractorKind::sift: return "sift";
    }
    return "?";
}

AttentionMap extract_gaussian(int h, int w, double sigma_frac) {
    if (h < 1 || w < 1) fail(errc::shape_mismatch, "extract_gaussian: empty shape");
    if (!(sigma_frac > 0.0)) fail(errc::usage, "sigma_frac must be positive");
    const int cy = (h - 1) / 2, cx = (w - 1) / 2; // pixel nearest center, low on ties
    const double sigma = sigma_frac * std::min(h, w);
    AttentionMap a(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dy = y - cy, dx = x - cx;
            a.at(y, x) = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
        }
    }
    return a;
}

// ==== Canny edge attention ====

AttentionMap extract_edge(const ImageTensor& img, const ExtractorConfig& cfg) {
    const int h = img.h, w = img.w;
    if (h < 3 || w < 3) fail(errc::shape_mismatch, "extract_edge needs at least 3x3");
    if (!(cfg.canny_low >= 0.0 && cfg.canny_low <= cfg.canny_high && cfg.canny_high <= 1.0))
        fail(errc::usage, "canny thresholds must satisfy 0 <= low <= high <= 1");
    const std::vector<double> gray = blur_plane(luma(img), h, w, kCannySmoothSigma);

    auto px = [&](int y, int x) {
        return gray[static_cast<size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
    };
    std::vector<double> gx(gray.size()), gy(gray.size()), mag(gray.size());
    double mag_max = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double sx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
            const double sy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
            const size_t i = static_cast<size_t>(y) * w + x;
            gx[i] = sx;
            gy[i] = sy;
            mag[i] = std::sqrt(sx * sx + sy * sy);
            mag_max = std::max(mag_max, mag[i]);
        }
    }
    if (mag_max > 0.0)
        for (double& v : mag) v /= mag_max;

    // non-maximum suppression along the quantized gradient direction
    constexpr double kTan22 = 0.41421356237309503;
    constexpr double kTan67 = 2.414213562373095;
    std::vector<double> nms(mag.size(), 0.0);
    auto mag_at = [&](int y, int x) {
        if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
        return mag[static_cast<size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (mag[i] == 0.0) continue;
            const double adx = std::abs(gx[i]), ady = std::abs(gy[i]);
            double n1, n2;
            if (ady <= adx * kTan22) {
                n1 = mag_at(y, x - 1), n2 = mag_at(y, x + 1);
            } else if (ady >= adx * kTan67) {
                n1 = mag_at(y - 1, x), n2 = mag_at(y + 1, x);
            } else if (gx[i] * gy[i] > 0.0) {
                n1 = mag_at(y - 1, x - 1), n2 = mag_at(y + 1, x + 1);
            } else {
                n1 = mag_at(y - 1, x + 1), n2 = mag_at(y + 1, x - 1);
            }
            if (mag[i] >= n1 && mag[i] >= n2) nms[i] = mag[i];
        }
    }

    // double-threshold hysteresis, 8-connected
    std::vector<uint8_t> edge(mag.size(), 0);
    std::vector<size_t> stack;
    for (size_t i = 0; i < nms.size(); ++i) {
        if (nms[i] >= cfg.canny_high && !edge[i]) {
            edge[i] = 1;
            stack.push_back(i);
            while (!stack.empty()) {
                const size_t j = stack.back();
                stack.pop_back();
                const int jy = static_cast<int>(j / w), jx = static_cast<int>(j % w);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = jy + dy, nx = jx + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        const size_t nj = static_cast<size_t>(ny) * w + nx;
                        if (!edge[nj] && nms[nj] >= cfg.canny_low) {
                            edge[nj] = 1;
                            stack.push_back(nj);
                        }
                    }
                }
            }
        }
    }

    // disk dilation
    std::vector<double> dil(edge.size(), 0.0);
    const int r = cfg.dilation_radius;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    if (dy * dy + dx * dx > r * r) continue;
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    hit = edge[static_cast<size_t>(ny) * w + nx] != 0;
                }
            }
            dil[static_cast<size_t>(y) * w + x] = hit ? 1.0 : 0.0;
        }
    }

    AttentionMap a(h, w);
    a.v = blur_plane(dil, h, w, cfg.blur_sigma);
    minmax_normalize(a);
    return a;
}

// ==== Simplified SIFT attention ====

AttentionMap extract_sift(const ImageTensor& img, const ExtractorConfig& cfg) {
    const int h = img.h, w = img.w;
    const int octaves = cfg.sift_octaves, levels = cfg.sift_levels_per_octave;
    if (octaves < 1 || levels < 4) fail(errc::usage, "sift needs octaves >= 1, levels >= 4");
    if (std::min(h, w) < (1 << octaves))
        fail(errc::shape_mismatch, "image too small for requested sift octaves");

    struct Keypoint {
        double y, x, sigma;
    };
    std::vector<Keypoint> kps;

    std::vector<double> base = luma(img);
    int oh = h, ow = w;
    for (int o = 0; o < octaves; ++o) {
        const int S = levels - 1;
        std::vector<std::vector<double>> gauss(levels);
        std::vector<double> sigmas(levels);
        for (int s = 0; s < levels; ++s) {
            sigmas[s] = kSiftBaseSigma * std::pow(2.0, static_cast<double>(s) / S);
            gauss[s] = blur_plane(base, oh, ow, sigmas[s]);
        }
        std::vector<std::vector<double>> dog(levels - 1);
        for (int s = 0; s + 1 < levels; ++s) {
            dog[s].resize(base.size());
            for (size_t i = 0; i < base.size(); ++i) dog[s][i] = gauss[s + 1][i] - gauss[s][i];
        }
        const double scale_up = static_cast<double>(1 << o);
        for (int s = 1; s + 1 < levels - 1; ++s) {
            for (int y = 1; y + 1 < oh; ++y) {
                for (int x = 1; x + 1 < ow; ++x) {
                    const double v = dog[s][static_cast<size_t>(y) * ow + x];
                    if (std::abs(v) <= kSiftContrastThresh) continue;
                    bool is_max = true, is_min = true;
                    for (int ds = -1; ds <= 1 && (is_max || is_min); ++ds) {
                        for (int dy = -1; dy <= 1; ++dy) {
                            for (int dx = -1; dx <= 1; ++dx) {
                                if (ds == 0 && dy == 0 && dx == 0) continue;
                                const double nv =
                                    dog[s + ds][static_cast<size_t>(y + dy) * ow + (x + dx)];
                                if (nv >= v) is_max = false;
                                if (nv <= v) is_min = false;
                            }
                        }
                    }
                    if (is_max || is_min)
                        kps.push_back({y * scale_up, x * scale_up, sigmas[s] * scale_up});
                }
            }
        }
        if (o + 1 < octaves) { // next octave: subsample the most-blurred level
            const int nh = oh / 2, nw = ow / 2;
            std::vector<double> next(static_cast<size_t>(nh) * nw);
            for (int y = 0; y < nh; ++y)
                for (int x = 0; x < nw; ++x)
                    next[static_cast<size_t>(y) * nw + x] =
                        gauss[levels - 1][static_cast<size_t>(2 * y) * ow + 2 * x];
            base = std::move(next);
            oh = nh;
            ow = nw;
        }
    }

    AttentionMap a(h, w, 0.0);
    for (const Keypoint& kp : kps) {
        const double sb = cfg.sift_blob_sigma_scale * kp.sigma;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double dy = y - kp.y, dx = x - kp.x;
                const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sb * sb));
                a.at(y, x) = std::max(a.at(y, x), v);
            }
        }
    }
    double hi = 0.0;
    for (double v : a.v) hi = std::max(hi, v);
    if (hi > 0.0)
        for (double& v : a.v) v /= hi;
    return a;
}

AttentionMap extract_attention(const ImageTensor& img, const ExtractorConfig& cfg) {
    switch (cfg.kind) {
    case ExtractorKind::gaussian: return extract_gaussian(img.h, img.w, cfg.gaussian_sigma_frac);
    case ExtractorKind::edge: return extract_edge(img, cfg);
    case ExtractorKind::sift: return extract_sift(img, cfg);
    }
    fail(errc::usage, "bad extractor kind");
}

AttentionMap aggregate(const std::vector<AttentionMap>& maps, AggregateMode mode) {
    if (maps.empty()) fail(errc::usage, "aggregate needs at least one map");
    const int h = maps[0].h, w = maps[0].w;
    for (const auto& m : maps)
        if (m.h != h || m.w != w) fail(errc::shape_mismatch, "aggregate maps differ in shape");
    AttentionMap out(h, w, 0.0);
    if (mode == AggregateMode::max) {
        for (const auto& m : maps)
            for (size_t i = 0; i < out.size(); ++i) out.v[i] = std::max(out.v[i], m.v[i]);
    } else {
        const double inv = 1.0 / static_cast<double>(maps.size());
        for (const auto& m : maps)
            for (size_t i = 0; i < out.size(); ++i) out.v[i] += m.v[i];
        for (double& v : out.v) v = std::min(v * inv, 1.0);
    }
    return out;
}

AttentionMap resample_map(const AttentionMap& a, int out_h, int out_w) {
    if (a.size() == 0) fail(errc::shape_mismatch, "resample of empty map");
    if (out_h < 1 || out_w < 1) fail(errc::shape_mismatch, "resample to empty shape");
    if (out_h == a.h && out_w == a.w) return a;
    AttentionMap out(out_h, out_w);
    const double sy = static_cast<double>(a.h) / out_h;
    const double sx = static_cast<double>(a.w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        const int yc0 = std::clamp(y0, 0, a.h - 1), yc1 = std::clamp(y0 + 1, 0, a.h - 1);
        for (int x = 0; x < out_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            const int xc0 = std::clamp(x0, 0, a.w - 1), xc1 = std::clamp(x0 + 1, 0, a.w - 1);
            const double top = (1.0 - wx) * a.at(yc0, xc0) + wx * a.at(yc0, xc1);
            const double bot = (1.0 - wx) * a.at(yc1, xc0) + wx * a.at(yc1, xc1);
            out.at(y, x) = std::clamp((1.0 - wy) * top + wy * bot, 0.0, 1.0);
        }
    }
    return out;
}

// ==== .ymap serialization ====

namespace {

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& buf, size_t off) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[off + i])) << (8 * i);
    return v;
}

} // namespace

void write_ymap(const std::filesystem::path& path, const AttentionMap& a) {
    validate_attention(a);
    std::string buf;
    buf.reserve(12 + a.size() * 4);
    buf += "YMAP";
    put_u32(buf, static_cast<uint32_t>(a.h));
    put_u32(buf, static_cast<uint32_t>(a.w));
    for (double v : a.v) put_u32(buf, std::bit_cast<uint32_t>(static_cast<float>(v)));
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(errc::missing_file, "cannot open for write: " + path.string());
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) fail(errc::truncated, "short write: " + path.string());
}

AttentionMap read_ymap(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(errc::missing_file, "cannot open: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 12) fail(errc::truncated, "ymap header truncated: " + path.string());
    if (buf.compare(0, 4, "YMAP") != 0) fail(errc::bad_magic, "not a ymap file: " + path.string());
    const uint32_t h = get_u32(buf, 4), w = get_u32(buf, 8);
    if (h == 0 || w == 0 || h > (1u << 20) || w > (1u << 20))
        fail(errc::value_range, "ymap dims out of range: " + path.string());
    const size_t need = 12 + static_cast<size_t>(h) * w * 4;
    if (buf.size() < need) fail(errc::truncated, "ymap payload truncated: " + path.string());
    AttentionMap a(static_cast<int>(h), static_cast<int>(w));
    for (size_t i = 0; i < a.size(); ++i) {
        const float v = std::bit_cast<float>(get_u32(buf, 12 + i * 4));
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            fail(errc::value_range, "ymap value outside [0,1]: " + path.string());
        a.v[i] = static_cast<double>(v);
    }
    return a;
}

} // namespace yoda
