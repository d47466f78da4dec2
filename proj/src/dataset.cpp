#include "yoda/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>

#include "yoda/errors.hpp"
#include "yoda/pnm.hpp"
#include "yoda/resize.hpp"
#include "yoda/rng.hpp"

namespace yoda {

namespace fs = std::filesystem;

// ==== ingest ====

static ImageTensor center_crop(const ImageTensor& img, int ch, int cw) {
    ImageTensor out(ch, cw, img.c);
    const int oy = (img.h - ch) / 2, ox = (img.w - cw) / 2;
    for (int ci = 0; ci < img.c; ++ci)
        for (int y = 0; y < ch; ++y)
            std::memcpy(out.plane(ci) + static_cast<size_t>(y) * cw,
                        img.plane(ci) + (static_cast<size_t>(y + oy) * img.w + ox),
                        sizeof(double) * cw);
    return out;
}

std::vector<Sample> ingest(const fs::path& dir, int scale) {
    if (scale < 1) fail(errc::usage, "scale must be >= 1");
    if (!fs::is_directory(dir)) fail(errc::missing_file, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    std::vector<Sample> out;
    for (const fs::path& p : files) {
        ImageTensor hr;
        try {
            hr = read_pnm(p);
        } catch (const Error& e) {
            std::cerr << "warning: skipping " << p.filename().string() << ": " << e.what() << "\n";
            continue;
        }
        const int ch = (hr.h / scale) * scale, cw = (hr.w / scale) * scale;
        if (ch == 0 || cw == 0) {
            std::cerr << "warning: skipping " << p.filename().string() << ": smaller than scale "
                      << scale << "\n";
            continue;
        }
        if (ch != hr.h || cw != hr.w) {
            std::cerr << "warning: " << p.filename().string() << ": " << hr.h << "x" << hr.w
                      << " not divisible by " << scale << ", center-cropped to " << ch << "x" << cw
                      << "\n";
            hr = center_crop(hr, ch, cw);
        }
        Sample s;
        s.id = p.stem().string();
        s.lr = bicubic_resize(hr, ch / scale, cw / scale);
        s.hr = std::move(hr);
        out.push_back(std::move(s));
    }
    if (out.empty()) fail(errc::empty_dataset, "no usable images in " + dir.string());
    return out;
}

// ==== synthetic dataset ====

static void paint_rect(ImageTensor& img, RngStream& rng) {
    const int y0 = static_cast<int>(rng.next_below(img.h));
    const int x0 = static_cast<int>(rng.next_below(img.w));
    const int rh = 1 + static_cast<int>(rng.next_below(std::max(1, img.h / 2)));
    const int rw = 1 + static_cast<int>(rng.next_below(std::max(1, img.w / 2)));
    double color[3];
    for (int ci = 0; ci < img.c; ++ci) color[ci] = rng.next_uniform();
    for (int y = y0; y < std::min(img.h, y0 + rh); ++y)
        for (int x = x0; x < std::min(img.w, x0 + rw); ++x)
            for (int ci = 0; ci < img.c; ++ci) img.at(ci, y, x) = color[ci];
}

static void paint_disk(ImageTensor& img, RngStream& rng) {
    const int cy = static_cast<int>(rng.next_below(img.h));
    const int cx = static_cast<int>(rng.next_below(img.w));
    const int r = 1 + static_cast<int>(rng.next_below(std::max(1, std::min(img.h, img.w) / 4)));
    double color[3];
    for (int ci = 0; ci < img.c; ++ci) color[ci] = rng.next_uniform();
    for (int y = std::max(0, cy - r); y <= std::min(img.h - 1, cy + r); ++y)
        for (int x = std::max(0, cx - r); x <= std::min(img.w - 1, cx + r); ++x)
            if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r)
                for (int ci = 0; ci < img.c; ++ci) img.at(ci, y, x) = color[ci];
}

std::vector<std::string> synth_dataset(const fs::path& out_dir, const SynthConfig& cfg) {
    if (cfg.count < 1) fail(errc::usage, "synth count must be >= 1");
    if (cfg.h < 1 || cfg.w < 1) fail(errc::usage, "synth dims must be >= 1");
    if (cfg.channels != 1 && cfg.channels != 3) fail(errc::usage, "synth channels must be 1 or 3");
    if (!(cfg.density >= 0.0) || !(cfg.density <= 1.0))
        fail(errc::usage, "synth density must be in [0,1]");
    fs::create_directories(out_dir);

    const RngStream root(cfg.seed);
    const char* ext = cfg.channels == 3 ? ".ppm" : ".pgm";
    std::vector<std::string> names;
    for (int i = 0; i < cfg.count; ++i) {
        RngStream rng = root.split(static_cast<uint64_t>(i));
        // band-limited background: coarse uniform grid, bicubic-upsampled
        const int gh = std::max(2, cfg.h / 8), gw = std::max(2, cfg.w / 8);
        ImageTensor coarse(gh, gw, cfg.channels);
        for (double& v : coarse.data) v = rng.next_uniform();
        ImageTensor img = bicubic_resize(coarse, cfg.h, cfg.w);
        clamp01_inplace(img);

        const int shapes = 1 + static_cast<int>(std::lround(cfg.density * 12.0));
        for (int k = 0; k < shapes; ++k) {
            if (rng.next_below(2) == 0)
                paint_rect(img, rng);
            else
                paint_disk(img, rng);
        }

        char name[32];
        std::snprintf(name, sizeof name, "img_%03d%s", i, ext);
        write_pnm(out_dir / name, img);
        names.emplace_back(name);
    }
    return names;
}

// ==== attention precompute & cache ====

static uint64_t fnv1a(uint64_t h, const void* data, size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

static uint64_t pipeline_hash(const AttentionPipeline& pipe, const ImageTensor& lr) {
    uint64_t h = 0xcbf29ce484222325ull;
    const char* version = "yoda-attn-v1";
    h = fnv1a(h, version, std::strlen(version));
    const int agg = static_cast<int>(pipe.aggregate);
    h = fnv1a(h, &agg, sizeof agg);
    for (const ExtractorConfig& e : pipe.extractors) {
        char buf[256];
        const int n = std::snprintf(buf, sizeof buf, "%d|%.17g|%.17g|%.17g|%d|%.17g|%d|%d|%.17g",
                                    static_cast<int>(e.kind), e.gaussian_sigma_frac, e.canny_low,
                                    e.canny_high, e.dilation_radius, e.blur_sigma, e.sift_octaves,
                                    e.sift_levels_per_octave, e.sift_blob_sigma_scale);
        h = fnv1a(h, buf, static_cast<size_t>(n));
    }
    h = fnv1a(h, &lr.h, sizeof lr.h);
    h = fnv1a(h, &lr.w, sizeof lr.w);
    h = fnv1a(h, &lr.c, sizeof lr.c);
    h = fnv1a(h, lr.data.data(), lr.data.size() * sizeof(double));
    return h;
}

static AttentionMap extract_pipeline(const AttentionPipeline& pipe, const Sample& s) {
    std::vector<AttentionMap> maps;
    maps.reserve(pipe.extractors.size());
    for (const ExtractorConfig& e : pipe.extractors) maps.push_back(extract_attention(s.lr, e));
    const AttentionMap combined = aggregate(maps, pipe.aggregate);
    return resample_map(combined, s.hr.h, s.hr.w);
}

std::vector<AttentionMap> precompute_attention(const std::vector<Sample>& samples,
                                               const AttentionPipeline& pipe,
                                               const fs::path& cache_dir, size_t* performed) {
    if (pipe.extractors.empty()) fail(errc::bad_config, "attention pipeline has no extractors");
    fs::create_directories(cache_dir);
    size_t fresh = 0;
    std::vector<AttentionMap> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        const fs::path map_path = cache_dir / (s.id + ".ymap");
        const fs::path hash_path = cache_dir / (s.id + ".hash");
        char want[32];
        std::snprintf(want, sizeof want, "%016llx",
                      static_cast<unsigned long long>(pipeline_hash(pipe, s.lr)));
        std::string have;
        if (std::ifstream hf(hash_path); hf) std::getline(hf, have);
        if (have == want && fs::exists(map_path)) {
            AttentionMap cached = read_ymap(map_path);
            if (cached.h == s.hr.h && cached.w == s.hr.w) {
                out.push_back(std::move(cached));
                continue;
            }
        }
        const AttentionMap m = extract_pipeline(pipe, s);
        ++fresh;
        write_ymap(map_path, m);
        std::ofstream hf(hash_path, std::ios::trunc);
        if (!hf) fail(errc::missing_file, "cannot open for write: " + hash_path.string());
        hf << want << "\n";
        if (!hf) fail(errc::truncated, "short write: " + hash_path.string());
        // return the file-backed (binary32-rounded) values so cache hits and
        // misses feed bit-identical maps downstream
        out.push_back(read_ymap(map_path));
    }
    if (performed) *performed = fresh;
    return out;
}

std::vector<AttentionMap> load_external_attention(const std::vector<Sample>& samples,
                                                  const fs::path& dir) {
    std::vector<AttentionMap> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        AttentionMap m = read_ymap(dir / (s.id + ".ymap"));
        out.push_back(resample_map(m, s.hr.h, s.hr.w));
    }
    return out;
}

} // namespace yoda
