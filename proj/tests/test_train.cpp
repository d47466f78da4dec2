#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "yoda/denoiser_net.hpp"
#include "yoda/errors.hpp"
#include "yoda/image.hpp"
#include "yoda/masking.hpp"
#include "yoda/rng.hpp"
#include "yoda/schedule.hpp"
#include "yoda/train.hpp"

namespace fs = std::filesystem;
using namespace yoda;

namespace {

errc thrown_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return errc::usage;
}

bool same_doubles(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

fs::path tmp_dir() {
    const fs::path d = fs::temp_directory_path() / "yoda_train_tests";
    fs::create_directories(d);
    return d;
}

ImageTensor uniform_image(RngStream& rng, int h, int w, int c) {
    ImageTensor img(h, w, c);
    for (double& v : img.data) v = rng.next_uniform();
    return img;
}

// the frozen snapshot inputs: a ramp conditioning image and a deterministic
// mod-17 texture for the noisy state
ImageTensor ramp_cond() {
    ImageTensor img(8, 8, 1);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) img.at(0, y, x) = static_cast<double>(y * 8 + x) / 63.0;
    return img;
}

ImageTensor mod17_state() {
    ImageTensor img(8, 8, 1);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            img.at(0, y, x) = static_cast<double>((y * 13 + x * 7) % 17) / 16.0 - 0.5;
    return img;
}

std::vector<TrainItem> synth_dataset(int n_items, int h, int w, uint64_t seed,
                                     double attention_value) {
    std::vector<TrainItem> data;
    RngStream rng(seed);
    for (int i = 0; i < n_items; ++i) {
        TrainItem it;
        it.id = "item" + std::to_string(i);
        it.hr = uniform_image(rng, h, w, 1);
        it.x_up = uniform_image(rng, h, w, 1);
        it.attention = AttentionMap(h, w, attention_value);
        data.push_back(std::move(it));
    }
    return data;
}

} // namespace

// ==== masked loss ====

TEST_CASE("masked_loss is the raw L1 sum over active pixels") {
    ImageTensor e(1, 2, 1), p(1, 2, 1);
    e.at(0, 0, 0) = 1.0;
    e.at(0, 0, 1) = -1.0;
    p.at(0, 0, 0) = 0.0;
    p.at(0, 0, 1) = 0.0;
    BinaryMask m(1, 2, 0);
    m.at(0, 0) = 1;
    CHECK(masked_loss(e, p, m) == 1.0);
    m.at(0, 1) = 1;
    CHECK(masked_loss(e, p, m) == 2.0);
}

TEST_CASE("all-ones mask reduces masked_loss to a plain L1 distance") {
    RngStream rng(1);
    const ImageTensor e = uniform_image(rng, 5, 7, 3);
    const ImageTensor p = uniform_image(rng, 5, 7, 3);
    const BinaryMask ones(5, 7, 1);
    double want = 0.0;
    for (size_t i = 0; i < e.size(); ++i) want += std::fabs(e.data[i] - p.data[i]);
    CHECK(masked_loss(e, p, ones) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("an empty mask gives zero loss and zero gradient") {
    RngStream rng(2);
    const ImageTensor e = uniform_image(rng, 4, 4, 2);
    const ImageTensor p = uniform_image(rng, 4, 4, 2);
    const BinaryMask zeros(4, 4, 0);
    CHECK(masked_loss(e, p, zeros) == 0.0);
    const ImageTensor g = masked_loss_grad(e, p, zeros);
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("masked_loss_grad is -mask * sign(eps_true - eps_pred)") {
    ImageTensor e(2, 2, 1), p(2, 2, 1);
    e.at(0, 0, 0) = 1.0;  p.at(0, 0, 0) = 0.0;  // true > pred -> grad -1
    e.at(0, 0, 1) = -1.0; p.at(0, 0, 1) = 0.0;  // true < pred -> grad +1
    e.at(0, 1, 0) = 0.5;  p.at(0, 1, 0) = 0.5;  // tie -> 0
    e.at(0, 1, 1) = 2.0;  p.at(0, 1, 1) = 0.0;  // masked off -> 0
    BinaryMask m(2, 2, 1);
    m.at(1, 1) = 0;
    const ImageTensor g = masked_loss_grad(e, p, m);
    CHECK(g.at(0, 0, 0) == -1.0);
    CHECK(g.at(0, 0, 1) == 1.0);
    CHECK(g.at(0, 1, 0) == 0.0);
    CHECK(g.at(0, 1, 1) == 0.0);
}

TEST_CASE("the mask applies to every channel of a multi-channel residual") {
    RngStream rng(3);
    const ImageTensor e = uniform_image(rng, 3, 3, 3);
    ImageTensor p = e;
    for (int ci = 0; ci < 3; ++ci) p.at(ci, 1, 1) += 1.0; // only the center differs
    BinaryMask m(3, 3, 1);
    m.at(1, 1) = 0;
    CHECK(masked_loss(e, p, m) == 0.0);
    m.at(1, 1) = 1;
    CHECK(masked_loss(e, p, m) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("masked loss helpers reject mismatched shapes") {
    const ImageTensor a(3, 3, 1, 0.0), b(3, 4, 1, 0.0);
    const BinaryMask m(3, 3, 1), wrong(4, 3, 1);
    CHECK(thrown_code([&] { masked_loss(a, b, m); }) == errc::shape_mismatch);
    CHECK(thrown_code([&] { masked_loss(a, a, wrong); }) == errc::shape_mismatch);
    CHECK(thrown_code([&] { masked_loss_grad(a, b, m); }) == errc::shape_mismatch);
}

// ==== optimizer ====

TEST_CASE("AdamW with zero gradients and zero decay leaves parameters untouched") {
    std::vector<double> p = {0.25, -1.5, 3.0, 0.125};
    const std::vector<double> p0 = p;
    const std::vector<double> g(p.size(), 0.0);
    AdamW opt(p.size(), 1e-2, 0.0);
    for (int i = 0; i < 5; ++i) opt.step(p, g);
    CHECK(same_doubles(p, p0));
    CHECK(opt.steps_taken() == 5);
}

TEST_CASE("AdamW with zero gradients applies pure decoupled decay") {
    const double lr = 1e-2, wd = 0.3;
    std::vector<double> p = {1.0, -2.0, 0.5};
    std::vector<double> expect = p;
    const std::vector<double> g(p.size(), 0.0);
    AdamW opt(p.size(), lr, wd);
    for (int s = 0; s < 3; ++s) {
        opt.step(p, g);
        for (double& v : expect) v -= lr * (wd * v);
        CHECK(same_doubles(p, expect));
    }
}

TEST_CASE("AdamW matches an independent re-derivation of the update rule") {
    const double lr = 1e-3, wd = 0.05;
    constexpr double kb1 = 0.9, kb2 = 0.999, keps = 1e-8;
    std::vector<double> p = {0.7, -0.3, 1.1, 0.0, -2.5};
    std::vector<double> expect = p, m(p.size(), 0.0), v(p.size(), 0.0);
    AdamW opt(p.size(), lr, wd);
    RngStream rng(7);
    for (int s = 1; s <= 4; ++s) {
        std::vector<double> g(p.size());
        for (double& x : g) x = 2.0 * rng.next_uniform() - 1.0;
        opt.step(p, g);
        const double bc1 = 1.0 - std::pow(kb1, static_cast<double>(s));
        const double bc2 = 1.0 - std::pow(kb2, static_cast<double>(s));
        for (size_t i = 0; i < expect.size(); ++i) {
            m[i] = kb1 * m[i] + (1.0 - kb1) * g[i];
            v[i] = kb2 * v[i] + (1.0 - kb2) * g[i] * g[i];
            expect[i] -= lr * ((m[i] / bc1) / (std::sqrt(v[i] / bc2) + keps) + wd * expect[i]);
        }
        CHECK(same_doubles(p, expect));
    }
}

TEST_CASE("AdamW validates its configuration and buffer sizes") {
    CHECK(thrown_code([] { AdamW(4, 0.0, 0.0); }) == errc::bad_config);
    CHECK(thrown_code([] { AdamW(4, -1e-3, 0.0); }) == errc::bad_config);
    CHECK(thrown_code([] { AdamW(4, 1e-3, -0.1); }) == errc::bad_config);
    AdamW opt(4, 1e-3, 0.0);
    std::vector<double> p(3, 0.0), g(4, 0.0);
    CHECK(thrown_code([&] { opt.step(p, g); }) == errc::shape_mismatch);
    std::vector<double> p4(4, 0.0), g5(5, 0.0);
    CHECK(thrown_code([&] { opt.step(p4, g5); }) == errc::shape_mismatch);
}

// ==== network structure and frozen snapshot ====

TEST_CASE("parameter layout sizes follow the four-layer conv stack") {
    CHECK(TinyDenoiser(1).param_count() == 19681);  // 896 + 9248 + 9248 + 289
    CHECK(TinyDenoiser(2).param_count() == 20546);  // 1472 + 9248 + 9248 + 578
    CHECK(TinyDenoiser(3).param_count() == 21411);
    CHECK(thrown_code([] { TinyDenoiser(0); }) == errc::usage);
    CHECK(thrown_code([] { TinyDenoiser(65); }) == errc::usage);
}

TEST_CASE("gamma embedding interleaves sin and cos of doubling frequencies") {
    const double gamma = 0.37;
    const std::vector<double> e = gamma_embedding(gamma);
    REQUIRE(e.size() == 16);
    double freq = 1.0;
    for (int i = 0; i < 8; ++i) {
        const double arg = 3.14159265358979323846 * gamma * freq;
        CHECK(e[2 * i] == std::sin(arg));
        CHECK(e[2 * i + 1] == std::cos(arg));
        freq *= 2.0;
    }
    CHECK(e[0] == 0.91775462568398114);
    CHECK(e[1] == 0.39714789063478056);
    CHECK(e[8] == -0.2486898871648541);
    CHECK(e[15] == -0.42577929156506761);
}

TEST_CASE("Glorot initialization and forward pass reproduce the frozen snapshot") {
    TinyDenoiser net(1);
    RngStream rng(2024);
    net.init_params(rng);
    CHECK(net.params()[0] == 0.033886507485464783);
    CHECK(net.params()[1] == -0.11117455534187715);
    CHECK(net.params()[500] == -0.11851542379832999);
    // biases of the first layer start at weight offset 864
    for (int i = 0; i < 32; ++i) CHECK(net.params()[864 + i] == 0.0);

    const ImageTensor out = net.predict(ramp_cond(), mod17_state(), 0.37);
    double sum = 0.0;
    for (double v : out.data) sum += v;
    CHECK(sum == 4.1698107762044003);
    CHECK(out.at(0, 0, 0) == 0.028960389916802266);
    CHECK(out.at(0, 3, 5) == 0.066570703146099044);
    CHECK(out.at(0, 7, 7) == 0.0031668198543274538);
    CHECK(out.at(0, 4, 2) == 0.050874414205189129);
}

TEST_CASE("init magnitudes respect the per-layer Glorot limits") {
    TinyDenoiser net(1);
    RngStream rng(5);
    net.init_params(rng);
    const double lim1 = std::sqrt(6.0 / (3 * 9 + 32 * 9));
    for (int i = 0; i < 864; ++i) CHECK(std::fabs(net.params()[i]) <= lim1);
    const double lim4 = std::sqrt(6.0 / (32 * 9 + 1 * 9));
    for (size_t i = 19392; i < 19680; ++i) CHECK(std::fabs(net.params()[i]) <= lim4);
}

TEST_CASE("all-zero parameters produce an all-zero prediction") {
    TinyDenoiser net(1);
    std::fill(net.params().begin(), net.params().end(), 0.0);
    RngStream rng(6);
    const ImageTensor out = net.predict(uniform_image(rng, 6, 6, 1), uniform_image(rng, 6, 6, 1), 0.5);
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("predict equals forward without a cache") {
    TinyDenoiser net(1);
    RngStream rng(8);
    net.init_params(rng);
    const ImageTensor x = uniform_image(rng, 5, 5, 1);
    const ImageTensor z = uniform_image(rng, 5, 5, 1);
    const ImageTensor a = net.predict(x, z, 0.6);
    const ImageTensor b = net.forward(x, z, 0.6, nullptr);
    CHECK(std::memcmp(a.data.data(), b.data.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("the receptive field of four 3x3 layers is nine pixels wide") {
    TinyDenoiser net(1);
    RngStream rng(9);
    net.init_params(rng);
    const ImageTensor x = uniform_image(rng, 16, 16, 1);
    ImageTensor z = uniform_image(rng, 16, 16, 1);
    const ImageTensor base = net.predict(x, z, 0.5);
    z.at(0, 15, 15) += 0.75;
    const ImageTensor bumped = net.predict(x, z, 0.5);
    CHECK(bumped.at(0, 0, 0) == base.at(0, 0, 0));   // outside the 9x9 field
    CHECK(bumped.at(0, 15, 15) != base.at(0, 15, 15));
    CHECK(bumped.at(0, 11, 11) != base.at(0, 11, 11)); // corner of the field
    CHECK(bumped.at(0, 10, 10) == base.at(0, 10, 10)); // just beyond it
}

TEST_CASE("forward rejects mismatched input shapes") {
    TinyDenoiser net(1);
    RngStream rng(10);
    net.init_params(rng);
    const ImageTensor x(4, 4, 1, 0.5), z(4, 5, 1, 0.5), z3(4, 4, 3, 0.5);
    CHECK(thrown_code([&] { net.predict(x, z, 0.5); }) == errc::shape_mismatch);
    CHECK(thrown_code([&] { net.predict(x, z3, 0.5); }) == errc::shape_mismatch);
}

TEST_CASE("backward of a zero upstream gradient is zero") {
    TinyDenoiser net(1);
    RngStream rng(11);
    net.init_params(rng);
    TinyDenoiser::Cache cache;
    const ImageTensor x = uniform_image(rng, 5, 5, 1);
    const ImageTensor z = uniform_image(rng, 5, 5, 1);
    (void)net.forward(x, z, 0.5, &cache);
    const std::vector<double> g = net.backward(cache, ImageTensor(5, 5, 1, 0.0));
    REQUIRE(g.size() == net.param_count());
    for (double v : g) CHECK(v == 0.0);
}

// ==== analytic gradients vs central finite differences ====

TEST_CASE("analytic parameter gradients match finite differences through the masked loss") {
    TinyDenoiser net(1);
    RngStream rng(4021);
    net.init_params(rng);
    const int H = 10, W = 10;
    const ImageTensor x_cond = uniform_image(rng, H, W, 1);
    const ImageTensor hr = uniform_image(rng, H, W, 1);
    const ImageTensor eps = gaussian_sample(rng, H, W, 1);
    const double gamma = 0.41;
    ImageTensor z_t(H, W, 1);
    for (size_t i = 0; i < z_t.size(); ++i)
        z_t.data[i] = std::sqrt(gamma) * hr.data[i] + std::sqrt(1.0 - gamma) * eps.data[i];
    BinaryMask mask(H, W, 0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) mask.at(y, x) = static_cast<uint8_t>((y + x) % 2);
    const double inv_n = 1.0 / static_cast<double>(mask.active_count());

    // guard against kinks of the L1 loss: every active residual must clear
    // the finite-difference step by a wide margin
    {
        const ImageTensor pred = net.predict(x_cond, z_t, gamma);
        double min_gap = 1e300;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                if (mask.at(y, x))
                    min_gap = std::min(min_gap, std::fabs(eps.at(0, y, x) - pred.at(0, y, x)));
        REQUIRE(min_gap > 1e-3);
    }

    TinyDenoiser::Cache cache;
    const ImageTensor eps_hat = net.forward(x_cond, z_t, gamma, &cache);
    ImageTensor g_out = masked_loss_grad(eps, eps_hat, mask);
    for (double& v : g_out.data) v *= inv_n;
    const std::vector<double> analytic = net.backward(cache, g_out);
    REQUIRE(analytic.size() == net.param_count());

    const auto loss_at = [&](size_t pi, double value) {
        const double saved = net.params()[pi];
        net.params()[pi] = value;
        const double L = masked_loss(eps, net.predict(x_cond, z_t, gamma), mask) * inv_n;
        net.params()[pi] = saved;
        return L;
    };

    // 50 parameters stratified across each of the four layers
    const size_t spans[4][2] = {{0, 896}, {896, 9248}, {10144, 9248}, {19392, 289}};
    const double h = 1e-5;
    int checked = 0;
    double worst = 0.0;
    for (const auto& span : spans) {
        for (int k = 0; k < 50; ++k) {
            const size_t pi = span[0] + (span[1] * static_cast<size_t>(k)) / 50;
            const double p0 = net.params()[pi];
            const double fd = (loss_at(pi, p0 + h) - loss_at(pi, p0 - h)) / (2.0 * h);
            const double denom = std::max({std::fabs(fd), std::fabs(analytic[pi]), 1e-6});
            const double rel = std::fabs(fd - analytic[pi]) / denom;
            worst = std::max(worst, rel);
            ++checked;
        }
    }
    CHECK(checked == 200);
    CHECK(worst < 1e-4);
}

// ==== training loop ====

TEST_CASE("training on one image drives the masked loss down") {
    auto data = synth_dataset(1, 16, 16, 31, 1.0);
    // give the target some structure so there is something to learn
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) data[0].hr.at(0, y, x) = ((x / 4 + y / 4) % 2) ? 0.9 : 0.1;
    TrainConfig cfg;
    cfg.mode = TrainMode::full;
    cfg.t_train = 50;
    cfg.iters = 200;
    cfg.batch = 1;
    cfg.lr = 1e-3;
    cfg.weight_decay = 0.0;
    cfg.seed = 11;
    const TrainResult res = train(cfg, data);
    REQUIRE(res.loss_log.size() == 200);
    const auto mean = [&](size_t lo, size_t hi) {
        return std::accumulate(res.loss_log.begin() + lo, res.loss_log.begin() + hi, 0.0) /
               static_cast<double>(hi - lo);
    };
    CHECK(mean(180, 200) < mean(0, 20));
    for (double v : res.loss_log) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("mode full is bit-identical to mode yoda under an all-ones attention map") {
    const auto data = synth_dataset(2, 8, 8, 47, 1.0);
    TrainConfig cfg;
    cfg.t_train = 20;
    cfg.iters = 10;
    cfg.batch = 2;
    cfg.lr = 1e-3;
    cfg.seed = 99;
    cfg.mode = TrainMode::yoda;
    const TrainResult a = train(cfg, data);
    cfg.mode = TrainMode::full;
    const TrainResult b = train(cfg, data);
    CHECK(same_doubles(a.net.params(), b.net.params()));
    CHECK(same_doubles(a.loss_log, b.loss_log));
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto data = synth_dataset(3, 8, 8, 53, 0.7);
    TrainConfig cfg;
    cfg.t_train = 16;
    cfg.iters = 6;
    cfg.batch = 2;
    cfg.seed = 1234;
    const TrainResult a = train(cfg, data);
    const TrainResult b = train(cfg, data);
    CHECK(same_doubles(a.net.params(), b.net.params()));
    CHECK(same_doubles(a.loss_log, b.loss_log));
}

TEST_CASE("an always-empty mask yields zero losses and no parameter updates") {
    // attention 0 and lower bound 0: Eq. 8 activates nothing at any t >= 1
    const auto data = synth_dataset(1, 8, 8, 61, 0.0);
    TrainConfig cfg;
    cfg.mode = TrainMode::yoda;
    cfg.t_train = 12;
    cfg.iters = 8;
    cfg.batch = 2;
    cfg.lower_bound = 0.0;
    cfg.weight_decay = 0.0;
    cfg.seed = 321;
    const TrainResult res = train(cfg, data);
    for (double v : res.loss_log) CHECK(v == 0.0);
    TinyDenoiser reference(1);
    RngStream init = RngStream(cfg.seed).split(0);
    reference.init_params(init);
    CHECK(same_doubles(res.net.params(), reference.params()));
}

TEST_CASE("zero iterations returns the freshly initialized network") {
    const auto data = synth_dataset(1, 8, 8, 71, 1.0);
    TrainConfig cfg;
    cfg.iters = 0;
    cfg.seed = 17;
    const TrainResult res = train(cfg, data);
    CHECK(res.loss_log.empty());
    TinyDenoiser reference(1);
    RngStream init = RngStream(cfg.seed).split(0);
    reference.init_params(init);
    CHECK(same_doubles(res.net.params(), reference.params()));
}

TEST_CASE("train validates its configuration and dataset") {
    const auto data = synth_dataset(1, 8, 8, 81, 1.0);
    TrainConfig cfg;
    CHECK(thrown_code([&] { train(cfg, {}); }) == errc::empty_dataset);

    TrainConfig bad = cfg;
    bad.t_train = 0;
    CHECK(thrown_code([&] { train(bad, data); }) == errc::bad_config);
    bad = cfg;
    bad.iters = -1;
    CHECK(thrown_code([&] { train(bad, data); }) == errc::bad_config);
    bad = cfg;
    bad.batch = 0;
    CHECK(thrown_code([&] { train(bad, data); }) == errc::bad_config);
    bad = cfg;
    bad.lower_bound = 1.5;
    CHECK(thrown_code([&] { train(bad, data); }) == errc::bad_config);

    auto mixed = synth_dataset(2, 8, 8, 91, 1.0);
    mixed[1].hr = ImageTensor(8, 8, 3, 0.5);
    mixed[1].x_up = ImageTensor(8, 8, 3, 0.5);
    CHECK(thrown_code([&] { train(cfg, mixed); }) == errc::shape_mismatch);

    auto lopsided = synth_dataset(1, 8, 8, 92, 1.0);
    lopsided[0].x_up = ImageTensor(8, 9, 1, 0.5);
    CHECK(thrown_code([&] { train(cfg, lopsided); }) == errc::shape_mismatch);

    auto off_att = synth_dataset(1, 8, 8, 93, 1.0);
    off_att[0].attention = AttentionMap(7, 8, 0.5);
    CHECK(thrown_code([&] { train(cfg, off_att); }) == errc::shape_mismatch);
}

TEST_CASE("train mode names round-trip and reject unknown strings") {
    CHECK(train_mode_from_name("yoda") == TrainMode::yoda);
    CHECK(train_mode_from_name("full") == TrainMode::full);
    CHECK(std::string(train_mode_name(TrainMode::yoda)) == "yoda");
    CHECK(std::string(train_mode_name(TrainMode::full)) == "full");
    CHECK(thrown_code([] { train_mode_from_name("fast"); }) == errc::usage);
}

// ==== loss CSV ====

TEST_CASE("loss CSV writes one exact row per iteration") {
    const fs::path path = tmp_dir() / "loss_roundtrip.csv";
    const std::vector<double> log = {0.5, 0.25, 1.0 / 3.0, 7.125e-3};
    write_loss_csv(path, log);
    std::ifstream f(path);
    REQUIRE(static_cast<bool>(f));
    std::string line;
    REQUIRE(std::getline(f, line));
    CHECK(line == "iter,loss");
    for (size_t i = 0; i < log.size(); ++i) {
        REQUIRE(std::getline(f, line));
        const size_t comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        CHECK(std::stoull(line.substr(0, comma)) == i + 1);
        CHECK(std::stod(line.substr(comma + 1)) == log[i]); // %.17g round-trips
    }
    CHECK(!std::getline(f, line));
    fs::remove(path);
}

// ==== model serialization ====

TEST_CASE("model files round-trip parameters at f32 precision") {
    TinyDenoiser net(2);
    RngStream rng(505);
    net.init_params(rng);
    const fs::path path = tmp_dir() / "roundtrip.ymdl";
    save_model(path, net, 123, 1e-4, 0.02);
    const LoadedModel m = load_model(path);
    CHECK(m.net.channels() == 2);
    CHECK(m.t_train == 123);
    CHECK(m.beta_start == static_cast<double>(static_cast<float>(1e-4)));
    CHECK(m.beta_end == static_cast<double>(static_cast<float>(0.02)));
    REQUIRE(m.net.param_count() == net.param_count());
    for (size_t i = 0; i < net.param_count(); ++i)
        CHECK(m.net.params()[i] == static_cast<double>(static_cast<float>(net.params()[i])));
    fs::remove(path);
}

TEST_CASE("model loader rejects each corruption with the right code") {
    TinyDenoiser net(1);
    RngStream rng(606);
    net.init_params(rng);
    const fs::path good = tmp_dir() / "good.ymdl";
    save_model(good, net, 10, 1e-4, 0.02);

    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    REQUIRE(bytes.size() == 32 + net.param_count() * 4);

    const auto write_variant = [&](const std::string& data) {
        const fs::path p = tmp_dir() / "variant.ymdl";
        std::ofstream out(p, std::ios::binary);
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        out.close();
        return p;
    };

    std::string bad_magic_bytes = bytes;
    bad_magic_bytes[0] = 'X';
    CHECK(thrown_code([&] { load_model(write_variant(bad_magic_bytes)); }) == errc::bad_magic);

    std::string bad_version = bytes;
    bad_version[4] = 2;
    CHECK(thrown_code([&] { load_model(write_variant(bad_version)); }) == errc::bad_format);

    std::string zero_channels = bytes;
    zero_channels[8] = 0;
    CHECK(thrown_code([&] { load_model(write_variant(zero_channels)); }) == errc::value_range);

    std::string zero_t = bytes;
    zero_t[12] = 0;
    CHECK(thrown_code([&] { load_model(write_variant(zero_t)); }) == errc::value_range);

    std::string wrong_count = bytes;
    wrong_count[24] = static_cast<char>(static_cast<uint8_t>(bytes[24]) + 1);
    CHECK(thrown_code([&] { load_model(write_variant(wrong_count)); }) == errc::bad_format);

    const std::string chopped = bytes.substr(0, bytes.size() - 4);
    CHECK(thrown_code([&] { load_model(write_variant(chopped)); }) == errc::truncated);

    const std::string tiny = bytes.substr(0, 6);
    CHECK(thrown_code([&] { load_model(write_variant(tiny)); }) == errc::truncated);

    CHECK(thrown_code([&] { load_model(tmp_dir() / "does_not_exist.ymdl"); }) ==
          errc::missing_file);

    fs::remove(good);
    fs::remove(tmp_dir() / "variant.ymdl");
}
