#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <functional>
#include <vector>

#include "yoda/diffusion.hpp"
#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"
#include "yoda/rng.hpp"
#include "yoda/schedule.hpp"

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

struct ZeroDenoiser : Denoiser {
    int c;
    explicit ZeroDenoiser(int c_) : c(c_) {}
    int channels() const override { return c; }
    ImageTensor predict(const ImageTensor&, const ImageTensor& z_t, double) const override {
        return ImageTensor(z_t.h, z_t.w, z_t.c, 0.0);
    }
};

struct ConstDenoiser : Denoiser {
    int c;
    double v;
    ConstDenoiser(int c_, double v_) : c(c_), v(v_) {}
    int channels() const override { return c; }
    ImageTensor predict(const ImageTensor&, const ImageTensor& z_t, double) const override {
        return ImageTensor(z_t.h, z_t.w, z_t.c, v);
    }
};

ImageTensor random_image(RngStream& rng, int h, int w, int c) {
    ImageTensor img(h, w, c);
    for (double& v : img.data) v = rng.next_uniform();
    return img;
}

} // namespace

// ==== forward process ====

TEST_CASE("forward at gamma = 1 returns z0 unchanged") {
    RngStream rng(10);
    const ImageTensor z0 = random_image(rng, 4, 5, 3);
    auto [z_t, eps] = forward_sample(z0, 1.0, rng);
    for (size_t i = 0; i < z0.size(); ++i) CHECK(z_t.data[i] == z0.data[i]);
    CHECK(eps.same_shape(z0));
}

TEST_CASE("forward of a zero image is the scaled noise") {
    RngStream rng(11);
    const ImageTensor z0(3, 3, 1, 0.0);
    auto [z_t, eps] = forward_sample(z0, 0.5, rng);
    const double s = std::sqrt(0.5);
    for (size_t i = 0; i < z_t.size(); ++i) CHECK(z_t.data[i] == s * eps.data[i]);
}

TEST_CASE("forward returns the exact noise used: inversion recovers z0") {
    RngStream rng(12);
    const ImageTensor z0 = random_image(rng, 6, 4, 2);
    const double gamma = 0.37;
    auto [z_t, eps] = forward_sample(z0, gamma, rng);
    for (size_t i = 0; i < z0.size(); ++i) {
        const double back = (z_t.data[i] - std::sqrt(1.0 - gamma) * eps.data[i]) /
                            std::sqrt(gamma);
        CHECK(back == doctest::Approx(z0.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("forward consumes gaussian draws from the given stream only") {
    RngStream rng(13);
    const ImageTensor z0(5, 5, 1, 0.2);
    forward_sample(z0, 0.9, rng);
    CHECK(rng.draws() == 2 * ((25 + 1) / 2)); // 26 uniforms for 25 normals
}

TEST_CASE("forward rejects gamma outside (0,1]") {
    RngStream rng(14);
    const ImageTensor z0(2, 2, 1, 0.5);
    CHECK(thrown_code([&] { forward_sample(z0, 0.0, rng); }) == errc::value_range);
    CHECK(thrown_code([&] { forward_sample(z0, -0.5, rng); }) == errc::value_range);
    CHECK(thrown_code([&] { forward_sample(z0, 1.0 + 1e-12, rng); }) == errc::value_range);
}

TEST_CASE("forward matches its analytic moments by Monte Carlo") {
    const double gamma = 0.3;
    const ImageTensor z0(1, 1, 1, 0.7);
    RngStream rng(20240701);
    const int N = 100000;
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < N; ++i) {
        auto [z_t, eps] = forward_sample(z0, gamma, rng);
        const double v = z_t.data[0];
        mean += v;
        sq += v * v;
    }
    mean /= N;
    const double var = sq / N - mean * mean;
    const double expect_mean = std::sqrt(gamma) * 0.7;
    const double expect_var = 1.0 - gamma;
    const double mean_tol = 4.0 * std::sqrt(expect_var / N);
    CHECK(std::abs(mean - expect_mean) < mean_tol);
    CHECK(std::abs(var / expect_var - 1.0) < 0.03);
}

TEST_CASE("chained single steps have the same law as the composite forward") {
    // var of z_T must equal 1 - gamma_T whether noise is added stepwise or at once
    const NoiseSchedule s = make_linear_schedule(5, 0.05, 0.3);
    const ImageTensor z0(1, 1, 1, 0.4);
    RngStream rng(99887);
    const int N = 40000;
    double chain_sq = 0.0, chain_mean = 0.0;
    std::vector<double> xi(2);
    for (int i = 0; i < N; ++i) {
        double z = z0.data[0];
        for (int t = 1; t <= 5; ++t) {
            rng.fill_normal(xi);
            z = std::sqrt(s.alpha(t)) * z + std::sqrt(1.0 - s.alpha(t)) * xi[0];
        }
        chain_mean += z;
        chain_sq += z * z;
    }
    chain_mean /= N;
    const double chain_var = chain_sq / N - chain_mean * chain_mean;
    const double expect_var = 1.0 - s.gamma(5);
    CHECK(chain_mean == doctest::Approx(std::sqrt(s.gamma(5)) * 0.4).epsilon(0.05));
    CHECK(std::abs(chain_var / expect_var - 1.0) < 0.04);
}

// ==== posterior mean ====

TEST_CASE("posterior mean with a zero predictor is z / sqrt(alpha)") {
    RngStream rng(15);
    const ImageTensor z = random_image(rng, 3, 4, 2);
    const ImageTensor x_up(3, 4, 2, 0.0);
    const ZeroDenoiser d(2);
    const ImageTensor mu = posterior_mean(d, x_up, z, 0.96, 0.5);
    const double inv = 1.0 / std::sqrt(0.96);
    for (size_t i = 0; i < z.size(); ++i) CHECK(mu.data[i] == doctest::Approx(inv * z.data[i]));
}

TEST_CASE("posterior mean worked example: alpha .96, gamma .5, unit inputs") {
    const ImageTensor z(1, 1, 1, 1.0), x_up(1, 1, 1, 0.0);
    const ConstDenoiser d(1, 1.0);
    const ImageTensor mu = posterior_mean(d, x_up, z, 0.96, 0.5);
    // (1 - 0.04/sqrt(0.5)) / sqrt(0.96), frozen from an independent evaluation
    CHECK(mu.data[0] == doctest::Approx(0.962885699240695).epsilon(1e-12));
    const double direct =
        (1.0 / std::sqrt(0.96)) * 1.0 -
        (1.0 / std::sqrt(0.96)) * ((1.0 - 0.96) / std::sqrt(1.0 - 0.5)) * 1.0;
    CHECK(mu.data[0] == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("posterior mean of a zero state is the scaled prediction") {
    const ImageTensor z(2, 2, 1, 0.0), x_up(2, 2, 1, 0.0);
    const ConstDenoiser d(1, 0.8);
    const double alpha = 0.9, gamma = 0.4;
    const ImageTensor mu = posterior_mean(d, x_up, z, alpha, gamma);
    const double coef = -(1.0 / std::sqrt(alpha)) * ((1.0 - alpha) / std::sqrt(1.0 - gamma));
    for (double v : mu.data) CHECK(v == doctest::Approx(coef * 0.8).epsilon(1e-14));
}

TEST_CASE("posterior mean validates alpha, gamma, and shapes") {
    const ImageTensor z(2, 2, 1, 0.5), x_up(2, 2, 1, 0.0);
    const ZeroDenoiser d(1);
    CHECK(thrown_code([&] { posterior_mean(d, x_up, z, 1.0, 0.5); }) == errc::value_range);
    CHECK(thrown_code([&] { posterior_mean(d, x_up, z, 0.0, 0.5); }) == errc::value_range);
    CHECK(thrown_code([&] { posterior_mean(d, x_up, z, 0.9, 1.0); }) == errc::value_range);
    CHECK(thrown_code([&] { posterior_mean(d, x_up, z, 0.9, 0.0); }) == errc::value_range);
    const ImageTensor bad(2, 3, 1, 0.0);
    CHECK(thrown_code([&] { posterior_mean(d, bad, z, 0.9, 0.5); }) == errc::shape_mismatch);
}

// ==== reverse step ====

TEST_CASE("final reverse step is exactly the posterior mean and draws nothing") {
    RngStream rng(16);
    const ImageTensor z = random_image(rng, 4, 4, 1);
    const ImageTensor x_up(4, 4, 1, 0.0);
    const ZeroDenoiser d(1);
    RngStream step_rng(500);
    const ImageTensor out = reverse_step(d, x_up, z, 0.9, 0.5, step_rng, true);
    CHECK(step_rng.draws() == 0);
    const ImageTensor mu = posterior_mean(d, x_up, z, 0.9, 0.5);
    CHECK(std::memcmp(out.data.data(), mu.data.data(), mu.size() * sizeof(double)) == 0);
}

TEST_CASE("non-final reverse step adds sqrt(1-alpha)-scaled noise bit for bit") {
    RngStream rng(17);
    const ImageTensor z = random_image(rng, 3, 5, 2);
    const ImageTensor x_up(3, 5, 2, 0.0);
    const ConstDenoiser d(2, 0.3);
    const double alpha = 0.91, gamma = 0.6;
    RngStream a(777), b(777);
    const ImageTensor out = reverse_step(d, x_up, z, alpha, gamma, a, false);
    const ImageTensor mu = posterior_mean(d, x_up, z, alpha, gamma);
    const ImageTensor xi = gaussian_sample(b, 3, 5, 2);
    ImageTensor expect(3, 5, 2);
    kernels::table().add_scaled(mu.size(), mu.data.data(), std::sqrt(1.0 - alpha), xi.data.data(),
                                expect.data.data());
    CHECK(std::memcmp(out.data.data(), expect.data.data(), out.size() * sizeof(double)) == 0);
    CHECK(a.draws() == b.draws());
}

TEST_CASE("reverse step injects unit-free variance 1 - alpha") {
    const ImageTensor z(1, 1, 1, 0.5), x_up(1, 1, 1, 0.0);
    const ZeroDenoiser d(1);
    const double alpha = 0.9, gamma = 0.5;
    RngStream rng(31415);
    const int N = 60000;
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < N; ++i) {
        const ImageTensor out = reverse_step(d, x_up, z, alpha, gamma, rng, false);
        mean += out.data[0];
        sq += out.data[0] * out.data[0];
    }
    mean /= N;
    const double var = sq / N - mean * mean;
    CHECK(mean == doctest::Approx(0.5 / std::sqrt(alpha)).epsilon(0.02));
    CHECK(std::abs(var / (1.0 - alpha) - 1.0) < 0.04);
}

// ==== baseline chain ====

TEST_CASE("single-step baseline with a zero predictor is the clamped scaled draw") {
    const NoiseSchedule s = make_linear_schedule(1, 0.1, 0.1);
    const ZeroDenoiser d(1);
    const ImageTensor x_up(4, 4, 1, 0.0);
    RngStream a(2025), b(2025);
    const ImageTensor out = baseline_sample(d, x_up, s, a);
    ImageTensor expect = gaussian_sample(b, 4, 4, 1);
    const double inv = 1.0 / std::sqrt(s.alpha(1));
    for (double& v : expect.data) {
        v = inv * v;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
    }
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data[i] == expect.data[i]);
}

TEST_CASE("baseline sampling is deterministic in the seed") {
    const NoiseSchedule s = make_linear_schedule(20, 1e-3, 0.05);
    const ConstDenoiser d(3, 0.1);
    const ImageTensor x_up(6, 6, 3, 0.5);
    RngStream a(7), b(7), c(8);
    const ImageTensor r1 = baseline_sample(d, x_up, s, a);
    const ImageTensor r2 = baseline_sample(d, x_up, s, b);
    CHECK(std::memcmp(r1.data.data(), r2.data.data(), r1.size() * sizeof(double)) == 0);
    const ImageTensor r3 = baseline_sample(d, x_up, s, c);
    CHECK(std::memcmp(r1.data.data(), r3.data.data(), r1.size() * sizeof(double)) != 0);
}

TEST_CASE("baseline output lies in [0,1] and consumes the documented draw count") {
    const NoiseSchedule s = make_linear_schedule(9, 1e-3, 0.04);
    const ZeroDenoiser d(1);
    const ImageTensor x_up(3, 3, 1, 0.5);
    RngStream rng(4);
    const ImageTensor out = baseline_sample(d, x_up, s, rng);
    for (double v : out.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // 9 values per draw, 10 uniforms each: z_T plus 8 non-final steps
    CHECK(rng.draws() == 10 * 9);
}

TEST_CASE("baseline rejects a channel mismatch") {
    const NoiseSchedule s = make_linear_schedule(3);
    const ZeroDenoiser d(3);
    const ImageTensor x_up(2, 2, 1, 0.5);
    RngStream rng(1);
    CHECK(thrown_code([&] { baseline_sample(d, x_up, s, rng); }) == errc::shape_mismatch);
}

// ==== analytic oracle denoiser ====

TEST_CASE("analytic predictor with unit prior is a pure scaling") {
    // mean 0, stddev 1: denom = 1, prediction = sqrt(1-g) * z
    AnalyticGaussianDenoiser d({0.0}, 1.0);
    RngStream rng(18);
    const ImageTensor z = random_image(rng, 4, 3, 1);
    const ImageTensor x_up(4, 3, 1, 0.0);
    const ImageTensor eps = d.predict(x_up, z, 0.5);
    const double scale = std::sqrt(0.5);
    for (size_t i = 0; i < z.size(); ++i) CHECK(eps.data[i] == scale * z.data[i]);
}

TEST_CASE("analytic predictor vanishes at the prior mean point") {
    AnalyticGaussianDenoiser d({0.5}, 2.0);
    const double gamma = 0.64;
    const ImageTensor z(2, 2, 1, std::sqrt(gamma) * 0.5);
    const ImageTensor x_up(2, 2, 1, 0.0);
    const ImageTensor eps = d.predict(x_up, z, gamma);
    for (double v : eps.data) CHECK(v == 0.0);
}

TEST_CASE("analytic predictor approaches the deterministic limit as stddev -> 0") {
    const double gamma = 0.5, m = 0.3, zval = 0.9;
    AnalyticGaussianDenoiser d({m}, 1e-6);
    const ImageTensor z(1, 1, 1, zval), x_up(1, 1, 1, 0.0);
    const double got = d.predict(x_up, z, gamma).data[0];
    const double limit = (zval - std::sqrt(gamma) * m) / std::sqrt(1.0 - gamma);
    CHECK(got == doctest::Approx(limit).epsilon(1e-9));
}

TEST_CASE("analytic predictor accepts gamma = 1 and returns zero there") {
    AnalyticGaussianDenoiser d({0.2, 0.4}, 0.5);
    const ImageTensor z(2, 2, 2, 0.7), x_up(2, 2, 2, 0.0);
    const ImageTensor eps = d.predict(x_up, z, 1.0);
    for (double v : eps.data) CHECK(v == 0.0);
}

TEST_CASE("analytic predictor validates construction and inputs") {
    CHECK(thrown_code([] { AnalyticGaussianDenoiser({}, 1.0); }) == errc::usage);
    CHECK(thrown_code([] { AnalyticGaussianDenoiser({0.0}, 0.0); }) == errc::usage);
    CHECK(thrown_code([] { AnalyticGaussianDenoiser({0.0}, -1.0); }) == errc::usage);
    AnalyticGaussianDenoiser d({0.0}, 1.0);
    const ImageTensor z(2, 2, 2, 0.5), x_up(2, 2, 2, 0.0);
    CHECK(thrown_code([&] { d.predict(x_up, z, 0.5); }) == errc::shape_mismatch);
    const ImageTensor z1(2, 2, 1, 0.5);
    CHECK(thrown_code([&] { d.predict(x_up, z1, 0.0); }) == errc::value_range);
    CHECK(thrown_code([&] { d.predict(x_up, z1, 1.5); }) == errc::value_range);
}

TEST_CASE("analytic predictor is exactly unbiased inside the forward process") {
    // E[eps_hat] over forward draws of z_t should be 0 when z0 ~ prior mean
    const double gamma = 0.6, stddev = 0.25;
    AnalyticGaussianDenoiser d({0.5}, stddev);
    RngStream rng(271828);
    const int N = 50000;
    double acc = 0.0;
    const ImageTensor x_up(1, 1, 1, 0.0);
    for (int i = 0; i < N; ++i) {
        // z0 drawn from the prior, then diffused
        double z0;
        {
            std::vector<double> v(2);
            rng.fill_normal(v);
            z0 = 0.5 + stddev * v[0];
        }
        ImageTensor z0t(1, 1, 1, z0);
        auto [z_t, eps] = forward_sample(z0t, gamma, rng);
        acc += d.predict(x_up, z_t, gamma).data[0];
    }
    acc /= N;
    // prediction variance is bounded by 1, so 4 sigma is 4/sqrt(N)
    CHECK(std::abs(acc) < 4.0 / std::sqrt(static_cast<double>(N)));
}
