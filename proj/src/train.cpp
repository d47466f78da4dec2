#include "yoda/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "yoda/diffusion.hpp"
#include "yoda/errors.hpp"
#include "yoda/kernels.hpp"
#include "yoda/parallel.hpp"
#include "yoda/schedule.hpp"

namespace yoda {

TrainMode train_mode_from_name(const std::string& name) {
    if (name == "yoda") return TrainMode::yoda;
    if (name == "full") return TrainMode::full;
    fail(errc::usage, "unknown train mode: " + name);
}

const char* train_mode_name(TrainMode m) { return m == TrainMode::yoda ? "yoda" : "full"; }

static void check_loss_shapes(const ImageTensor& eps_true, const ImageTensor& eps_pred,
                              const BinaryMask& m) {
    if (!eps_true.same_shape(eps_pred) || eps_true.h != m.h || eps_true.w != m.w)
        fail(errc::shape_mismatch, "masked_loss shape mismatch");
}

double masked_loss(const ImageTensor& eps_true, const ImageTensor& eps_pred, const BinaryMask& m) {
    check_loss_shapes(eps_true, eps_pred, m);
    const auto& K = kernels::table();
    double loss = 0.0;
    for (int ci = 0; ci < eps_true.c; ++ci)
        loss += K.masked_abs_diff(eps_true.pixels(), m.m.data(), eps_true.plane(ci),
                                  eps_pred.plane(ci));
    return loss;
}

ImageTensor masked_loss_grad(const ImageTensor& eps_true, const ImageTensor& eps_pred,
                             const BinaryMask& m) {
    check_loss_shapes(eps_true, eps_pred, m);
    const auto& K = kernels::table();
    ImageTensor g(eps_true.h, eps_true.w, eps_true.c);
    for (int ci = 0; ci < eps_true.c; ++ci)
        K.masked_sign(eps_true.pixels(), m.m.data(), eps_pred.plane(ci), eps_true.plane(ci),
                      g.plane(ci));
    return g;
}

// ==== optimizer ====

AdamW::AdamW(size_t n, double lr, double weight_decay)
    : lr_(lr), wd_(weight_decay), m_(n, 0.0), v_(n, 0.0) {
    if (!(lr > 0.0) || !std::isfinite(lr)) fail(errc::bad_config, "learning rate must be positive");
    if (wd_ < 0.0 || !std::isfinite(wd_)) fail(errc::bad_config, "weight decay must be >= 0");
}

void AdamW::step(std::vector<double>& params, const std::vector<double>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        fail(errc::shape_mismatch, "optimizer state size mismatch");
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++steps_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
        v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g * g;
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= lr_ * (mhat / (std::sqrt(vhat) + kEps) + wd_ * params[i]);
    }
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& log) {
    std::ofstream f(path);
    if (!f) fail(errc::missing_file, "cannot open for write: " + path.string());
    f << "iter,loss\n";
    char line[64];
    for (size_t i = 0; i < log.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.17g\n", i + 1, log[i]);
        f << line;
    }
    if (!f) fail(errc::truncated, "short write: " + path.string());
}

// ==== training loop ====

static void validate_train_config(const TrainConfig& cfg) {
    if (cfg.t_train < 1) fail(errc::bad_config, "t_train must be >= 1");
    if (cfg.iters < 0) fail(errc::bad_config, "iters must be >= 0");
    if (cfg.batch < 1) fail(errc::bad_config, "batch must be >= 1");
    if (cfg.lower_bound < 0.0 || cfg.lower_bound > 1.0)
        fail(errc::bad_config, "lower_bound must be in [0,1]");
}

TrainResult train(const TrainConfig& cfg, const std::vector<TrainItem>& data) {
    validate_train_config(cfg);
    if (data.empty()) fail(errc::empty_dataset, "training dataset is empty");
    const int C = data.front().hr.c;
    for (const TrainItem& it : data) {
        if (it.hr.c != C) fail(errc::shape_mismatch, "mixed channel counts in dataset");
        if (!it.hr.same_shape(it.x_up))
            fail(errc::shape_mismatch, "conditioning shape mismatch: " + it.id);
        if (it.attention.h != it.hr.h || it.attention.w != it.hr.w)
            fail(errc::shape_mismatch, "attention map shape mismatch: " + it.id);
    }
    const NoiseSchedule sched = make_linear_schedule(cfg.t_train, cfg.beta_start, cfg.beta_end);

    // Per-item masks: yoda mode evaluates Eq. 8 at the drawn t, full mode
    // always trains every pixel.
    std::vector<MaskSchedule> mask_sched;
    std::vector<BinaryMask> full_mask;
    if (cfg.mode == TrainMode::yoda) {
        mask_sched.reserve(data.size());
        for (const TrainItem& it : data)
            mask_sched.push_back(make_mask_schedule(it.attention, cfg.lower_bound, cfg.t_train));
    } else {
        full_mask.reserve(data.size());
        for (const TrainItem& it : data) full_mask.emplace_back(it.hr.h, it.hr.w, 1);
    }

    const RngStream root(cfg.seed);
    RngStream init_rng = root.split(0);
    RngStream data_rng = root.split(1);
    RngStream noise_rng = root.split(2);

    TrainResult res{TinyDenoiser(C), {}};
    res.net.init_params(init_rng);
    AdamW opt(res.net.param_count(), cfg.lr, cfg.weight_decay);
    res.loss_log.reserve(cfg.iters);

    struct Slot {
        size_t idx = 0;
        int t = 0;
        ImageTensor eps;
        double loss = 0.0; // already active-pixel normalized
        std::vector<double> grads;
    };
    std::vector<Slot> slots(cfg.batch);
    std::vector<double> grad_acc(res.net.param_count());

    for (int iter = 0; iter < cfg.iters; ++iter) {
        for (Slot& s : slots) {
            s.idx = data_rng.next_below(data.size());
            s.t = 1 + static_cast<int>(data_rng.next_below(cfg.t_train));
        }
        for (Slot& s : slots) {
            const ImageTensor& hr = data[s.idx].hr;
            s.eps = gaussian_sample(noise_rng, hr.h, hr.w, hr.c);
        }

        parallel_for(slots.size(), [&](size_t bi) {
            Slot& s = slots[bi];
            const TrainItem& it = data[s.idx];
            const double g = sched.gamma(s.t);
            const auto& K = kernels::table();
            ImageTensor z_t(it.hr.h, it.hr.w, C);
            K.axpby(z_t.size(), std::sqrt(g), it.hr.data.data(), std::sqrt(1.0 - g),
                    s.eps.data.data(), z_t.data.data());
            const BinaryMask mask = cfg.mode == TrainMode::yoda ? mask_at(mask_sched[s.idx], s.t)
                                                                : full_mask[s.idx];
            const size_t n_active = mask.active_count();
            if (n_active == 0) {
                s.loss = 0.0;
                s.grads.clear();
                return;
            }
            TinyDenoiser::Cache cache;
            const ImageTensor eps_hat = res.net.forward(it.x_up, z_t, g, &cache);
            const double inv_n = 1.0 / static_cast<double>(n_active);
            s.loss = masked_loss(s.eps, eps_hat, mask) * inv_n;
            ImageTensor g_out = masked_loss_grad(s.eps, eps_hat, mask);
            for (double& v : g_out.data) v *= inv_n;
            s.grads = res.net.backward(cache, g_out);
        });

        std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
        double loss_sum = 0.0;
        const double inv_b = 1.0 / static_cast<double>(cfg.batch);
        for (const Slot& s : slots) {
            loss_sum += s.loss;
            if (s.grads.empty()) continue;
            for (size_t i = 0; i < grad_acc.size(); ++i) grad_acc[i] += s.grads[i];
        }
        for (double& v : grad_acc) v *= inv_b;
        res.loss_log.push_back(loss_sum * inv_b);
        opt.step(res.net.params(), grad_acc);
    }
    return res;
}

} // namespace yoda
