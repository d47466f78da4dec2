#include "yoda/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "yoda/errors.hpp"
#include "yoda/guided.hpp"
#include "yoda/metrics.hpp"
#include "yoda/parallel.hpp"
#include "yoda/pnm.hpp"
#include "yoda/resize.hpp"

namespace yoda {

namespace fs = std::filesystem;

static std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) fail(errc::missing_file, "cannot open for write: " + p.string());
    return f;
}

static void finish_out(std::ofstream& f, const fs::path& p) {
    f.flush();
    if (!f) fail(errc::truncated, "short write: " + p.string());
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    validate_experiment_config(cfg);
    fs::create_directories(cfg.out_dir);

    const std::vector<Sample> samples = ingest(cfg.data_dir, cfg.scale);
    const std::vector<AttentionMap> maps =
        precompute_attention(samples, cfg.attention, cfg.out_dir / "attention_cache");

    const size_t n = samples.size();
    const size_t n_held = (n + 7) / 8; // ceil(N/8)
    const size_t n_train = n - n_held;
    if (n_train == 0)
        fail(errc::empty_dataset, "need at least 2 images to split a held-out set");

    std::vector<TrainItem> items;
    items.reserve(n_train);
    for (size_t i = 0; i < n_train; ++i)
        items.push_back(TrainItem{samples[i].id, samples[i].hr,
                                  bicubic_resize(samples[i].lr, samples[i].hr.h, samples[i].hr.w),
                                  maps[i]});

    fs::create_directories(cfg.out_dir / "mask_stats");
    for (size_t i = n_train; i < n; ++i)
        write_mask_stats_csv(cfg.out_dir / "mask_stats" / (samples[i].id + ".csv"),
                             make_mask_schedule(maps[i], cfg.lower_bound, cfg.t_eval));

    const NoiseSchedule eval_sched =
        respace_schedule(make_linear_schedule(cfg.t_train, cfg.beta_start, cfg.beta_end),
                         cfg.t_eval);

    ExperimentReport report;
    report.images_train = n_train;
    report.images_held = n_held;
    fs::create_directories(cfg.out_dir / "models");

    for (const TrainMode mode : {TrainMode::yoda, TrainMode::full}) {
        const std::string name = train_mode_name(mode);
        TrainConfig tc;
        tc.mode = mode;
        tc.t_train = cfg.t_train;
        tc.beta_start = cfg.beta_start;
        tc.beta_end = cfg.beta_end;
        tc.iters = cfg.iters;
        tc.batch = cfg.batch;
        tc.lr = cfg.lr;
        tc.weight_decay = cfg.weight_decay;
        tc.lower_bound = cfg.lower_bound;
        tc.seed = cfg.seed_train;
        TrainResult tr = train(tc, items);
        write_loss_csv(cfg.out_dir / ("loss_" + name + ".csv"), tr.loss_log);
        save_model(cfg.out_dir / "models" / ("model_" + name + ".ymdl"), tr.net, cfg.t_train,
                   cfg.beta_start, cfg.beta_end);

        fs::create_directories(cfg.out_dir / "samples" / name);
        std::vector<ImageTensor> srs(n_held);
        parallel_for(n_held, [&](size_t k) {
            const Sample& s = samples[n_train + k];
            RngStream rng = RngStream(cfg.seed_sample).split(k);
            if (mode == TrainMode::yoda) {
                GuidedConfig gc;
                gc.schedule = eval_sched;
                gc.mask = make_mask_schedule(maps[n_train + k], cfg.lower_bound, cfg.t_eval);
                srs[k] = yoda_sample(tr.net, s.lr, gc, rng);
            } else {
                const ImageTensor x_up = bicubic_resize(s.lr, s.hr.h, s.hr.w);
                srs[k] = baseline_sample(tr.net, x_up, eval_sched, rng);
            }
        });

        ModeSummary& ms = mode == TrainMode::yoda ? report.yoda : report.full;
        ms.loss_log = std::move(tr.loss_log);
        const fs::path eval_path = cfg.out_dir / ("eval_" + name + ".csv");
        std::ofstream ef = open_out(eval_path);
        ef << "filename,psnr,ssim,shift_r,shift_g,shift_b\n";
        double psnr_sum = 0.0, ssim_sum = 0.0, shift_sum = 0.0;
        for (size_t k = 0; k < n_held; ++k) {
            const Sample& s = samples[n_train + k];
            const char* ext = s.hr.c == 3 ? ".ppm" : ".pgm";
            write_pnm(cfg.out_dir / "samples" / name / (s.id + ext), srs[k]);
            const double p = psnr(srs[k], s.hr);
            const double sm = ssim(srs[k], s.hr);
            psnr_sum += p;
            ssim_sum += sm;
            char line[256];
            if (s.hr.c == 3) {
                const ColorShift shift = color_shift(srs[k], s.hr);
                shift_sum += shift.summary;
                std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              (s.id + ext).c_str(), p, sm, shift.per_channel[0],
                              shift.per_channel[1], shift.per_channel[2]);
            } else {
                std::snprintf(line, sizeof line, "%s,%.17g,%.17g,,,\n", (s.id + ext).c_str(), p,
                              sm);
            }
            ef << line;
        }
        finish_out(ef, eval_path);
        const double inv = 1.0 / static_cast<double>(n_held);
        ms.psnr_mean = psnr_sum * inv;
        ms.ssim_mean = ssim_sum * inv;
        ms.color_shift_mean = samples.front().hr.c == 3
                                  ? shift_sum * inv
                                  : std::numeric_limits<double>::quiet_NaN();
    }

    const fs::path summary_path = cfg.out_dir / "summary.csv";
    std::ofstream sf = open_out(summary_path);
    sf << "mode,images,psnr_mean,ssim_mean,color_shift_mean\n";
    for (const TrainMode mode : {TrainMode::yoda, TrainMode::full}) {
        const ModeSummary& ms = mode == TrainMode::yoda ? report.yoda : report.full;
        char line[160];
        std::snprintf(line, sizeof line, "%s,%zu,%.17g,%.17g,%.17g\n", train_mode_name(mode),
                      n_held, ms.psnr_mean, ms.ssim_mean, ms.color_shift_mean);
        sf << line;
    }
    finish_out(sf, summary_path);
    return report;
}

} // namespace yoda
