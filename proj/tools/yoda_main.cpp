// Command-line surface: synth, attention, mask-stats, train, sample, eval,
// experiment. Exit codes: 0 ok, 1 usage, 2 data/format, 3 numeric (NaN).
// Env: YODA_THREADS caps workers, YODA_KERNELS={auto|scalar|avx2|neon}
// pins the kernel backend.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "yoda/dataset.hpp"
#include "yoda/errors.hpp"
#include "yoda/experiment.hpp"
#include "yoda/guided.hpp"
#include "yoda/kernels.hpp"
#include "yoda/metrics.hpp"
#include "yoda/pnm.hpp"
#include "yoda/resize.hpp"

namespace fs = std::filesystem;
using namespace yoda;

namespace {

AggregateMode aggregate_from_name(const std::string& s) {
    if (s == "max") return AggregateMode::max;
    if (s == "avg") return AggregateMode::avg;
    fail(errc::usage, "aggregate must be max or avg: " + s);
}

// ==== synth ====

struct SynthOpts {
    std::string out;
    SynthConfig cfg;
};

void cmd_synth(const SynthOpts& o) {
    const auto names = synth_dataset(o.out, o.cfg);
    std::cout << "wrote " << names.size() << " images to " << o.out << "\n";
}

// ==== attention ====

struct AttentionOpts {
    std::string input, out;
    std::string extractor = "edge";
    std::string aggregate = "max";
    ExtractorConfig knobs; // tuning flags shared by all listed extractors
};

void cmd_attention(const AttentionOpts& o) {
    const ImageTensor img = read_pnm(o.input);
    AttentionPipeline pipe = parse_attention_spec(o.extractor, aggregate_from_name(o.aggregate));
    for (ExtractorConfig& e : pipe.extractors) {
        const ExtractorKind kind = e.kind;
        e = o.knobs;
        e.kind = kind;
    }
    std::vector<AttentionMap> maps;
    maps.reserve(pipe.extractors.size());
    for (const ExtractorConfig& e : pipe.extractors) maps.push_back(extract_attention(img, e));
    write_ymap(o.out, aggregate(maps, pipe.aggregate));
    std::cout << "wrote " << o.out << "\n";
}

// ==== mask-stats ====

struct MaskStatsOpts {
    std::string attention, out;
    int steps = 500;
    double lower_bound = 0.2;
};

void cmd_mask_stats(const MaskStatsOpts& o) {
    const AttentionMap a = read_ymap(o.attention);
    const MaskSchedule s = make_mask_schedule(a, o.lower_bound, o.steps);
    write_mask_stats_csv(o.out, s);
    char line[64];
    std::snprintf(line, sizeof line, "diffused_pixel_ratio %.17g\n", diffused_pixel_ratio(s));
    std::cout << line;
}

// ==== train ====

struct TrainOpts {
    std::string data, out, loss_log, cache;
    std::string attention = "edge";
    std::string aggregate = "max";
    std::string mode = "yoda";
    int scale = 4;
    TrainConfig cfg;
};

std::vector<AttentionMap> attention_for(const std::vector<Sample>& samples,
                                        const std::string& spec, const std::string& agg,
                                        const fs::path& cache_dir) {
    if (spec.rfind("external:", 0) == 0) {
        return load_external_attention(samples, spec.substr(std::string("external:").size()));
    }
    const AttentionPipeline pipe = parse_attention_spec(spec, aggregate_from_name(agg));
    return precompute_attention(samples, pipe, cache_dir);
}

void cmd_train(TrainOpts& o) {
    const std::vector<Sample> samples = ingest(o.data, o.scale);
    const fs::path cache = o.cache.empty() ? fs::path(o.data) / ".attention_cache"
                                           : fs::path(o.cache);
    const std::vector<AttentionMap> maps = attention_for(samples, o.attention, o.aggregate, cache);
    std::vector<TrainItem> items;
    items.reserve(samples.size());
    for (size_t i = 0; i < samples.size(); ++i)
        items.push_back(TrainItem{samples[i].id, samples[i].hr,
                                  bicubic_resize(samples[i].lr, samples[i].hr.h, samples[i].hr.w),
                                  maps[i]});
    o.cfg.mode = train_mode_from_name(o.mode);
    const TrainResult res = train(o.cfg, items);
    save_model(o.out, res.net, o.cfg.t_train, o.cfg.beta_start, o.cfg.beta_end);
    if (!o.loss_log.empty()) write_loss_csv(o.loss_log, res.loss_log);
    const double last = res.loss_log.empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : res.loss_log.back();
    char line[96];
    std::snprintf(line, sizeof line, "trained %d iters, final loss %.6g\n", o.cfg.iters, last);
    std::cout << line << "wrote " << o.out << "\n";
}

// ==== sample ====

struct SampleOpts {
    std::string input, model, out, trajectory;
    std::string attention = "edge";
    int scale = 4;
    int steps = 0; // 0 -> the model's T_train
    double lower_bound = 0.2;
    uint64_t seed = 0;
    bool no_mask_input = false;
    bool shared_branch_noise = false;
};

void cmd_sample(const SampleOpts& o) {
    LoadedModel lm = load_model(o.model);
    const ImageTensor lr = read_pnm(o.input);
    if (lr.c != lm.net.channels())
        fail(errc::shape_mismatch, "model expects " + std::to_string(lm.net.channels()) +
                                       " channels, input has " + std::to_string(lr.c));
    const int t_eval = o.steps == 0 ? lm.t_train : o.steps;
    const NoiseSchedule sched = respace_schedule(
        make_linear_schedule(lm.t_train, lm.beta_start, lm.beta_end), t_eval);

    AttentionMap map;
    if (o.attention.size() > 5 && o.attention.rfind(".ymap") == o.attention.size() - 5) {
        map = read_ymap(o.attention); // map dims define the output resolution
    } else {
        ExtractorConfig e;
        e.kind = extractor_kind_from_name(o.attention);
        map = resample_map(extract_attention(lr, e), lr.h * o.scale, lr.w * o.scale);
    }

    GuidedConfig gc;
    gc.schedule = sched;
    gc.mask = make_mask_schedule(map, o.lower_bound, t_eval);
    gc.mask_denoiser_input = !o.no_mask_input;
    gc.shared_branch_noise = o.shared_branch_noise;

    RngStream rng(o.seed);
    std::vector<std::pair<int, ImageTensor>> traj;
    const ImageTensor sr =
        yoda_sample(lm.net, lr, gc, rng, o.trajectory.empty() ? nullptr : &traj);
    write_pnm(o.out, sr);
    if (!o.trajectory.empty()) {
        fs::create_directories(o.trajectory);
        const char* ext = sr.c == 3 ? ".ppm" : ".pgm";
        for (const auto& [t, img] : traj) {
            char name[32];
            std::snprintf(name, sizeof name, "step_%05d%s", t, ext);
            write_pnm(fs::path(o.trajectory) / name, img);
        }
    }
    std::cout << "wrote " << o.out << "\n";
}

// ==== eval ====

struct EvalOpts {
    std::string hr, sr, out, attention, regional;
    bool ref_normalize = false;
};

void cmd_eval(const EvalOpts& o) {
    if (!o.regional.empty() && o.attention.empty())
        fail(errc::usage, "--regional requires --attention");
    const std::vector<Sample> refs = ingest(o.hr, 1); // scale 1: load only
    std::ostringstream csv;
    csv << "filename,psnr,ssim,shift_r,shift_g,shift_b\n";

    RegionalReport agg{};
    std::array<double, kRegionalBins> agg_sq{};
    int channels = 0;

    for (const Sample& ref : refs) {
        const char* ext = ref.hr.c == 3 ? ".ppm" : ".pgm";
        const fs::path sr_path = fs::path(o.sr) / (ref.id + ext);
        ImageTensor sr = read_pnm(sr_path);
        if (o.ref_normalize) sr = normalize_means(sr, ref.hr);
        const double p = psnr(sr, ref.hr);
        const double sm = ssim(sr, ref.hr);
        char line[256];
        if (ref.hr.c == 3) {
            const ColorShift shift = color_shift(sr, ref.hr);
            std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          (ref.id + ext).c_str(), p, sm, shift.per_channel[0],
                          shift.per_channel[1], shift.per_channel[2]);
        } else {
            std::snprintf(line, sizeof line, "%s,%.17g,%.17g,,,\n", (ref.id + ext).c_str(), p, sm);
        }
        csv << line;

        if (!o.regional.empty()) {
            const AttentionMap map =
                resample_map(read_ymap(fs::path(o.attention) / (ref.id + ".ymap")), ref.hr.h,
                             ref.hr.w);
            const RegionalReport r = regional_analysis(sr, ref.hr, map);
            channels = ref.hr.c;
            for (int k = 0; k < kRegionalBins; ++k) {
                if (r.count[k] == 0) continue;
                agg.count[k] += r.count[k];
                agg_sq[k] += r.mse[k] * static_cast<double>(r.count[k]) * ref.hr.c;
            }
        }
    }

    if (o.out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(o.out);
        if (!f) fail(errc::missing_file, "cannot open for write: " + o.out);
        f << csv.str();
        if (!f) fail(errc::truncated, "short write: " + o.out);
    }

    if (!o.regional.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (int k = 0; k < kRegionalBins; ++k) {
            if (agg.count[k] == 0) {
                agg.mse[k] = nan;
                agg.psnr[k] = nan;
                continue;
            }
            ++agg.populated_bins;
            agg.mse[k] = agg_sq[k] / (static_cast<double>(agg.count[k]) * channels);
            agg.psnr[k] = agg.mse[k] == 0.0 ? std::numeric_limits<double>::infinity()
                                            : 10.0 * std::log10(1.0 / agg.mse[k]);
        }
        fit_regional_poly(agg);
        write_regional_csv(o.regional, agg);
    }
}

// ==== experiment ====

struct ExperimentOpts {
    std::string config;
    std::vector<std::string> sets;
    std::string data, out;
};

void cmd_experiment(const ExperimentOpts& o) {
    std::map<std::string, std::string> file_values;
    if (!o.config.empty()) file_values = parse_config_file(o.config);
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const std::string& s : o.sets) {
        const size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            fail(errc::usage, "--set expects key=value, got: " + s);
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!o.data.empty()) overrides.emplace_back("data_dir", o.data);
    if (!o.out.empty()) overrides.emplace_back("out_dir", o.out);
    const ExperimentConfig cfg = make_experiment_config(file_values, overrides);
    const ExperimentReport rep = run_experiment(cfg);
    char line[192];
    std::snprintf(line, sizeof line,
                  "held-out %zu images | yoda: psnr %.4f ssim %.4f shift %.6f | "
                  "full: psnr %.4f ssim %.4f shift %.6f\n",
                  rep.images_held, rep.yoda.psnr_mean, rep.yoda.ssim_mean,
                  rep.yoda.color_shift_mean, rep.full.psnr_mean, rep.full.ssim_mean,
                  rep.full.color_shift_mean);
    std::cout << line;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"attention-guided diffusion super-resolution toolkit"};
    app.require_subcommand(1);

    SynthOpts synth;
    auto* s_synth = app.add_subcommand("synth", "generate a synthetic dataset");
    s_synth->add_option("--out", synth.out, "output directory")->required();
    s_synth->add_option("--count", synth.cfg.count, "number of images");
    s_synth->add_option("--height", synth.cfg.h, "image height");
    s_synth->add_option("--width", synth.cfg.w, "image width");
    s_synth->add_option("--channels", synth.cfg.channels, "1 or 3");
    s_synth->add_option("--density", synth.cfg.density, "shape density in [0,1]");
    s_synth->add_option("--seed", synth.cfg.seed, "rng seed");

    AttentionOpts attn;
    auto* s_attn = app.add_subcommand("attention", "extract an attention map");
    s_attn->add_option("--input", attn.input, "input image (.pgm/.ppm)")->required();
    s_attn->add_option("--extractor", attn.extractor, "gaussian|edge|sift, comma list");
    s_attn->add_option("--aggregate", attn.aggregate, "max|avg for multiple extractors");
    s_attn->add_option("--out", attn.out, "output .ymap")->required();
    s_attn->add_option("--gaussian-sigma-frac", attn.knobs.gaussian_sigma_frac);
    s_attn->add_option("--canny-low", attn.knobs.canny_low);
    s_attn->add_option("--canny-high", attn.knobs.canny_high);
    s_attn->add_option("--dilation-radius", attn.knobs.dilation_radius);
    s_attn->add_option("--blur-sigma", attn.knobs.blur_sigma);
    s_attn->add_option("--sift-octaves", attn.knobs.sift_octaves);
    s_attn->add_option("--sift-levels", attn.knobs.sift_levels_per_octave);
    s_attn->add_option("--sift-blob-scale", attn.knobs.sift_blob_sigma_scale);

    MaskStatsOpts mstats;
    auto* s_mstats = app.add_subcommand("mask-stats", "mask schedule coverage CSV");
    s_mstats->add_option("--attention", mstats.attention, "attention .ymap")->required();
    s_mstats->add_option("--steps", mstats.steps, "diffusion steps T");
    s_mstats->add_option("--lower-bound", mstats.lower_bound, "lower bound l");
    s_mstats->add_option("--out", mstats.out, "output CSV")->required();

    TrainOpts tr;
    auto* s_train = app.add_subcommand("train", "train the noise predictor");
    s_train->add_option("--data", tr.data, "dataset directory")->required();
    s_train->add_option("--scale", tr.scale, "SR factor")->check(CLI::IsMember({2, 4}));
    s_train->add_option("--attention", tr.attention, "gaussian|edge|sift or external:DIR");
    s_train->add_option("--aggregate", tr.aggregate, "max|avg");
    s_train->add_option("--mode", tr.mode, "yoda|full");
    s_train->add_option("--iters", tr.cfg.iters, "optimizer iterations");
    s_train->add_option("--batch", tr.cfg.batch, "batch size");
    s_train->add_option("--lr", tr.cfg.lr, "learning rate");
    s_train->add_option("--weight-decay", tr.cfg.weight_decay, "decoupled weight decay");
    s_train->add_option("--t-train", tr.cfg.t_train, "training diffusion steps");
    s_train->add_option("--lower-bound", tr.cfg.lower_bound, "mask lower bound l");
    s_train->add_option("--seed", tr.cfg.seed, "rng seed");
    s_train->add_option("--out", tr.out, "output model .ymdl")->required();
    s_train->add_option("--loss-log", tr.loss_log, "loss CSV path");
    s_train->add_option("--cache", tr.cache, "attention cache dir");

    SampleOpts smp;
    auto* s_sample = app.add_subcommand("sample", "guided super-resolution sampling");
    s_sample->add_option("--input", smp.input, "LR image")->required();
    s_sample->add_option("--model", smp.model, "model .ymdl")->required();
    s_sample->add_option("--attention", smp.attention, "extractor name or .ymap path");
    s_sample->add_option("--scale", smp.scale, "SR factor (extractor case)");
    s_sample->add_option("--lower-bound", smp.lower_bound, "mask lower bound l");
    s_sample->add_option("--steps", smp.steps, "eval steps (respaced), 0 = T_train");
    s_sample->add_option("--seed", smp.seed, "rng seed");
    s_sample->add_option("--out", smp.out, "output image")->required();
    s_sample->add_option("--save-trajectory", smp.trajectory, "directory for checkpoints");
    s_sample->add_flag("--no-mask-input", smp.no_mask_input,
                       "ablation: feed the unmasked state to the denoiser");
    s_sample->add_flag("--shared-branch-noise", smp.shared_branch_noise,
                       "ablation: reuse the SR draw in the LR branch");

    EvalOpts ev;
    auto* s_eval = app.add_subcommand("eval", "metrics over an SR directory");
    s_eval->add_option("--hr", ev.hr, "reference directory")->required();
    s_eval->add_option("--sr", ev.sr, "prediction directory")->required();
    s_eval->add_option("--out", ev.out, "CSV path (default stdout)");
    s_eval->add_option("--attention", ev.attention, "ymap directory for --regional");
    s_eval->add_option("--regional", ev.regional, "regional analysis CSV path");
    s_eval->add_flag("--ref-normalize", ev.ref_normalize, "channel-mean normalize before metrics");

    ExperimentOpts ex;
    auto* s_exp = app.add_subcommand("experiment", "train/sample/eval both modes");
    s_exp->add_option("--config", ex.config, "key=value config file");
    s_exp->add_option("--set", ex.sets, "override key=value (repeatable)");
    s_exp->add_option("--data", ex.data, "shorthand for --set data_dir=...");
    s_exp->add_option("--out", ex.out, "shorthand for --set out_dir=...");

    try {
        app.parse(argc, argv);
        if (s_synth->parsed()) cmd_synth(synth);
        if (s_attn->parsed()) cmd_attention(attn);
        if (s_mstats->parsed()) cmd_mask_stats(mstats);
        if (s_train->parsed()) cmd_train(tr);
        if (s_sample->parsed()) cmd_sample(smp);
        if (s_eval->parsed()) cmd_eval(ev);
        if (s_exp->parsed()) cmd_experiment(ex);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
