#include "yoda/config.hpp"

#include <cmath>
#include <fstream>

#include "yoda/errors.hpp"

namespace yoda {

static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) fail(errc::missing_file, "cannot open config: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (const size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            fail(errc::bad_config,
                 path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            fail(errc::bad_config, path.string() + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = trim(t.substr(eq + 1));
    }
    return kv;
}

AttentionPipeline parse_attention_spec(const std::string& spec, AggregateMode aggregate) {
    AttentionPipeline pipe;
    pipe.aggregate = aggregate;
    size_t pos = 0;
    while (pos <= spec.size()) {
        size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        const std::string name = trim(spec.substr(pos, comma - pos));
        if (name.empty()) fail(errc::usage, "empty extractor name in: " + spec);
        ExtractorConfig e;
        e.kind = extractor_kind_from_name(name);
        pipe.extractors.push_back(e);
        pos = comma + 1;
    }
    return pipe;
}

// ==== typed key parsing ====

namespace {

struct KeyReader {
    std::map<std::string, std::string> kv;

    bool has(const std::string& k) const { return kv.count(k) != 0; }
    std::string take(const std::string& k) {
        auto it = kv.find(k);
        std::string v = it->second;
        kv.erase(it);
        return v;
    }
    void get_string(const std::string& k, std::string& out) {
        if (has(k)) out = take(k);
    }
    void get_int(const std::string& k, int& out) {
        if (!has(k)) return;
        const std::string v = take(k);
        try {
            size_t used = 0;
            out = std::stoi(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            fail(errc::bad_config, "config key " + k + ": not an integer: " + v);
        }
    }
    void get_u64(const std::string& k, uint64_t& out) {
        if (!has(k)) return;
        const std::string v = take(k);
        try {
            size_t used = 0;
            out = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            fail(errc::bad_config, "config key " + k + ": not an unsigned integer: " + v);
        }
    }
    void get_double(const std::string& k, double& out) {
        if (!has(k)) return;
        const std::string v = take(k);
        try {
            size_t used = 0;
            out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            fail(errc::bad_config, "config key " + k + ": not a number: " + v);
        }
    }
};

} // namespace

ExperimentConfig make_experiment_config(
    const std::map<std::string, std::string>& file_values,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    KeyReader r{file_values};
    for (const auto& [k, v] : overrides) r.kv[k] = v; // flags win

    ExperimentConfig cfg;
    std::string s;

    s.clear();
    r.get_string("data_dir", s);
    if (!s.empty()) cfg.data_dir = s;
    s.clear();
    r.get_string("out_dir", s);
    if (!s.empty()) cfg.out_dir = s;

    r.get_int("scale", cfg.scale);
    r.get_int("t_train", cfg.t_train);
    r.get_int("t_eval", cfg.t_eval);
    r.get_int("iters", cfg.iters);
    r.get_int("batch", cfg.batch);
    r.get_double("beta_start", cfg.beta_start);
    r.get_double("beta_end", cfg.beta_end);
    r.get_double("lower_bound", cfg.lower_bound);
    r.get_double("lr", cfg.lr);
    r.get_double("weight_decay", cfg.weight_decay);
    r.get_u64("seed_train", cfg.seed_train);
    r.get_u64("seed_sample", cfg.seed_sample);

    s.clear();
    r.get_string("mode", s);
    if (!s.empty()) cfg.mode = train_mode_from_name(s);

    AggregateMode agg = AggregateMode::max;
    s.clear();
    r.get_string("aggregate", s);
    if (!s.empty()) {
        if (s == "max")
            agg = AggregateMode::max;
        else if (s == "avg")
            agg = AggregateMode::avg;
        else
            fail(errc::bad_config, "aggregate must be max or avg: " + s);
    }
    s.clear();
    r.get_string("extractor", s);
    if (!s.empty())
        cfg.attention = parse_attention_spec(s, agg);
    else
        cfg.attention.aggregate = agg;

    // extractor tuning knobs, applied uniformly
    for (ExtractorConfig* e = cfg.attention.extractors.data();
         e != cfg.attention.extractors.data() + cfg.attention.extractors.size(); ++e) {
        KeyReader knobs = r; // each extractor reads the same values
        knobs.get_double("gaussian_sigma_frac", e->gaussian_sigma_frac);
        knobs.get_double("canny_low", e->canny_low);
        knobs.get_double("canny_high", e->canny_high);
        knobs.get_int("dilation_radius", e->dilation_radius);
        knobs.get_double("blur_sigma", e->blur_sigma);
        knobs.get_int("sift_octaves", e->sift_octaves);
        knobs.get_int("sift_levels", e->sift_levels_per_octave);
        knobs.get_double("sift_blob_scale", e->sift_blob_sigma_scale);
    }
    for (const char* k : {"gaussian_sigma_frac", "canny_low", "canny_high", "dilation_radius",
                          "blur_sigma", "sift_octaves", "sift_levels", "sift_blob_scale"})
        r.kv.erase(k);

    if (!r.kv.empty()) fail(errc::bad_config, "unknown config key: " + r.kv.begin()->first);

    if (cfg.t_eval == 0) cfg.t_eval = cfg.t_train;
    return cfg;
}

void validate_experiment_config(const ExperimentConfig& cfg) {
    if (cfg.data_dir.empty()) fail(errc::bad_config, "data_dir is required");
    if (cfg.out_dir.empty()) fail(errc::bad_config, "out_dir is required");
    if (!std::filesystem::exists(cfg.data_dir))
        fail(errc::missing_file, "data_dir does not exist: " + cfg.data_dir.string());
    if (cfg.scale != 2 && cfg.scale != 4 && cfg.scale != 8)
        fail(errc::bad_config, "scale must be one of 2, 4, 8");
    if (cfg.t_train < 1) fail(errc::bad_config, "t_train must be >= 1");
    if (cfg.t_eval < 1 || cfg.t_eval > cfg.t_train)
        fail(errc::bad_config, "t_eval must satisfy 1 <= t_eval <= t_train");
    if (cfg.lower_bound < 0.0 || cfg.lower_bound > 1.0)
        fail(errc::bad_config, "lower_bound must be in [0,1]");
    if (cfg.iters < 1) fail(errc::bad_config, "iters must be >= 1");
    if (cfg.batch < 1) fail(errc::bad_config, "batch must be >= 1");
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) fail(errc::bad_config, "lr must be positive");
    if (cfg.weight_decay < 0.0 || !std::isfinite(cfg.weight_decay))
        fail(errc::bad_config, "weight_decay must be >= 0");
    if (cfg.attention.extractors.empty()) fail(errc::bad_config, "no extractors configured");
}

} // namespace yoda
