#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "huf/data.hpp"
#include "huf/errors.hpp"
#include "huf/model.hpp"
#include "huf/optimizer.hpp"
#include "huf/training.hpp"

#include "json.hpp"

namespace huf {

/// Everything a run needs, captured from one JSON file. Unknown keys are
/// rejected so a typo cannot silently fall back to a default.
struct RunConfig {
    // dataset
    std::string source = "synthetic";  // synthetic | csv | uci_har
    std::string dataset_path;
    double csv_sample_rate_hz = 100.0;
    double resample_to_hz = 0.0;  // 0 = keep native rate
    SyntheticConfig synthetic;

    SensorLayout layout = SensorLayout::of(4);
    bool layout_given = false;

    std::size_t window_size = 512;
    double overlap = 0.5;

    double split_fraction = 0.7;
    std::uint64_t split_seed = 7;

    DrSaeConfig dr_sae;
    FusionAeConfig lff = FusionAeConfig::lff_default();
    FusionAeConfig gff = FusionAeConfig::gff_default();
    ClassifierConfig classifier;

    StageTrainConfig dr_train;
    StageTrainConfig lff_train;
    StageTrainConfig gff_train;
    ClassifierTrainConfig cls_train;
    std::size_t max_train_windows = 0;  // cap per AE training job, 0 = all

    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    std::string out_dir = "runs/default";
    bool audit_freeze = false;

    nlohmann::ordered_json raw;  // verbatim copy for provenance
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

inline OptAlgo algo_from_string(const std::string& s) {
    if (s == "adam") return OptAlgo::adam;
    if (s == "sgd") return OptAlgo::sgd;
    throw ConfigError("config: unknown optimizer algorithm '" + s + "'");
}

inline StageTrainConfig stage_train_from_json(const nlohmann::json& j, const std::string& where,
                                              const StageTrainConfig& defaults) {
    check_keys(j, {"algorithm", "lr", "batch_size", "loss_threshold", "min_epochs",
                   "max_epochs"},
               where);
    StageTrainConfig c = defaults;
    c.opt.algorithm = algo_from_string(get_or<std::string>(
        j, "algorithm", defaults.opt.algorithm == OptAlgo::adam ? "adam" : "sgd"));
    c.opt.lr = get_or<double>(j, "lr", defaults.opt.lr);
    c.batch_size = get_or<std::size_t>(j, "batch_size", defaults.batch_size);
    c.loss_threshold = get_or<double>(j, "loss_threshold", defaults.loss_threshold);
    c.min_epochs = get_or<std::size_t>(j, "min_epochs", defaults.min_epochs);
    c.max_epochs = get_or<std::size_t>(j, "max_epochs", defaults.max_epochs);
    if (c.opt.lr <= 0.0) throw ConfigError("config: lr must be positive in " + where);
    if (c.batch_size == 0) throw ConfigError("config: batch_size must be positive in " + where);
    if (c.max_epochs == 0) throw ConfigError("config: max_epochs must be positive in " + where);
    return c;
}

inline FusionAeConfig fusion_from_json(const nlohmann::json& j, const std::string& where,
                                       const FusionAeConfig& defaults) {
    check_keys(j, {"channels", "kernel_size", "pool_sizes", "pool_stride"}, where);
    FusionAeConfig c = defaults;
    if (j.contains("channels")) {
        auto ch = j.at("channels").get<std::vector<std::size_t>>();
        if (ch.size() != 4) throw ConfigError("config: " + where + ".channels needs 4 entries");
        std::copy(ch.begin(), ch.end(), c.channels.begin());
    }
    c.kernel_size = get_or<std::size_t>(j, "kernel_size", defaults.kernel_size);
    if (j.contains("pool_sizes")) {
        auto ps = j.at("pool_sizes").get<std::vector<std::size_t>>();
        if (ps.size() != 2) throw ConfigError("config: " + where + ".pool_sizes needs 2 entries");
        std::copy(ps.begin(), ps.end(), c.pool_sizes.begin());
    }
    c.pool_stride = get_or<std::size_t>(j, "pool_stride", defaults.pool_stride);
    c.validate();
    return c;
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
    using detail::check_keys;
    using detail::get_or;

    check_keys(j, {"dataset", "layout", "window_size", "overlap", "split", "model", "training",
                   "seed", "jobs", "out", "audit_freeze"},
               "config");
    RunConfig cfg;
    cfg.raw = j;

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        check_keys(d, {"source", "path", "sample_rate_hz", "resample_to_hz", "synthetic"},
                   "dataset");
        cfg.source = get_or<std::string>(d, "source", cfg.source);
        if (cfg.source != "synthetic" && cfg.source != "csv" && cfg.source != "uci_har") {
            throw ConfigError("config: dataset.source must be synthetic, csv or uci_har");
        }
        cfg.dataset_path = get_or<std::string>(d, "path", "");
        cfg.csv_sample_rate_hz = get_or<double>(d, "sample_rate_hz", cfg.csv_sample_rate_hz);
        cfg.resample_to_hz = get_or<double>(d, "resample_to_hz", 0.0);
        if (d.contains("synthetic")) {
            const auto& s = d.at("synthetic");
            check_keys(s, {"n_units", "classes", "windows_per_class", "window_size", "noise_std",
                           "seed", "n_subjects", "sample_rate_hz"},
                       "dataset.synthetic");
            cfg.synthetic.n_units = get_or<std::size_t>(s, "n_units", cfg.synthetic.n_units);
            cfg.synthetic.classes = get_or<std::size_t>(s, "classes", cfg.synthetic.classes);
            cfg.synthetic.windows_per_class =
                get_or<std::size_t>(s, "windows_per_class", cfg.synthetic.windows_per_class);
            cfg.synthetic.window_size =
                get_or<std::size_t>(s, "window_size", cfg.synthetic.window_size);
            cfg.synthetic.noise_std = get_or<double>(s, "noise_std", cfg.synthetic.noise_std);
            cfg.synthetic.seed = get_or<std::uint64_t>(s, "seed", cfg.synthetic.seed);
            cfg.synthetic.n_subjects =
                get_or<std::size_t>(s, "n_subjects", cfg.synthetic.n_subjects);
            cfg.synthetic.sample_rate_hz =
                get_or<double>(s, "sample_rate_hz", cfg.synthetic.sample_rate_hz);
            cfg.synthetic.validate();
        }
        if (cfg.source != "synthetic" && cfg.dataset_path.empty()) {
            throw ConfigError("config: dataset.path required for source '" + cfg.source + "'");
        }
    }

    if (j.contains("layout")) {
        const auto& l = j.at("layout");
        check_keys(l, {"n_units", "unit_names", "active_mask"}, "layout");
        std::size_t n = get_or<std::size_t>(l, "n_units", 0);
        if (n == 0) throw ConfigError("config: layout.n_units must be positive");
        cfg.layout = SensorLayout::of(n);
        if (l.contains("unit_names")) {
            cfg.layout.unit_names = l.at("unit_names").get<std::vector<std::string>>();
        }
        if (l.contains("active_mask")) {
            cfg.layout.active_mask.clear();
            for (bool b : l.at("active_mask").get<std::vector<bool>>())
                cfg.layout.active_mask.push_back(b ? 1 : 0);
        }
        cfg.layout.validate();
        cfg.layout_given = true;
    }

    cfg.window_size = get_or<std::size_t>(j, "window_size", cfg.window_size);
    if (cfg.window_size == 0) throw ConfigError("config: window_size must be positive");
    cfg.overlap = get_or<double>(j, "overlap", cfg.overlap);
    if (cfg.overlap < 0.0 || cfg.overlap >= 1.0)
        throw ConfigError("config: overlap must be in [0, 1)");

    if (j.contains("split")) {
        const auto& s = j.at("split");
        check_keys(s, {"fraction", "seed"}, "split");
        cfg.split_fraction = get_or<double>(s, "fraction", cfg.split_fraction);
        cfg.split_seed = get_or<std::uint64_t>(s, "seed", cfg.split_seed);
        if (cfg.split_fraction <= 0.0 || cfg.split_fraction >= 1.0)
            throw ConfigError("config: split.fraction must be in (0, 1)");
    }

    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, {"dr_sae", "lff", "gff", "classifier"}, "model");
        if (m.contains("dr_sae")) {
            const auto& dr = m.at("dr_sae");
            check_keys(dr, {"channels", "kernel_size", "share_weights"}, "model.dr_sae");
            cfg.dr_sae.channels = get_or<std::vector<std::size_t>>(dr, "channels",
                                                                   cfg.dr_sae.channels);
            cfg.dr_sae.kernel_size = get_or<std::size_t>(dr, "kernel_size",
                                                         cfg.dr_sae.kernel_size);
            cfg.dr_sae.share_weights = get_or<bool>(dr, "share_weights",
                                                    cfg.dr_sae.share_weights);
            cfg.dr_sae.validate();
        }
        if (m.contains("lff")) cfg.lff = detail::fusion_from_json(m.at("lff"), "model.lff", cfg.lff);
        if (m.contains("gff")) cfg.gff = detail::fusion_from_json(m.at("gff"), "model.gff", cfg.gff);
        if (m.contains("classifier")) {
            const auto& c = m.at("classifier");
            check_keys(c, {"hidden"}, "model.classifier");
            cfg.classifier.hidden = get_or<std::vector<std::size_t>>(c, "hidden",
                                                                     cfg.classifier.hidden);
            cfg.classifier.validate();
        }
    }

    if (j.contains("training")) {
        const auto& t = j.at("training");
        check_keys(t, {"dr_sae", "lff", "gff", "classifier", "max_train_windows"}, "training");
        if (t.contains("dr_sae"))
            cfg.dr_train = detail::stage_train_from_json(t.at("dr_sae"), "training.dr_sae",
                                                         cfg.dr_train);
        if (t.contains("lff"))
            cfg.lff_train = detail::stage_train_from_json(t.at("lff"), "training.lff",
                                                          cfg.lff_train);
        if (t.contains("gff"))
            cfg.gff_train = detail::stage_train_from_json(t.at("gff"), "training.gff",
                                                          cfg.gff_train);
        if (t.contains("classifier")) {
            const auto& c = t.at("classifier");
            check_keys(c, {"algorithm", "lr", "batch_size", "epochs"}, "training.classifier");
            cfg.cls_train.opt.algorithm = detail::algo_from_string(
                get_or<std::string>(c, "algorithm", "adam"));
            cfg.cls_train.opt.lr = get_or<double>(c, "lr", cfg.cls_train.opt.lr);
            cfg.cls_train.batch_size = get_or<std::size_t>(c, "batch_size",
                                                           cfg.cls_train.batch_size);
            cfg.cls_train.epochs = get_or<std::size_t>(c, "epochs", cfg.cls_train.epochs);
            if (cfg.cls_train.opt.lr <= 0.0)
                throw ConfigError("config: lr must be positive in training.classifier");
        }
        cfg.max_train_windows = get_or<std::size_t>(t, "max_train_windows", 0);
    }

    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.jobs = get_or<std::size_t>(j, "jobs", cfg.jobs);
    if (cfg.jobs == 0) throw ConfigError("config: jobs must be positive");
    cfg.out_dir = get_or<std::string>(j, "out", cfg.out_dir);
    cfg.audit_freeze = get_or<bool>(j, "audit_freeze", cfg.audit_freeze);

    if (cfg.source == "synthetic" && !cfg.layout_given) {
        cfg.layout = SensorLayout::of(cfg.synthetic.n_units);
    }
    if (cfg.source == "synthetic") {
        cfg.window_size = cfg.synthetic.window_size;
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: parse error in " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace huf
