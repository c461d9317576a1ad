// huf: train, evaluate and analyze the hierarchical fusion model.
//
// Subcommands: synth, train, eval, analyze (fir | spectrum | features).
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 data error,
// 4 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "huf/analysis.hpp"
#include "huf/checkpoint.hpp"
#include "huf/config.hpp"
#include "huf/errors.hpp"
#include "huf/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct SharedOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;
};

void add_shared(CLI::App* cmd, SharedOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Run configuration JSON");
    cmd->add_option("--seed", opts.seed, "Override config seed");
    cmd->add_option("--out", opts.out, "Override output directory");
    cmd->add_option("--jobs", opts.jobs, "Worker threads for independent training jobs");
}

huf::RunConfig resolve_config(const SharedOpts& opts) {
    huf::RunConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = huf::load_run_config(opts.config_path);
    } else {
        cfg.raw = nlohmann::ordered_json::object();
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.out_dir = *opts.out;
    if (opts.jobs) {
        if (*opts.jobs == 0) throw huf::ConfigError("--jobs must be positive");
        cfg.jobs = *opts.jobs;
    }
    return cfg;
}

int cmd_synth(const SharedOpts& opts) {
    huf::RunConfig cfg = resolve_config(opts);
    cfg.synthetic.validate();
    auto [batch, spec] = huf::generate_synthetic(cfg.synthetic);
    fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    huf::export_corpus_csv(batch, out_dir / "corpus.csv");
    {
        std::ofstream gt(out_dir / "ground_truth.json");
        if (!gt) throw huf::DataError("cannot write ground_truth.json");
        gt << huf::synth_spec_json(spec).dump(2) << "\n";
    }
    std::cout << "wrote " << (out_dir / "corpus.csv").string() << " ("
              << batch.count() * batch.window_size << " rows) and ground_truth.json\n";
    return 0;
}

int cmd_train(const SharedOpts& opts, const std::string& stage) {
    huf::RunConfig cfg = resolve_config(opts);
    if (opts.config_path.empty()) throw huf::ConfigError("train: --config is required");
    fs::create_directories(cfg.out_dir);
    std::ofstream log_file(fs::path(cfg.out_dir) / "train.log");
    struct Tee : std::ostream, std::streambuf {
        std::ostream &a, &b;
        Tee(std::ostream& a, std::ostream& b) : std::ostream(this), a(a), b(b) {}
        int overflow(int c) override {
            a.put(static_cast<char>(c));
            b.put(static_cast<char>(c));
            return c;
        }
    } log(std::cout, log_file);

    huf::DatasetBundle ds;
    huf::HufModel model = huf::run_training(cfg, stage, log, &ds);
    huf::EvalReport report = huf::run_eval(model, ds.test, ds.test_labels, std::nullopt,
                                           cfg.jobs);
    log << "test_accuracy=" << report.accuracy << "\n";
    huf::export_confusion_json(report, fs::path(cfg.out_dir) / "eval_report.json");
    return 0;
}

void write_confusion_csv(const huf::EvalReport& rep, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw huf::DataError("cannot write " + path.string());
    out << "true\\pred";
    for (const auto& name : rep.class_names) out << "," << name;
    out << "\n";
    for (std::size_t r = 0; r < rep.confusion.size(); ++r) {
        out << rep.class_names[r];
        for (std::size_t c = 0; c < rep.confusion[r].size(); ++c)
            out << "," << rep.confusion[r][c];
        out << "\n";
    }
}

int cmd_eval(const SharedOpts& opts, const std::string& checkpoint,
             std::optional<std::size_t> mask_unit) {
    huf::RunConfig cfg = resolve_config(opts);
    if (opts.config_path.empty()) throw huf::ConfigError("eval: --config is required");
    fs::path ckpt = checkpoint.empty() ? fs::path(cfg.out_dir) / "checkpoint"
                                       : fs::path(checkpoint);
    huf::LoadedCheckpoint loaded = huf::load_checkpoint(ckpt);
    huf::DatasetBundle ds = huf::load_dataset(cfg);
    if (loaded.model.layout.total_channels() != ds.test.layout.total_channels()) {
        throw huf::DataError("eval: checkpoint layout incompatible with dataset");
    }
    huf::EvalReport report = huf::run_eval(loaded.model, ds.test, ds.test_labels, mask_unit,
                                           cfg.jobs);
    fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    std::string suffix = mask_unit ? "_mask" + std::to_string(*mask_unit) : "";
    huf::export_confusion_json(report, out_dir / ("eval_report" + suffix + ".json"));
    write_confusion_csv(report, out_dir / ("confusion" + suffix + ".csv"));
    std::cout << "accuracy=" << report.accuracy << "\n";
    return 0;
}

huf::Autoencoder& analysis_encoder(huf::HufModel& model, std::size_t axis) {
    if (axis >= model.layout.total_channels()) {
        throw huf::ConfigError("analyze: --axis out of range");
    }
    return model.dr_sae_for_axis(axis);
}

int cmd_analyze_fir(huf::HufModel& model, std::size_t axis, std::size_t depth) {
    huf::Autoencoder& ae = analysis_encoder(model, axis);
    std::size_t convs = 0;
    for (std::size_t i = 0; i < ae.encoder_layers; ++i) {
        if (ae.net.layer(i).spec().kind == huf::LayerKind::conv1d) ++convs;
    }
    std::size_t use = depth == 0 ? std::min<std::size_t>(3, convs) : std::min(depth, convs);
    // A fixed probe signal is enough: the check is exact in exact
    // arithmetic, so any nonzero deviation beyond roundoff is a bug.
    std::size_t L = 64;
    huf::Tensor probe({1, L});
    huf::Rng rng(12345);
    for (std::size_t i = 0; i < L; ++i) probe[i] = rng.normal();
    double dev = huf::fir_equivalence_check(ae.net, ae.encoder_layers, probe, use);
    std::cout << "fir_equivalence max_deviation=" << dev << " depth=" << use << "\n";
    if (!(dev < 1e-9)) {
        throw huf::NumericError("fir equivalence deviation too large");
    }
    return 0;
}

int cmd_analyze_spectrum(huf::HufModel& model, const huf::RunConfig& cfg, std::size_t axis,
                         std::size_t n_paths, std::uint64_t seed, std::size_t n_fft,
                         const std::string& mode, double sample_rate_hz) {
    huf::Autoencoder& ae = analysis_encoder(model, axis);
    auto weights = huf::detail::encoder_conv_weights(ae.net, ae.encoder_layers);
    std::size_t depth = weights.size();
    huf::Rng rng(seed);
    // One base path is drawn, then only the code-layer kernel varies.
    std::vector<std::size_t> base(depth);
    for (std::size_t l = 0; l + 1 < depth; ++l) base[l] = rng.below(weights[l]->dim(0));
    fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    for (std::size_t p = 0; p < n_paths; ++p) {
        std::size_t code = rng.below(weights[depth - 1]->dim(0));
        huf::FirPath fir;
        if (mode == "code") {
            // Single code-layer kernel response.
            huf::Tensor w = *weights[depth - 1];
            std::vector<double> tap(w.dim(2));
            std::size_t prev = depth >= 2 ? base[depth - 2] : 0;
            for (std::size_t k = 0; k < w.dim(2); ++k) tap[k] = w(code, prev, k);
            fir.kernel = huf::Tensor::vec(tap);
            fir.indices = {code};
        } else {
            base[depth - 1] = code;
            fir = huf::compose_fir(ae.net, ae.encoder_layers, base);
        }
        auto fr = huf::frequency_response(fir, n_fft, sample_rate_hz);
        fs::path file = out_dir / ("spectrum_seed" + std::to_string(seed) + "_path" +
                                   std::to_string(p) + ".csv");
        huf::export_freq_response_csv(fr, file);
        std::cout << "wrote " << file.string() << "\n";
    }
    return 0;
}

int cmd_analyze_features(huf::HufModel& model, const huf::RunConfig& cfg, std::size_t axis,
                         std::size_t window_idx, std::size_t n_channels) {
    huf::DatasetBundle ds = huf::load_dataset(cfg);
    if (window_idx >= ds.train.count()) {
        throw huf::ConfigError("analyze features: --window out of range");
    }
    huf::Tensor window = ds.train.window(window_idx);
    huf::FusionFeatures f = huf::huf_forward(model, window);
    std::size_t dr_code = model.dr_cfg.code_channels();
    if (n_channels > dr_code) throw huf::ConfigError("analyze features: too many channels");
    huf::Tensor codes({dr_code, f.l});
    std::copy(f.per_axis_codes.data() + axis * dr_code * f.l,
              f.per_axis_codes.data() + (axis + 1) * dr_code * f.l, codes.data());
    huf::Tensor raw({window.dim(1)});
    std::copy(window.data() + axis * window.dim(1), window.data() + (axis + 1) * window.dim(1),
              raw.data());
    std::vector<std::size_t> ids;
    for (std::size_t c = 0; c < n_channels; ++c) ids.push_back(c);
    fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    fs::path file = out_dir / ("features_window" + std::to_string(window_idx) + ".csv");
    huf::export_feature_dump_csv(raw, codes, ids, file);
    std::cout << "wrote " << file.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical unsupervised fusion for multi-sensor activity recognition"};
    app.require_subcommand(1);

    SharedOpts synth_opts, train_opts, eval_opts, analyze_opts;

    CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic corpus");
    add_shared(synth, synth_opts);

    CLI::App* train = app.add_subcommand("train", "Train the pipeline stages");
    add_shared(train, train_opts);
    std::string stage = "all";
    train->add_option("--stage", stage, "Resume from: all|dr_sae|lff|gff|classifier");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    add_shared(eval, eval_opts);
    std::string eval_checkpoint;
    std::optional<std::size_t> mask_unit;
    eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint directory");
    eval->add_option("--mask-unit", mask_unit, "Zero one unit's fused features");

    CLI::App* analyze = app.add_subcommand("analyze", "FIR / spectrum / feature analysis");
    add_shared(analyze, analyze_opts);
    std::string analyze_checkpoint;
    analyze->add_option("--checkpoint", analyze_checkpoint, "Checkpoint directory");
    std::size_t axis = 0;
    analyze->add_option("--axis", axis, "Axis whose DR-SAE to analyze");

    CLI::App* fir = analyze->add_subcommand("fir", "FIR-composition equivalence");
    bool fir_check = false;
    std::size_t fir_depth = 0;
    fir->add_flag("--check", fir_check, "Run the path-sum equivalence check");
    fir->add_option("--depth", fir_depth, "Encoder conv layers to include (0 = auto)");

    CLI::App* spectrum = analyze->add_subcommand("spectrum", "Frequency responses of FIR paths");
    std::size_t n_paths = 6, n_fft = 512;
    std::uint64_t spec_seed = 7;
    std::string spec_mode = "composed";
    spectrum->add_option("--paths", n_paths, "Number of sampled paths");
    spectrum->add_option("--seed", spec_seed, "Path sampler seed");
    spectrum->add_option("--n-fft", n_fft, "DFT size");
    spectrum->add_option("--mode", spec_mode, "composed|code");

    CLI::App* features = analyze->add_subcommand("features", "Dump code-channel time series");
    std::size_t feat_window = 0, feat_channels = 6;
    features->add_option("--window", feat_window, "Window index in the training split");
    features->add_option("--channels", feat_channels, "Number of code channels to dump");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_opts);
        if (train->parsed()) return cmd_train(train_opts, stage);
        if (eval->parsed()) return cmd_eval(eval_opts, eval_checkpoint, mask_unit);
        if (analyze->parsed()) {
            huf::RunConfig cfg = resolve_config(analyze_opts);
            fs::path ckpt = analyze_checkpoint.empty() ? fs::path(cfg.out_dir) / "checkpoint"
                                                       : fs::path(analyze_checkpoint);
            huf::LoadedCheckpoint loaded = huf::load_checkpoint(ckpt);
            if (fir->parsed()) {
                if (!fir_check) throw huf::ConfigError("analyze fir: pass --check");
                return cmd_analyze_fir(loaded.model, axis, fir_depth);
            }
            if (spectrum->parsed()) {
                if (spec_mode != "composed" && spec_mode != "code") {
                    throw huf::ConfigError("analyze spectrum: --mode must be composed|code");
                }
                double rate = cfg.source == "synthetic" ? cfg.synthetic.sample_rate_hz
                                                        : cfg.csv_sample_rate_hz;
                return cmd_analyze_spectrum(loaded.model, cfg, axis, n_paths, spec_seed, n_fft,
                                            spec_mode, rate);
            }
            if (features->parsed()) {
                return cmd_analyze_features(loaded.model, cfg, axis, feat_window, feat_channels);
            }
            throw huf::ConfigError("analyze: pick a subcommand (fir|spectrum|features)");
        }
    } catch (const huf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const huf::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const huf::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
