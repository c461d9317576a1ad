// Acceptance suite: runs every gate criterion at its stated tolerance
// and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "huf/analysis.hpp"
#include "huf/checkpoint.hpp"
#include "huf/config.hpp"
#include "huf/pipeline.hpp"

namespace fs = std::filesystem;
using huf::Tensor;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor random_tensor(std::vector<std::size_t> shape, huf::Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

// -------------------------------------------------------------------------
// Criterion 1: finite-difference gradient checks for every layer kind,
// >= 20 randomized configurations, relative error < 1e-4, under 1 minute.
// -------------------------------------------------------------------------
void criterion_gradient_suite() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t configs = 0;
    bool ok = true;

    auto check_net = [&](huf::Net& net, const Tensor& input, std::uint64_t seed) {
        huf::Rng rng(seed);
        Tensor probe = net.forward(input, huf::Mode::train);
        Tensor target = random_tensor(probe.shape(), rng);
        auto report = huf::gradient_check(
            net, input, [&](const Tensor& out) { return huf::mse_loss(out, target); });
        worst = std::max(worst, report.max_relative_error);
        if (report.max_relative_error >= 1e-4) ok = false;
        ++configs;
    };

    for (std::uint64_t s = 0; s < 5; ++s) {  // conv1d
        huf::Rng rng(1000 + s);
        huf::Net net;
        std::size_t ci = 1 + rng.below(3), co = 1 + rng.below(3);
        std::size_t stride = 1 + rng.below(2);
        auto pad = rng.below(2) ? huf::Padding::same : huf::Padding::valid;
        net.add(huf::LayerSpec::conv1d(ci, co, 3, stride, pad), rng);
        check_net(net, random_tensor({ci, 8 + rng.below(5)}, rng), 2000 + s);
    }
    for (std::uint64_t s = 0; s < 4; ++s) {  // conv1d_transpose
        huf::Rng rng(1100 + s);
        huf::Net net;
        std::size_t ci = 1 + rng.below(3), co = 1 + rng.below(3);
        std::size_t stride = 1 + rng.below(2);
        net.add(huf::LayerSpec::conv1d_transpose(ci, co, 1 + rng.below(3), stride,
                                                 huf::Padding::valid),
                rng);
        check_net(net, random_tensor({ci, 4 + rng.below(5)}, rng), 2100 + s);
    }
    for (std::uint64_t s = 0; s < 4; ++s) {  // maxpool1d between conv layers
        huf::Rng rng(1200 + s);
        huf::Net net;
        net.add(huf::LayerSpec::conv1d(1, 2, 3, 1, huf::Padding::same), rng);
        net.add(huf::LayerSpec::maxpool1d(2 + rng.below(2), 1 + rng.below(2)), rng);
        net.add(huf::LayerSpec::conv1d(2, 1, 3, 1, huf::Padding::same), rng);
        check_net(net, random_tensor({2, 1, 10 + rng.below(4)}, rng), 2200 + s);
    }
    for (std::uint64_t s = 0; s < 3; ++s) {  // batchnorm1d (train mode, batch stats)
        huf::Rng rng(1300 + s);
        huf::Net net;
        net.add(huf::LayerSpec::conv1d(2, 3, 3, 1, huf::Padding::same), rng);
        net.add(huf::LayerSpec::batchnorm1d(3), rng);
        net.add(huf::LayerSpec::act(huf::Activation::selu), rng);
        check_net(net, random_tensor({3, 2, 6 + rng.below(4)}, rng), 2300 + s);
    }
    for (std::uint64_t s = 0; s < 4; ++s) {  // dense (one config uses cross entropy)
        huf::Rng rng(1400 + s);
        huf::Net net;
        std::size_t d_in = 3 + rng.below(4), d_mid = 2 + rng.below(4);
        net.add(huf::LayerSpec::dense(d_in, d_mid), rng);
        net.add(huf::LayerSpec::act(huf::Activation::selu), rng);
        net.add(huf::LayerSpec::dense(d_mid, 3), rng);
        Tensor input = random_tensor({2, d_in}, rng);
        if (s == 0) {
            std::vector<int> labels = {0, 2};
            auto rep = huf::gradient_check(net, input, [&](const Tensor& out) {
                return huf::cross_entropy_loss(out, labels);
            });
            worst = std::max(worst, rep.max_relative_error);
            if (rep.max_relative_error >= 1e-4) ok = false;
            ++configs;
        } else {
            check_net(net, input, 2400 + s);
        }
    }
    for (std::uint64_t s = 0; s < 4; ++s) {  // activation layers incl. softmax
        huf::Rng rng(1500 + s);
        huf::Net net;
        net.add(huf::LayerSpec::dense(4, 4), rng);
        auto act = s % 3 == 0 ? huf::Activation::selu
                              : (s % 3 == 1 ? huf::Activation::relu : huf::Activation::softmax);
        net.add(huf::LayerSpec::act(act), rng);
        check_net(net, random_tensor({2, 4}, rng), 2500 + s);
    }

    double dt = seconds_since(t0);
    std::ostringstream detail;
    detail << configs << " configurations, max relative error " << worst << ", " << dt << " s";
    report("gradient-suite", ok && configs >= 20 && dt < 60.0, detail.str());
}

// -------------------------------------------------------------------------
// Criterion 2: FIR path-sum equivalence on activation-free encoders of
// depth 2-4, deviation < 1e-9 across 10 seeds, under 10 seconds.
// -------------------------------------------------------------------------
void criterion_fir_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        huf::Rng rng(7000 + seed);
        std::size_t depth = 2 + seed % 3;  // 2, 3, 4
        huf::Net net;
        std::size_t prev = 1;
        for (std::size_t l = 0; l < depth; ++l) {
            std::size_t c = 2 + rng.below(3);
            net.add(huf::LayerSpec::conv1d(prev, c, 3, 1, huf::Padding::same), rng);
            net.add(huf::LayerSpec::act(huf::Activation::selu), rng);
            prev = c;
        }
        Tensor x = random_tensor({1, 48}, rng);
        worst = std::max(worst, huf::fir_equivalence_check(net, net.layer_count(), x));
    }
    double dt = seconds_since(t0);
    std::ostringstream detail;
    detail << "max deviation " << worst << " across 10 seeds, " << dt << " s";
    report("fir-equivalence-oracle", worst < 1e-9 && dt < 10.0, detail.str());
}

// -------------------------------------------------------------------------
// Shared desk-scale pipeline run feeding criteria 3, 5, 6 and 7.
// -------------------------------------------------------------------------
struct PipelineRun {
    huf::RunConfig cfg;
    huf::DatasetBundle ds;
    huf::HufModel model;
    huf::BlockReports reports;
    double dr_seconds = 0.0;
    double total_seconds = 0.0;
    huf::EvalReport test_report;
    bool trained = false;
};

huf::RunConfig acceptance_config(const std::string& out_dir) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(R"({
      "dataset": {
        "source": "synthetic",
        "synthetic": {"n_units": 4, "classes": 6, "windows_per_class": 200,
                       "window_size": 512, "noise_std": 0.1, "seed": 42, "n_subjects": 10}
      },
      "split": {"fraction": 0.7, "seed": 7},
      "model": {
        "dr_sae": {"channels": [6, 12], "share_weights": true},
        "lff": {"channels": [24, 20, 16, 12]},
        "gff": {"channels": [24, 16, 12, 8]},
        "classifier": {"hidden": [64, 32]}
      },
      "training": {
        "dr_sae": {"lr": 0.003, "batch_size": 32, "min_epochs": 5, "max_epochs": 80},
        "lff": {"lr": 0.002, "batch_size": 16, "min_epochs": 5, "max_epochs": 12},
        "gff": {"lr": 0.002, "batch_size": 16, "min_epochs": 5, "max_epochs": 12},
        "classifier": {"lr": 0.002, "batch_size": 32, "epochs": 40},
        "max_train_windows": 384
      },
      "seed": 42,
      "jobs": 2,
      "audit_freeze": true,
      "out": ""
    })");
    j["out"] = out_dir;
    return huf::run_config_from_json(j);
}

PipelineRun run_pipeline() {
    PipelineRun run;
    fs::path out = fs::temp_directory_path() / "huf_acceptance_run";
    fs::remove_all(out);
    run.cfg = acceptance_config(out.string());
    std::ofstream devnull;  // unopened stream swallows the log

    auto t0 = std::chrono::steady_clock::now();
    run.ds = huf::load_dataset(run.cfg);
    run.model = huf::build_huf_model(run.ds.train.layout, run.cfg.dr_sae, run.cfg.lff,
                                     run.cfg.gff, run.cfg.classifier, run.cfg.seed);
    run.model.window_size = run.cfg.window_size;
    huf::detail::set_norm_stats(run.model, run.ds.train);
    Tensor norm_train = huf::detail::normalize_windows(run.ds.train.windows,
                                                       run.model.norm_mean, run.model.norm_std);

    auto t_dr = std::chrono::steady_clock::now();
    huf::train_dr_block(run.model, norm_train, run.cfg, devnull, &run.reports);
    run.dr_seconds = seconds_since(t_dr);

    huf::train_lff_block(run.model, norm_train, run.cfg, devnull, &run.reports);
    huf::train_gff_block(run.model, norm_train, run.cfg, devnull, &run.reports);
    huf::train_classifier_block(run.model, run.ds, run.cfg, devnull, &run.reports);

    run.test_report = huf::run_eval(run.model, run.ds.test, run.ds.test_labels, std::nullopt,
                                    run.cfg.jobs);
    run.total_seconds = seconds_since(t0);
    run.trained = true;
    return run;
}

// -------------------------------------------------------------------------
// Criterion 3: stacked-training contract. Every DR stage reaches
// loss < 0.005 within the epoch cap; frozen-parameter bitwise audits
// held at every optimizer step; DR block under 5 minutes.
// -------------------------------------------------------------------------
void criterion_stacked_contract(const PipelineRun& run) {
    bool ok = run.trained;
    std::size_t stages = 0, reached = 0, audits = 0;
    for (const auto& [name, rep] : run.reports.ae_blocks) {
        if (name.rfind("dr_sae.", 0) != 0) continue;
        audits += rep.freeze_checks;
        for (const auto& st : rep.stages) {
            ++stages;
            if (st.reached_threshold) ++reached;
        }
    }
    ok = ok && stages > 0 && reached == stages && audits > 0 && run.dr_seconds < 300.0;
    std::ostringstream detail;
    detail << reached << "/" << stages << " stages reached loss < 0.005, " << audits
           << " bitwise freeze audits passed, " << run.dr_seconds << " s";
    report("stacked-training-contract", ok, detail.str());
}

// -------------------------------------------------------------------------
// Criterion 4: shape chain for window sizes {256, 512, 1500} and
// n in {1, 4} with the full default configuration.
// -------------------------------------------------------------------------
void criterion_shape_chain() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t n_units : {1u, 4u}) {
        for (std::size_t W : {256u, 512u, 1500u}) {
            huf::HufModel model = huf::build_huf_model(
                huf::SensorLayout::of(n_units), huf::DrSaeConfig{},
                huf::FusionAeConfig::lff_default(), huf::FusionAeConfig::gff_default(),
                huf::ClassifierConfig{}, 1234);
            model.window_size = W;
            huf::Rng rng(99 + W + n_units);
            Tensor window = random_tensor({model.layout.total_channels(), W}, rng);
            huf::FusionFeatures f = huf::huf_forward(model, window);
            auto shapes = oracle::huf_shapes(W, 4, 3, 2);
            bool case_ok =
                f.l == shapes.l && f.l6 == shapes.l6 &&
                f.per_axis_codes.shape() ==
                    std::vector<std::size_t>{6 * n_units, 256, shapes.l} &&
                f.per_unit_codes.shape() == std::vector<std::size_t>{n_units, 256, shapes.l6};
            if (n_units > 1) {
                case_ok = case_ok && f.l12 == shapes.l12 &&
                          f.global_code.shape() == std::vector<std::size_t>{64, shapes.l12};
            } else {
                case_ok = case_ok && f.global_code.size() == 0;
            }
            if (W == 512 && n_units == 4) {
                case_ok = case_ok &&
                          f.global_code.shape() == std::vector<std::size_t>{64, 30} &&
                          model.classifier_input_dim(W) == 1920;
            }
            if (!case_ok) {
                ok = false;
                detail << "mismatch at W=" << W << " n=" << n_units << "; ";
            }
        }
    }
    detail << "6 cases vs shape oracle, " << seconds_since(t0) << " s";
    report("shape-chain", ok, detail.str());
}

// -------------------------------------------------------------------------
// Criterion 5: end-to-end synthetic classification, accuracy >= 0.95,
// total runtime < 10 minutes.
// -------------------------------------------------------------------------
void criterion_end_to_end(const PipelineRun& run) {
    bool ok = run.trained && run.test_report.accuracy >= 0.95 &&
              run.reports.classifier.final_train_accuracy >= 0.99 &&
              run.total_seconds < 600.0;
    std::ostringstream detail;
    detail << "test accuracy " << run.test_report.accuracy << " on " << run.ds.test.count()
           << " held-out windows (train accuracy "
           << run.reports.classifier.final_train_accuracy << "), pipeline "
           << run.total_seconds << " s";
    report("end-to-end-synthetic", ok, detail.str());
}

// -------------------------------------------------------------------------
// Criterion 6: masking the designed non-discriminative unit moves test
// accuracy by < 2 points, and masked forward equals zeroed-code forward
// bitwise on 100 random windows.
// -------------------------------------------------------------------------
void criterion_masking(PipelineRun& run) {
    if (!run.trained || !run.ds.synth_spec || run.ds.synth_spec->non_discriminative_units.empty()) {
        report("masking-robustness", false, "pipeline run unavailable");
        return;
    }
    std::size_t dead = run.ds.synth_spec->non_discriminative_units.front();
    huf::EvalReport masked = huf::run_eval(run.model, run.ds.test, run.ds.test_labels, dead,
                                           run.cfg.jobs);
    double drop = std::fabs(run.test_report.accuracy - masked.accuracy);

    // bitwise equivalence on 100 random test windows
    huf::Rng rng(31337);
    bool bitwise_ok = true;
    std::size_t lff_code = run.model.lff_cfg.code_channels();
    for (int i = 0; i < 100 && bitwise_ok; ++i) {
        std::size_t w = rng.below(run.ds.test.count());
        Tensor window = run.ds.test.window(w);
        huf::FusionFeatures full = huf::huf_forward(run.model, window);
        run.model.layout.active_mask[dead] = 0;
        huf::FusionFeatures masked_f = huf::huf_forward(run.model, window);
        run.model.layout.active_mask[dead] = 1;
        Tensor zeroed = full.per_unit_codes;
        for (std::size_t k = 0; k < lff_code * full.l6; ++k) {
            zeroed[dead * lff_code * full.l6 + k] = 0.0;
        }
        Tensor gff_in = zeroed.reshaped({run.model.layout.n_units * lff_code, full.l6});
        Tensor manual = run.model.gff_ae->encode(gff_in, huf::Mode::infer);
        bitwise_ok = manual.size() == masked_f.global_code.size() &&
                     std::memcmp(manual.data(), masked_f.global_code.data(),
                                 manual.size() * sizeof(double)) == 0;
    }

    bool ok = drop < 0.02 && bitwise_ok;
    std::ostringstream detail;
    detail << "accuracy " << run.test_report.accuracy << " -> " << masked.accuracy
           << " masking unit " << dead << " (|drop| = " << drop << "), bitwise equivalence "
           << (bitwise_ok ? "held" : "FAILED") << " on 100 windows";
    report("masking-robustness", ok, detail.str());
}

// -------------------------------------------------------------------------
// Criterion 7: LFF code size 256 reaches a final reconstruction loss
// <= that of code size 16 at equal epochs.
// -------------------------------------------------------------------------
void criterion_code_size(PipelineRun& run) {
    if (!run.trained) {
        report("code-size-direction", false, "pipeline run unavailable");
        return;
    }
    Tensor norm_train = huf::detail::normalize_windows(run.ds.train.windows,
                                                       run.model.norm_mean, run.model.norm_std);
    auto keep = huf::detail::subsample_indices(run.ds.train.count(), 128);
    huf::StageTrainConfig tc;
    tc.opt.lr = 2e-3;
    tc.batch_size = 16;
    tc.loss_threshold = 0.0;  // never stop early: equal epochs for both runs
    tc.min_epochs = 8;
    tc.max_epochs = 8;

    auto train_variant = [&](std::size_t code) {
        huf::FusionAeConfig cfg = run.cfg.lff;
        cfg.channels[3] = code;
        huf::Autoencoder ae = huf::build_fusion_ae(cfg, run.model.lff_input_channels(), 555);
        huf::BatchProvider provider = [&](const std::vector<std::size_t>& batch) {
            std::vector<std::size_t> windows;
            for (auto b : batch) windows.push_back(keep[b]);
            return huf::detail::lff_input_batch(run.model, norm_train, windows, 0);
        };
        auto rep = huf::train_fusion_ae(ae, provider, keep.size(), tc, 556);
        return rep.stages[0].final_loss;
    };
    double loss_256 = train_variant(256);
    double loss_16 = train_variant(16);
    std::ostringstream detail;
    detail << "final loss code256 = " << loss_256 << " vs code16 = " << loss_16
           << " after 8 equal epochs";
    report("code-size-direction", loss_256 <= loss_16, detail.str());
}

// -------------------------------------------------------------------------
// Criterion 8: determinism and persistence. Identical seed/config give
// bit-identical checkpoints; save/load/forward is bitwise; truncation
// is rejected.
// -------------------------------------------------------------------------
void criterion_determinism() {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(R"({
      "dataset": {
        "source": "synthetic",
        "synthetic": {"n_units": 2, "classes": 3, "windows_per_class": 8,
                       "window_size": 64, "noise_std": 0.05, "seed": 17, "n_subjects": 5}
      },
      "split": {"fraction": 0.7, "seed": 3},
      "model": {
        "dr_sae": {"channels": [3, 6], "share_weights": true},
        "lff": {"channels": [8, 8, 8, 6]},
        "gff": {"channels": [8, 8, 8, 4]},
        "classifier": {"hidden": [16, 8]}
      },
      "training": {
        "dr_sae": {"min_epochs": 2, "max_epochs": 4},
        "lff": {"min_epochs": 2, "max_epochs": 3},
        "gff": {"min_epochs": 2, "max_epochs": 3},
        "classifier": {"epochs": 4}
      },
      "seed": 99,
      "jobs": 2,
      "out": ""
    })");

    auto run_to = [&](const std::string& out) {
        nlohmann::ordered_json jj = j;
        jj["out"] = out;
        huf::RunConfig cfg = huf::run_config_from_json(jj);
        std::ofstream devnull;
        return huf::run_training(cfg, "all", devnull);
    };
    fs::path base = fs::temp_directory_path() / "huf_determinism";
    fs::remove_all(base);
    huf::HufModel m1 = run_to((base / "a").string());
    huf::HufModel m2 = run_to((base / "b").string());

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool identical = slurp(base / "a" / "checkpoint" / "params.bin") ==
                     slurp(base / "b" / "checkpoint" / "params.bin");

    // save -> load -> forward bitwise
    huf::LoadedCheckpoint loaded = huf::load_checkpoint(base / "a" / "checkpoint");
    huf::Rng rng(4);
    Tensor window = random_tensor({12, 64}, rng);
    huf::FusionFeatures fa = huf::huf_forward(m1, window);
    huf::FusionFeatures fb = huf::huf_forward(loaded.model, window);
    bool forward_bitwise =
        fa.global_code.size() == fb.global_code.size() &&
        std::memcmp(fa.global_code.data(), fb.global_code.data(),
                    fa.global_code.size() * sizeof(double)) == 0;

    // truncated checkpoint rejected
    bool truncation_rejected = false;
    fs::resize_file(base / "b" / "checkpoint" / "params.bin",
                    fs::file_size(base / "b" / "checkpoint" / "params.bin") - 8);
    try {
        huf::load_checkpoint(base / "b" / "checkpoint");
    } catch (const huf::DataError&) {
        truncation_rejected = true;
    }

    bool ok = identical && forward_bitwise && truncation_rejected;
    std::ostringstream detail;
    detail << "checkpoints bit-identical: " << (identical ? "yes" : "NO")
           << ", reload forward bitwise: " << (forward_bitwise ? "yes" : "NO")
           << ", truncation rejected: " << (truncation_rejected ? "yes" : "NO");
    report("determinism-and-persistence", ok, detail.str());
    fs::remove_all(base);
}

// -------------------------------------------------------------------------
// Criterion 9: segmentation counts match the enumeration oracle on the
// exhaustive small grid; the 50%-overlap hop equals W/2 exactly.
// -------------------------------------------------------------------------
void criterion_segmentation() {
    huf::warn_stream() = nullptr;  // the grid includes L < W cases by design
    bool ok = true;
    for (std::size_t L = 1; L <= 64 && ok; ++L) {
        for (std::size_t W = 1; W <= 16 && ok; ++W) {
            for (double overlap : {0.0, 0.25, 0.5}) {
                huf::Recording rec;
                rec.layout = huf::SensorLayout::of(1);
                rec.subject_id = 1;
                rec.sample_rate_hz = 50.0;
                rec.signals = Tensor({6, L});
                rec.labels.assign(L, 0);
                huf::SegmentBatch batch = huf::segment(rec, W, overlap);
                std::size_t hop = static_cast<std::size_t>(
                    std::llround(W * (1.0 - overlap)));
                if (hop == 0) hop = 1;
                if (batch.count() != oracle::segment_starts_enum(L, W, hop).size()) ok = false;
            }
        }
    }
    // 50%-overlap hop == W/2 for the standard window sizes
    bool hop_ok = true;
    for (std::size_t W : {256u, 512u, 1500u}) {
        auto hop = static_cast<std::size_t>(std::llround(W * 0.5));
        if (hop != W / 2) hop_ok = false;
    }
    huf::warn_stream() = &std::cerr;
    report("segmentation-formula", ok && hop_ok,
           ok ? "window counts match enumeration on the full grid; hop = W/2"
              : "count mismatch against the enumeration oracle");
}

}  // namespace

int main() {
    std::printf("== acceptance suite ==\n");
    criterion_gradient_suite();
    criterion_fir_oracle();

    PipelineRun run = run_pipeline();
    criterion_stacked_contract(run);
    criterion_shape_chain();
    criterion_end_to_end(run);
    criterion_masking(run);
    criterion_code_size(run);
    criterion_determinism();
    criterion_segmentation();

    std::printf("== %s (%d failure%s) ==\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
