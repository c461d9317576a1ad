#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "huf/analysis.hpp"
#include "huf/checkpoint.hpp"
#include "huf/config.hpp"
#include "huf/data.hpp"
#include "huf/errors.hpp"
#include "huf/model.hpp"
#include "huf/training.hpp"

namespace huf {

inline const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {"dr_sae", "lff", "gff", "classifier"};
    return stages;
}

/// Dataset plus the label remapping used by the classifier.
struct DatasetBundle {
    SegmentBatch train;
    SegmentBatch test;
    std::vector<int> label_values;  // sorted unique original labels
    std::vector<std::string> class_names;
    std::vector<int> train_labels;  // remapped to 0..C-1
    std::vector<int> test_labels;
    std::optional<SyntheticSpec> synth_spec;
};

namespace detail {

inline std::vector<int> remap_labels(const std::vector<int>& labels,
                                     const std::vector<int>& values) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (int lab : labels) {
        auto it = std::lower_bound(values.begin(), values.end(), lab);
        if (it == values.end() || *it != lab) throw DataError("label missing from training set");
        out.push_back(static_cast<int>(it - values.begin()));
    }
    return out;
}

inline std::vector<int> resample_labels(const std::vector<int>& labels, std::size_t factor) {
    if (labels.size() <= 1 || factor == 1) return labels;
    std::vector<int> out((labels.size() - 1) * factor + 1);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = labels[std::min(labels.size() - 1, j / factor)];
    }
    return out;
}

/// Evenly spaced deterministic subsample of [0, n).
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap) {
    std::vector<std::size_t> idx;
    if (cap == 0 || cap >= n) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    idx.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) idx.push_back(i * n / cap);
    return idx;
}

/// Runs fn(job) for job in [0, n_jobs_total) on up to `workers` threads.
/// Results must go to per-job storage; the partition is deterministic.
template <typename Fn>
void parallel_jobs(std::size_t n_jobs_total, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || n_jobs_total <= 1) {
        for (std::size_t i = 0; i < n_jobs_total; ++i) fn(i);
        return;
    }
    workers = std::min(workers, n_jobs_total);
    std::vector<std::exception_ptr> errors(n_jobs_total);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n_jobs_total; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace detail

inline DatasetBundle load_dataset(const RunConfig& cfg) {
    DatasetBundle ds;
    SegmentBatch corpus;
    if (cfg.source == "synthetic") {
        auto [batch, spec] = generate_synthetic(cfg.synthetic);
        if (cfg.layout_given) {
            if (cfg.layout.n_units != batch.layout.n_units)
                throw ConfigError("config: layout.n_units disagrees with synthetic.n_units");
            batch.layout = cfg.layout;
        }
        corpus = std::move(batch);
        ds.synth_spec = std::move(spec);
    } else {
        std::vector<Recording> recordings;
        if (cfg.source == "csv") {
            recordings = ingest_csv(cfg.dataset_path, cfg.layout, cfg.csv_sample_rate_hz);
        } else {
            recordings = ingest_uci_har(cfg.dataset_path);
            for (auto& r : recordings) {
                if (cfg.layout_given) {
                    if (cfg.layout.total_channels() != r.layout.total_channels()) {
                        throw ConfigError("config: layout channel count does not match the "
                                          "ingested recordings");
                    }
                    r.layout = cfg.layout;
                }
            }
        }
        std::vector<SegmentBatch> batches;
        for (auto& rec : recordings) {
            if (cfg.resample_to_hz > 0.0 && cfg.resample_to_hz != rec.sample_rate_hz) {
                auto factor = static_cast<std::size_t>(
                    std::llround(cfg.resample_to_hz / rec.sample_rate_hz));
                rec.signals = resample(rec.signals, rec.sample_rate_hz, cfg.resample_to_hz);
                if (rec.labels.size() > 1) {
                    rec.labels = detail::resample_labels(rec.labels, factor);
                }
                rec.sample_rate_hz = cfg.resample_to_hz;
            }
            batches.push_back(segment(rec, cfg.window_size, cfg.overlap));
        }
        corpus = concat_batches(batches);
    }
    if (corpus.count() == 0) throw DataError("dataset produced no windows");

    SplitPlan plan = split_subjects(corpus.subject_ids, cfg.split_fraction, cfg.split_seed);
    auto [train, test] = apply_split(corpus, plan);
    ds.train = std::move(train);
    ds.test = std::move(test);

    std::vector<int> values = ds.train.labels;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    ds.label_values = values;
    for (int v : values) ds.class_names.push_back("class" + std::to_string(v));
    ds.train_labels = detail::remap_labels(ds.train.labels, values);
    ds.test_labels = detail::remap_labels(ds.test.labels, values);
    return ds;
}

// ---------------------------------------------------------------------------
// Per-block training drivers.
// ---------------------------------------------------------------------------

struct BlockReports {
    std::vector<std::pair<std::string, TrainReport>> ae_blocks;
    ClassifierReport classifier;
};

namespace detail {

inline void set_norm_stats(HufModel& model, const SegmentBatch& train) {
    auto d = as_batch(train.windows, "set_norm_stats");
    for (std::size_t c = 0; c < d.c; ++c) {
        double sum = 0.0;
        for (std::size_t n = 0; n < d.n; ++n) {
            const double* x = train.windows.data() + (n * d.c + c) * d.l;
            for (std::size_t t = 0; t < d.l; ++t) sum += x[t];
        }
        double mean = sum / static_cast<double>(d.n * d.l);
        double sq = 0.0;
        for (std::size_t n = 0; n < d.n; ++n) {
            const double* x = train.windows.data() + (n * d.c + c) * d.l;
            for (std::size_t t = 0; t < d.l; ++t) {
                double dv = x[t] - mean;
                sq += dv * dv;
            }
        }
        double std_dev = std::sqrt(sq / static_cast<double>(d.n * d.l));
        model.norm_mean[c] = mean;
        model.norm_std[c] = std_dev > 1e-8 ? std_dev : 1.0;
    }
}

/// (B, 1, W) slice of one channel for the given window indices.
inline Tensor axis_batch(const Tensor& norm_windows, const std::vector<std::size_t>& idx,
                         std::size_t channel) {
    auto d = as_batch(norm_windows, "axis_batch");
    Tensor out({idx.size(), 1, d.l});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = norm_windows.data() + (idx[i] * d.c + channel) * d.l;
        std::copy(src, src + d.l, out.data() + i * d.l);
    }
    return out;
}

/// (B, 6*dr_code, l): concatenated per-axis DR codes of one unit.
inline Tensor lff_input_batch(HufModel& model, const Tensor& norm_windows,
                              const std::vector<std::size_t>& idx, std::size_t unit) {
    auto d = as_batch(norm_windows, "lff_input_batch");
    std::size_t code = model.dr_cfg.code_channels();
    std::size_t l = model.dr_saes.front().encoded_length(d.l);
    Tensor out({idx.size(), SensorLayout::axes_per_unit * code, l});
    for (std::size_t a = 0; a < SensorLayout::axes_per_unit; ++a) {
        std::size_t channel = unit * SensorLayout::axes_per_unit + a;
        Tensor x = axis_batch(norm_windows, idx, channel);
        Tensor codes = model.dr_sae_for_axis(channel).encode(x, Mode::infer);  // (B, code, l)
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double* src = codes.data() + i * code * l;
            double* dst = out.data() + (i * SensorLayout::axes_per_unit * code + a * code) * l;
            std::copy(src, src + code * l, dst);
        }
    }
    return out;
}

/// (B, n*lff_code, l6): concatenated masked per-unit LFF codes.
inline Tensor gff_input_batch(HufModel& model, const Tensor& norm_windows,
                              const std::vector<std::size_t>& idx) {
    auto d = as_batch(norm_windows, "gff_input_batch");
    std::size_t n_units = model.layout.n_units;
    std::size_t lff_code = model.lff_cfg.code_channels();
    std::size_t l = model.dr_saes.front().encoded_length(d.l);
    std::size_t l6 = model.lff_aes.front().encoded_length(l);
    Tensor out = Tensor::zeros({idx.size(), n_units * lff_code, l6});
    for (std::size_t u = 0; u < n_units; ++u) {
        if (!model.layout.unit_active(u)) continue;  // masked units stay zero
        Tensor feats = lff_input_batch(model, norm_windows, idx, u);
        Tensor codes = model.lff_aes[u].encode(feats, Mode::infer);  // (B, lff_code, l6)
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double* src = codes.data() + i * lff_code * l6;
            double* dst = out.data() + (i * n_units * lff_code + u * lff_code) * l6;
            std::copy(src, src + lff_code * l6, dst);
        }
    }
    return out;
}

inline std::uint64_t upstream_fingerprint(const HufModel& model, bool with_lff, bool with_gff) {
    std::uint64_t h = 0;
    for (const auto& ae : model.dr_saes) h ^= ae.net.params().fingerprint();
    if (with_lff)
        for (const auto& ae : model.lff_aes) h ^= ae.net.params().fingerprint();
    if (with_gff && model.gff_ae) h ^= model.gff_ae->net.params().fingerprint();
    return h;
}

inline void log_stage_report(std::ostream& log, const std::string& block,
                             const TrainReport& report) {
    for (const auto& st : report.stages) {
        log << "block=" << block << " stage=" << st.name << " epochs=" << st.epochs
            << " final_loss=" << st.final_loss
            << " reached_threshold=" << (st.reached_threshold ? 1 : 0) << "\n";
    }
}

}  // namespace detail

/// Trains every DR-SAE (one per axis, or per axis role when weights are
/// shared) with stacked layer-wise training. Jobs run in parallel; each
/// has a seed derived from its block name, so the result is identical
/// for any worker count.
inline void train_dr_block(HufModel& model, const Tensor& norm_train, const RunConfig& cfg,
                           std::ostream& log, BlockReports* reports) {
    auto d = detail::as_batch(norm_train, "train_dr_block");
    std::size_t n_nets = model.dr_sae_count();
    std::vector<TrainReport> results(n_nets);
    StageTrainConfig tc = cfg.dr_train;
    tc.audit_freeze = cfg.audit_freeze;

    detail::parallel_jobs(n_nets, cfg.jobs, [&](std::size_t i) {
        // Collect this net's training signals.
        std::vector<std::pair<std::size_t, std::size_t>> sources;  // (window, channel)
        auto add_channel = [&](std::size_t ch) {
            for (std::size_t w = 0; w < d.n; ++w) sources.emplace_back(w, ch);
        };
        if (model.dr_cfg.share_weights) {
            for (std::size_t u = 0; u < model.layout.n_units; ++u) {
                if (!model.layout.unit_active(u)) continue;
                add_channel(u * SensorLayout::axes_per_unit + i);
            }
        } else {
            std::size_t unit = i / SensorLayout::axes_per_unit;
            if (!model.layout.unit_active(unit)) {
                model.dr_saes[i].net.params().freeze_all();
                return;
            }
            add_channel(i);
        }
        auto keep = detail::subsample_indices(sources.size(), cfg.max_train_windows);
        Tensor inputs({keep.size(), 1, d.l});
        for (std::size_t k = 0; k < keep.size(); ++k) {
            auto [w, ch] = sources[keep[k]];
            const double* src = norm_train.data() + (w * d.c + ch) * d.l;
            std::copy(src, src + d.l, inputs.data() + k * d.l);
        }
        results[i] = train_stacked(model.dr_saes[i], inputs, tc,
                                   Rng::derive(cfg.seed, "train.dr_sae." + std::to_string(i)));
    });
    for (std::size_t i = 0; i < n_nets; ++i) {
        std::string name = "dr_sae." + std::to_string(i);
        detail::log_stage_report(log, name, results[i]);
        if (reports) reports->ae_blocks.emplace_back(name, std::move(results[i]));
    }
}

inline void train_lff_block(HufModel& model, const Tensor& norm_train, const RunConfig& cfg,
                            std::ostream& log, BlockReports* reports) {
    auto d = detail::as_batch(norm_train, "train_lff_block");
    std::uint64_t upstream = cfg.audit_freeze ? detail::upstream_fingerprint(model, false, false)
                                              : 0;
    auto keep = detail::subsample_indices(d.n, cfg.max_train_windows);
    std::size_t n_units = model.layout.n_units;
    std::vector<TrainReport> results(n_units);
    StageTrainConfig tc = cfg.lff_train;
    tc.audit_freeze = cfg.audit_freeze;

    detail::parallel_jobs(n_units, cfg.jobs, [&](std::size_t u) {
        if (!model.layout.unit_active(u)) {
            model.lff_aes[u].net.params().freeze_all();
            return;
        }
        BatchProvider provider = [&, u](const std::vector<std::size_t>& batch) {
            std::vector<std::size_t> windows;
            windows.reserve(batch.size());
            for (auto b : batch) windows.push_back(keep[b]);
            return detail::lff_input_batch(model, norm_train, windows, u);
        };
        results[u] = train_fusion_ae(model.lff_aes[u], provider, keep.size(), tc,
                                     Rng::derive(cfg.seed, "train.lff." + std::to_string(u)));
    });
    if (cfg.audit_freeze &&
        detail::upstream_fingerprint(model, false, false) != upstream) {
        throw NumericError("DR-SAE parameters changed during LFF training");
    }
    for (std::size_t u = 0; u < n_units; ++u) {
        std::string name = "lff." + std::to_string(u);
        detail::log_stage_report(log, name, results[u]);
        if (reports) reports->ae_blocks.emplace_back(name, std::move(results[u]));
    }
}

inline void train_gff_block(HufModel& model, const Tensor& norm_train, const RunConfig& cfg,
                            std::ostream& log, BlockReports* reports) {
    if (!model.has_gff()) return;
    auto d = detail::as_batch(norm_train, "train_gff_block");
    std::uint64_t upstream = cfg.audit_freeze ? detail::upstream_fingerprint(model, true, false)
                                              : 0;
    auto keep = detail::subsample_indices(d.n, cfg.max_train_windows);
    StageTrainConfig tc = cfg.gff_train;
    tc.audit_freeze = cfg.audit_freeze;

    // The upstream blocks are frozen, so the GFF inputs are constants;
    // precompute them once when they fit a modest memory budget.
    std::size_t l = model.dr_saes.front().encoded_length(d.l);
    std::size_t l6 = model.lff_aes.front().encoded_length(l);
    std::size_t per_window = model.layout.n_units * model.lff_cfg.code_channels() * l6;
    Tensor cached;
    bool use_cache = keep.size() * per_window * sizeof(double) <= 256ull << 20;
    if (use_cache) cached = detail::gff_input_batch(model, norm_train, keep);

    BatchProvider provider = [&](const std::vector<std::size_t>& batch) {
        if (use_cache) {
            Tensor out({batch.size(), cached.dim(1), cached.dim(2)});
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const double* src = cached.data() + batch[i] * per_window;
                std::copy(src, src + per_window, out.data() + i * per_window);
            }
            return out;
        }
        std::vector<std::size_t> windows;
        windows.reserve(batch.size());
        for (auto b : batch) windows.push_back(keep[b]);
        return detail::gff_input_batch(model, norm_train, windows);
    };
    TrainReport report = train_fusion_ae(*model.gff_ae, provider, keep.size(), tc,
                                         Rng::derive(cfg.seed, "train.gff"));
    if (cfg.audit_freeze && detail::upstream_fingerprint(model, true, false) != upstream) {
        throw NumericError("upstream parameters changed during GFF training");
    }
    detail::log_stage_report(log, "gff", report);
    if (reports) reports->ae_blocks.emplace_back("gff", std::move(report));
}

/// Extracts classifier features for every window (parallel over chunks;
/// the result does not depend on the worker count).
inline Tensor extract_features(HufModel& model, const Tensor& raw_windows, std::size_t jobs) {
    auto d = detail::as_batch(raw_windows, "extract_features");
    std::size_t D = model.classifier_input_dim(d.l);
    Tensor out({d.n, D});
    std::size_t chunk = 16;
    std::size_t n_chunks = (d.n + chunk - 1) / chunk;
    detail::parallel_jobs(n_chunks, jobs, [&](std::size_t c) {
        std::size_t first = c * chunk, last = std::min(d.n, first + chunk);
        for (std::size_t w = first; w < last; ++w) {
            Tensor window = detail::slice_channels(raw_windows, w, 0, d.c);
            FusionFeatures f = huf_forward(model, window);
            Tensor feat = classifier_features(f, model.has_gff());
            std::copy(feat.data(), feat.data() + D, out.data() + w * D);
        }
    });
    return out;
}

inline void train_classifier_block(HufModel& model, const DatasetBundle& ds,
                                   const RunConfig& cfg, std::ostream& log,
                                   BlockReports* reports) {
    std::uint64_t upstream = cfg.audit_freeze ? detail::upstream_fingerprint(model, true, true)
                                              : 0;
    model.num_classes = ds.class_names.size();
    model.class_names = ds.class_names;
    std::size_t input_dim = model.classifier_input_dim(cfg.window_size);
    if (!model.classifier) {
        model.classifier = build_classifier(input_dim, model.num_classes, model.cls_cfg,
                                            Rng::derive(cfg.seed, "classifier.init"));
    }
    Tensor features = extract_features(model, ds.train.windows, cfg.jobs);
    ClassifierReport report = train_classifier(*model.classifier, features, ds.train_labels,
                                               cfg.cls_train, cfg.seed);
    if (cfg.audit_freeze && detail::upstream_fingerprint(model, true, true) != upstream) {
        throw NumericError("autoencoder parameters changed during classifier training");
    }
    log << "block=classifier epochs=" << report.epoch_losses.size()
        << " final_loss=" << (report.epoch_losses.empty() ? 0.0 : report.epoch_losses.back())
        << " train_accuracy=" << report.final_train_accuracy << "\n";
    if (reports) reports->classifier = report;
}

// ---------------------------------------------------------------------------
// Full run orchestration.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json make_training_meta(const RunConfig& cfg,
                                                 const std::vector<std::string>& completed,
                                                 const BlockReports& reports) {
    nlohmann::ordered_json meta;
    meta["seed"] = cfg.seed;
    meta["completed"] = completed;
    nlohmann::ordered_json blocks = nlohmann::ordered_json::object();
    for (const auto& [name, rep] : reports.ae_blocks) {
        nlohmann::ordered_json stages = nlohmann::ordered_json::array();
        for (const auto& st : rep.stages) {
            stages.push_back({{"stage", st.name},
                              {"epochs", st.epochs},
                              {"final_loss", st.final_loss},
                              {"reached_threshold", st.reached_threshold}});
        }
        blocks[name] = stages;
    }
    meta["blocks"] = blocks;
    meta["freeze_audit"] = cfg.audit_freeze;
    return meta;
}

inline void export_stage_curves(const std::filesystem::path& dir, const BlockReports& reports) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& [name, rep] : reports.ae_blocks) {
        for (const auto& st : rep.stages) {
            export_loss_curve_csv(st.epoch_losses, dir / (name + "." + st.name + ".csv"));
        }
    }
    if (!reports.classifier.epoch_losses.empty()) {
        export_loss_curve_csv(reports.classifier.epoch_losses, dir / "classifier.csv");
    }
}

/// Runs training stages starting at `stage_from` ("dr_sae", "lff",
/// "gff", "classifier"; "all" = from the beginning). Later stages need a
/// checkpoint from an earlier invocation in cfg.out_dir.
inline HufModel run_training(const RunConfig& cfg, const std::string& stage_from,
                             std::ostream& log, DatasetBundle* dataset_out = nullptr,
                             BlockReports* reports_out = nullptr) {
    namespace fs = std::filesystem;
    const auto& stages = pipeline_stages();
    std::string from = stage_from == "all" || stage_from.empty() ? "dr_sae" : stage_from;
    auto it = std::find(stages.begin(), stages.end(), from);
    if (it == stages.end()) throw ConfigError("unknown stage '" + stage_from + "'");
    std::size_t start = static_cast<std::size_t>(it - stages.begin());

    DatasetBundle ds = load_dataset(cfg);
    log << "dataset: train_windows=" << ds.train.count() << " test_windows=" << ds.test.count()
        << " classes=" << ds.class_names.size() << "\n";

    fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    {
        std::ofstream cf(out_dir / "config.json");
        cf << cfg.raw.dump(2) << "\n";
    }
    fs::path ckpt_dir = out_dir / "checkpoint";

    HufModel model;
    std::vector<std::string> completed;
    BlockReports reports;
    if (start == 0) {
        model = build_huf_model(ds.train.layout, cfg.dr_sae, cfg.lff, cfg.gff, cfg.classifier,
                                cfg.seed);
        model.window_size = cfg.window_size;
        detail::set_norm_stats(model, ds.train);
    } else {
        if (!fs::exists(ckpt_dir / "manifest.json")) {
            throw ConfigError("stage '" + from + "' requested but no checkpoint exists in " +
                              ckpt_dir.string());
        }
        LoadedCheckpoint loaded = load_checkpoint(ckpt_dir);
        model = std::move(loaded.model);
        if (loaded.training_meta.contains("completed")) {
            completed = loaded.training_meta.at("completed").get<std::vector<std::string>>();
        }
        // Stage-order check: every earlier stage must be completed.
        for (std::size_t s = 0; s < start; ++s) {
            if (stages[s] == "gff" && !model.has_gff()) continue;
            if (std::find(completed.begin(), completed.end(), stages[s]) == completed.end()) {
                throw ConfigError("stage-order violation: '" + from + "' requested but '" +
                                  stages[s] + "' has not been trained");
            }
        }
        if (model.layout.total_channels() != ds.train.layout.total_channels()) {
            throw DataError("checkpoint layout does not match dataset layout");
        }
    }

    Tensor norm_train = detail::normalize_windows(ds.train.windows, model.norm_mean,
                                                  model.norm_std);
    for (std::size_t s = start; s < stages.size(); ++s) {
        const std::string& stage = stages[s];
        if (stage == "gff" && !model.has_gff()) {
            log << "stage=gff skipped (single-unit layout)\n";
            continue;
        }
        log << "stage=" << stage << " begin\n";
        if (stage == "dr_sae") train_dr_block(model, norm_train, cfg, log, &reports);
        else if (stage == "lff") train_lff_block(model, norm_train, cfg, log, &reports);
        else if (stage == "gff") train_gff_block(model, norm_train, cfg, log, &reports);
        else train_classifier_block(model, ds, cfg, log, &reports);
        if (std::find(completed.begin(), completed.end(), stage) == completed.end()) {
            completed.push_back(stage);
        }
        save_checkpoint(model, make_training_meta(cfg, completed, reports), ckpt_dir);
        log << "stage=" << stage << " done, checkpoint saved\n";
    }
    export_stage_curves(out_dir / "curves", reports);
    if (dataset_out) *dataset_out = std::move(ds);
    if (reports_out) *reports_out = std::move(reports);
    return model;
}

inline nlohmann::ordered_json synth_spec_json(const SyntheticSpec& spec) {
    nlohmann::ordered_json j;
    j["class_freqs"] = spec.class_freqs;
    j["class_amp"] = spec.class_amp;
    j["common_freq"] = spec.common_freq;
    j["common_amp"] = spec.common_amp;
    j["non_discriminative_units"] = spec.non_discriminative_units;
    j["config"] = {{"n_units", spec.config.n_units},
                   {"classes", spec.config.classes},
                   {"windows_per_class", spec.config.windows_per_class},
                   {"window_size", spec.config.window_size},
                   {"noise_std", spec.config.noise_std},
                   {"seed", spec.config.seed},
                   {"n_subjects", spec.config.n_subjects},
                   {"sample_rate_hz", spec.config.sample_rate_hz}};
    return j;
}

/// Classifies a segment batch, optionally masking one unit's fused
/// features (set to zero at the GFF input, as for a missing sensor).
inline EvalReport run_eval(HufModel& model, const SegmentBatch& data,
                           const std::vector<int>& labels,
                           std::optional<std::size_t> mask_unit, std::size_t jobs = 1) {
    if (!model.classifier) throw UsageError("eval: checkpoint has no trained classifier");
    std::vector<std::uint8_t> saved_mask = model.layout.active_mask;
    if (mask_unit) {
        if (*mask_unit >= model.layout.n_units) {
            throw ConfigError("eval: --mask-unit index out of range");
        }
        model.layout.active_mask[*mask_unit] = 0;
        model.layout.validate();  // at least one unit must stay active
    }
    Tensor features = extract_features(model, data.windows, jobs);
    model.layout.active_mask = saved_mask;
    std::vector<int> preds = classifier_predict(*model.classifier, features);
    return evaluate(preds, labels, model.class_names);
}

}  // namespace huf
