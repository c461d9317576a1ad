#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "huf/errors.hpp"
#include "huf/losses.hpp"
#include "huf/model.hpp"
#include "huf/net.hpp"
#include "huf/optimizer.hpp"
#include "huf/rng.hpp"
#include "huf/tensor.hpp"

namespace huf {

struct StageTrainConfig {
    OptimizerConfig opt;
    std::size_t batch_size = 32;
    double loss_threshold = 0.005;
    std::size_t min_epochs = 5;
    std::size_t max_epochs = 500;
    bool audit_freeze = false;  // verify frozen params bitwise after every step
};

struct StageResult {
    std::string name;
    std::vector<double> epoch_losses;
    std::size_t epochs = 0;
    double final_loss = 0.0;
    bool reached_threshold = false;
};

struct TrainReport {
    std::vector<StageResult> stages;
    std::size_t freeze_checks = 0;  // number of bitwise audits that passed
};

namespace detail {

inline std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                          Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < n; i += batch_size) {
        std::size_t end = std::min(n, i + batch_size);
        batches.emplace_back(order.begin() + i, order.begin() + end);
    }
    return batches;
}

inline Tensor gather_windows(const Tensor& all, const std::vector<std::size_t>& idx) {
    auto d = as_batch(all, "gather_windows");
    Tensor out({idx.size(), d.c, d.l});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = all.data() + idx[i] * d.c * d.l;
        std::copy(src, src + d.c * d.l, out.data() + i * d.c * d.l);
    }
    return out;
}

struct FreezeAuditor {
    bool enabled = false;
    std::uint64_t snapshot = 0;
    std::size_t checks = 0;

    void arm(const ParamStore& store, bool on) {
        enabled = on;
        if (enabled) snapshot = store.frozen_fingerprint();
    }
    void verify(const ParamStore& store, const std::string& where) {
        if (!enabled) return;
        if (store.frozen_fingerprint() != snapshot) {
            throw NumericError("frozen parameters changed during " + where);
        }
        ++checks;
    }
};

}  // namespace detail

/// Greedy layer-wise training of a stacked autoencoder. Stage k trains
/// encoder layer k and its decoder mirror to reconstruct the output of
/// the frozen encoder prefix under MSE; on completion the pair is frozen
/// and the optimizer state is reset. A stage stops once its mean epoch
/// loss drops below the threshold and at least min_epochs have passed,
/// or at the max_epochs cap.
inline TrainReport train_stacked(Autoencoder& ae, const Tensor& inputs,
                                 const StageTrainConfig& cfg, std::uint64_t seed) {
    if (ae.stages.empty()) throw UsageError("train_stacked: autoencoder has no stage pairs");
    auto d = detail::as_batch(inputs, "train_stacked");
    if (d.n == 0) throw UsageError("train_stacked: no training windows");

    TrainReport report;
    detail::FreezeAuditor auditor;
    ParamStore& store = ae.net.params();

    for (std::size_t s = 0; s < ae.stages.size(); ++s) {
        const auto& stage = ae.stages[s];
        // Freeze everything except the current encoder/decoder pair.
        for (auto& e : store.entries()) e.frozen = true;
        for (const auto& name : ae.net.param_names_in_range(stage.enc_first, stage.enc_last))
            store.set_frozen(name, false);
        for (const auto& name : ae.net.param_names_in_range(stage.dec_first, stage.dec_last))
            store.set_frozen(name, false);
        auditor.arm(store, cfg.audit_freeze);

        Rng rng(Rng::derive(seed, "stage." + std::to_string(s)));
        StageResult result;
        result.name = "stage" + std::to_string(s + 1);

        for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
            double sq_sum = 0.0;
            std::size_t weight = 0;
            for (const auto& batch : detail::make_batches(d.n, cfg.batch_size, rng)) {
                Tensor x = detail::gather_windows(inputs, batch);
                Tensor stage_in = ae.net.forward_range(0, stage.enc_first, x, Mode::infer);
                Tensor code = ae.net.forward_range(stage.enc_first, stage.enc_last, stage_in,
                                                   Mode::train);
                Tensor recon = ae.net.forward_range(stage.dec_first, stage.dec_last, code,
                                                    Mode::train);
                LossResult loss = mse_loss(recon, stage_in);
                if (!std::isfinite(loss.value)) {
                    throw NumericError("train_stacked: non-finite loss in " + result.name +
                                       " epoch " + std::to_string(epoch + 1));
                }
                store.zero_grads();
                Tensor g = ae.net.backward_range(stage.dec_first, stage.dec_last, loss.grad);
                ae.net.backward_range(stage.enc_first, stage.enc_last, g);
                optimizer_step(store, cfg.opt);
                auditor.verify(store, result.name);
                sq_sum += loss.value * static_cast<double>(batch.size());
                weight += batch.size();
            }
            double epoch_loss = sq_sum / static_cast<double>(weight);
            result.epoch_losses.push_back(epoch_loss);
            result.epochs = epoch + 1;
            result.final_loss = epoch_loss;
            if (epoch_loss < cfg.loss_threshold && result.epochs >= cfg.min_epochs) break;
        }
        result.reached_threshold = result.final_loss < cfg.loss_threshold;
        report.stages.push_back(std::move(result));
        // Stage complete: freeze the pair and reset optimizer state.
        for (auto& e : store.entries()) e.frozen = true;
        store.reset_optimizer_state();
    }
    report.freeze_checks = auditor.checks;
    return report;
}

/// Produces the (B, C, L) autoencoder input for a set of window indices.
/// Fusion blocks use this to pull features through their frozen upstream
/// encoders batch by batch.
using BatchProvider = std::function<Tensor(const std::vector<std::size_t>&)>;

/// Whole-net MSE training of a fusion autoencoder (not stacked).
inline TrainReport train_fusion_ae(Autoencoder& ae, const BatchProvider& provider,
                                   std::size_t n_windows, const StageTrainConfig& cfg,
                                   std::uint64_t seed) {
    if (n_windows == 0) throw UsageError("train_fusion_ae: no training windows");
    TrainReport report;
    ParamStore& store = ae.net.params();
    for (auto& e : store.entries()) e.frozen = false;

    Rng rng(Rng::derive(seed, "fusion"));
    StageResult result;
    result.name = "e2e";
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double sq_sum = 0.0;
        std::size_t weight = 0;
        for (const auto& batch : detail::make_batches(n_windows, cfg.batch_size, rng)) {
            Tensor x = provider(batch);
            Tensor recon = ae.forward(x, Mode::train);
            LossResult loss = mse_loss(recon, x);
            if (!std::isfinite(loss.value)) {
                throw NumericError("train_fusion_ae: non-finite loss in epoch " +
                                   std::to_string(epoch + 1));
            }
            store.zero_grads();
            ae.net.backward(loss.grad);
            optimizer_step(store, cfg.opt);
            sq_sum += loss.value * static_cast<double>(batch.size());
            weight += batch.size();
        }
        double epoch_loss = sq_sum / static_cast<double>(weight);
        result.epoch_losses.push_back(epoch_loss);
        result.epochs = epoch + 1;
        result.final_loss = epoch_loss;
        if (epoch_loss < cfg.loss_threshold && result.epochs >= cfg.min_epochs) break;
    }
    result.reached_threshold = result.final_loss < cfg.loss_threshold;
    report.stages.push_back(std::move(result));
    store.freeze_all();
    store.reset_optimizer_state();
    return report;
}

struct ClassifierTrainConfig {
    OptimizerConfig opt;
    std::size_t batch_size = 32;
    std::size_t epochs = 40;
};

struct ClassifierReport {
    std::vector<double> epoch_losses;
    double final_train_accuracy = 0.0;
};

inline std::vector<int> classifier_predict(Net& net, const Tensor& features) {
    Tensor logits = net.forward(features, Mode::infer);
    std::size_t rows = logits.rank() == 2 ? logits.dim(0) : 1;
    std::size_t classes = logits.rank() == 2 ? logits.dim(1) : logits.dim(0);
    std::vector<int> preds(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = logits.data() + r * classes;
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (row[c] > row[best]) best = c;
        preds[r] = static_cast<int>(best);
    }
    return preds;
}

/// Softmax cross-entropy training of the classifier on frozen features.
inline ClassifierReport train_classifier(Net& net, const Tensor& features,
                                         const std::vector<int>& labels,
                                         const ClassifierTrainConfig& cfg, std::uint64_t seed) {
    auto rows = features.dim(0);
    require(labels.size() == rows, "train_classifier: label count mismatch");
    if (rows == 0) throw UsageError("train_classifier: no training samples");
    Rng rng(Rng::derive(seed, "classifier"));
    ClassifierReport report;
    std::size_t D = features.dim(1);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t weight = 0;
        for (const auto& batch : detail::make_batches(rows, cfg.batch_size, rng)) {
            Tensor x({batch.size(), D});
            std::vector<int> y(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const double* src = features.data() + batch[i] * D;
                std::copy(src, src + D, x.data() + i * D);
                y[i] = labels[batch[i]];
            }
            Tensor logits = net.forward(x, Mode::train);
            LossResult loss = cross_entropy_loss(logits, y);
            if (!std::isfinite(loss.value)) {
                throw NumericError("train_classifier: non-finite loss");
            }
            net.params().zero_grads();
            net.backward(loss.grad);
            optimizer_step(net.params(), cfg.opt);
            loss_sum += loss.value * static_cast<double>(batch.size());
            weight += batch.size();
        }
        report.epoch_losses.push_back(loss_sum / static_cast<double>(weight));
    }
    auto preds = classifier_predict(net, features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) ++correct;
    report.final_train_accuracy = static_cast<double>(correct) / static_cast<double>(rows);
    return report;
}

}  // namespace huf
