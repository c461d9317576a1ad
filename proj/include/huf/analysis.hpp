#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "huf/errors.hpp"
#include "huf/model.hpp"
#include "huf/net.hpp"
#include "huf/tensor.hpp"

#include "json.hpp"

namespace huf {

// ---------------------------------------------------------------------------
// FIR composition of a trained encoder. The analysis is exact only in the
// linear regime: activations treated as identity, biases zeroed, valid
// padding (kernels alone determine the map).
// ---------------------------------------------------------------------------

/// One kernel per conv layer, selected by channel indices; the composed
/// kernel is their linear convolution (polynomial product), so applying
/// it with the same cross-correlation convention reproduces the layered
/// activation-free pass.
struct FirPath {
    std::vector<std::size_t> indices;  // [k1 .. kd], channel per conv layer
    Tensor kernel;                     // length sum(K_i - 1) + 1
};

namespace detail {

/// Conv-layer weights of the encoder prefix, in order.
inline std::vector<const Tensor*> encoder_conv_weights(const Net& net, std::size_t encoder_layers,
                                                       std::size_t max_convs = SIZE_MAX) {
    std::vector<const Tensor*> weights;
    for (std::size_t i = 0; i < encoder_layers && weights.size() < max_convs; ++i) {
        if (net.layer(i).spec().kind != LayerKind::conv1d) continue;
        std::string name = "l" + std::to_string(i) + ".weight";
        weights.push_back(&net.params().named(name).value);
    }
    return weights;
}

/// Linear convolution (polynomial product) of two kernels.
inline std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

/// Cross-correlation of a signal with a kernel, valid padding, stride 1.
inline std::vector<double> xcorr_valid(const std::vector<double>& x,
                                       const std::vector<double>& k) {
    if (k.size() > x.size()) throw ShapeError("xcorr_valid: kernel longer than signal");
    std::vector<double> out(x.size() - k.size() + 1, 0.0);
    for (std::size_t t = 0; t < out.size(); ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j < k.size(); ++j) s += x[t + j] * k[j];
        out[t] = s;
    }
    return out;
}

}  // namespace detail

/// Composes one kernel per conv layer along `path`. The encoder input
/// must be single-channel (per-axis DR-SAE); layer l's kernel connects
/// channel path[l-1] of the previous layer to channel path[l].
inline FirPath compose_fir(const Net& encoder_net, std::size_t encoder_layers,
                           const std::vector<std::size_t>& path) {
    auto weights = detail::encoder_conv_weights(encoder_net, encoder_layers, path.size());
    if (path.empty() || weights.size() != path.size())
        throw UsageError("compose_fir: path length does not match encoder conv layers");
    require(weights[0]->dim(1) == 1, "compose_fir: encoder input must be single-channel");

    std::vector<double> kernel;
    std::size_t prev = 0;
    for (std::size_t l = 0; l < path.size(); ++l) {
        const Tensor& w = *weights[l];
        if (path[l] >= w.dim(0)) throw UsageError("compose_fir: channel index out of range");
        std::size_t K = w.dim(2);
        std::vector<double> tap(K);
        for (std::size_t k = 0; k < K; ++k) tap[k] = w(path[l], prev, k);
        kernel = l == 0 ? tap : detail::polymul(kernel, tap);
        prev = path[l];
    }
    FirPath out;
    out.indices = path;
    out.kernel = Tensor::vec(std::move(kernel));
    return out;
}

inline FirPath compose_fir(const Autoencoder& ae, const std::vector<std::size_t>& path) {
    return compose_fir(ae.net, ae.encoder_layers, path);
}

/// Activation-free, bias-free layered forward with valid padding.
inline Tensor linearized_encoder_forward(const Net& encoder_net, std::size_t encoder_layers,
                                         const Tensor& input, std::size_t max_convs = SIZE_MAX) {
    auto weights = detail::encoder_conv_weights(encoder_net, encoder_layers, max_convs);
    Tensor h = input.rank() == 1 ? input.reshaped({1, input.size()}) : input;
    for (const Tensor* w : weights) {
        Tensor zero_bias = Tensor::zeros({w->dim(0)});
        h = conv1d_forward(h, *w, zero_bias, 1, Padding::valid);
    }
    return h;
}

/// Executable check that every code channel of an activation-free
/// encoder equals the sum of its composed FIR paths applied to the
/// input. Enumerates all paths; meant for small encoders. Returns the
/// max absolute deviation from the layered forward.
inline double fir_equivalence_check(const Net& encoder_net, std::size_t encoder_layers,
                                    const Tensor& input, std::size_t max_convs = SIZE_MAX) {
    auto weights = detail::encoder_conv_weights(encoder_net, encoder_layers, max_convs);
    if (weights.empty()) throw UsageError("fir_equivalence_check: encoder has no conv layers");
    std::size_t depth = weights.size();
    Tensor layered = linearized_encoder_forward(encoder_net, encoder_layers, input, max_convs);

    std::vector<double> x(input.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = input[i];

    std::size_t code_channels = weights.back()->dim(0);
    std::size_t out_len = layered.dim(1);
    double max_dev = 0.0;
    std::vector<std::size_t> path(depth, 0);
    for (std::size_t code = 0; code < code_channels; ++code) {
        std::vector<double> acc(out_len, 0.0);
        // Enumerate all intermediate channel choices for this code channel.
        std::vector<std::size_t> counters(depth > 1 ? depth - 1 : 0, 0);
        bool done = false;
        while (!done) {
            for (std::size_t l = 0; l + 1 < depth; ++l) path[l] = counters[l];
            path[depth - 1] = code;
            FirPath fir = compose_fir(encoder_net, encoder_layers, path);
            std::vector<double> k(fir.kernel.size());
            for (std::size_t i = 0; i < k.size(); ++i) k[i] = fir.kernel[i];
            auto y = detail::xcorr_valid(x, k);
            for (std::size_t t = 0; t < out_len; ++t) acc[t] += y[t];
            // advance counters
            done = true;
            for (std::size_t l = 0; l + 1 < depth; ++l) {
                if (++counters[l] < weights[l]->dim(0)) {
                    done = false;
                    break;
                }
                counters[l] = 0;
            }
        }
        for (std::size_t t = 0; t < out_len; ++t) {
            max_dev = std::max(max_dev, std::fabs(acc[t] - layered(code, t)));
        }
    }
    return max_dev;
}

inline double fir_equivalence_check(const Autoencoder& ae, const Tensor& input,
                                    std::size_t max_convs = SIZE_MAX) {
    return fir_equivalence_check(ae.net, ae.encoder_layers, input, max_convs);
}

// ---------------------------------------------------------------------------
// Frequency response: zero-padded one-sided DFT magnitude of a kernel.
// ---------------------------------------------------------------------------

struct FrequencyResponse {
    std::size_t n_fft = 512;
    double sample_rate_hz = 0.0;
    std::vector<double> magnitudes;  // n_fft/2 + 1 bins
    std::vector<double> bin_hz;
};

inline FrequencyResponse frequency_response(const FirPath& fir, std::size_t n_fft,
                                            double sample_rate_hz) {
    if (n_fft < fir.kernel.size())
        throw ConfigError("frequency_response: n_fft smaller than kernel length");
    constexpr double two_pi = 6.283185307179586476925286766559;
    FrequencyResponse res;
    res.n_fft = n_fft;
    res.sample_rate_hz = sample_rate_hz;
    std::size_t bins = n_fft / 2 + 1;
    res.magnitudes.resize(bins);
    res.bin_hz.resize(bins);
    for (std::size_t m = 0; m < bins; ++m) {
        double re = 0.0, im = 0.0;
        for (std::size_t n = 0; n < fir.kernel.size(); ++n) {
            double angle = two_pi * static_cast<double>(m) * static_cast<double>(n) /
                           static_cast<double>(n_fft);
            re += fir.kernel[n] * std::cos(angle);
            im -= fir.kernel[n] * std::sin(angle);
        }
        res.magnitudes[m] = std::sqrt(re * re + im * im);
        res.bin_hz[m] = sample_rate_hz * static_cast<double>(m) / static_cast<double>(n_fft);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Classification metrics.
// ---------------------------------------------------------------------------

struct EvalReport {
    double accuracy = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::vector<std::size_t>> confusion;  // rows = true, cols = predicted
    std::vector<std::string> class_names;
};

inline EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                           const std::vector<std::string>& class_names) {
    if (predictions.size() != labels.size())
        throw UsageError("evaluate: predictions/labels length mismatch");
    if (predictions.empty()) throw UsageError("evaluate: nothing to evaluate");
    std::size_t C = class_names.size();
    EvalReport rep;
    rep.class_names = class_names;
    rep.confusion.assign(C, std::vector<std::size_t>(C, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int t = labels[i], p = predictions[i];
        if (t < 0 || static_cast<std::size_t>(t) >= C || p < 0 ||
            static_cast<std::size_t>(p) >= C) {
            throw DataError("evaluate: class index out of range");
        }
        ++rep.confusion[t][p];
    }
    std::size_t correct = 0;
    for (std::size_t c = 0; c < C; ++c) correct += rep.confusion[c][c];
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    rep.precision.assign(C, 0.0);
    rep.recall.assign(C, 0.0);
    rep.f1.assign(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t tp = rep.confusion[c][c], pred_c = 0, true_c = 0;
        for (std::size_t k = 0; k < C; ++k) {
            pred_c += rep.confusion[k][c];
            true_c += rep.confusion[c][k];
        }
        rep.precision[c] = pred_c ? static_cast<double>(tp) / static_cast<double>(pred_c) : 0.0;
        rep.recall[c] = true_c ? static_cast<double>(tp) / static_cast<double>(true_c) : 0.0;
        double denom = rep.precision[c] + rep.recall[c];
        rep.f1[c] = denom > 0.0 ? 2.0 * rep.precision[c] * rep.recall[c] / denom : 0.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Plot-data exports: CSV for curves/spectra/feature dumps, JSON for
// confusion matrices and reports. Stable column order, no timestamps.
// ---------------------------------------------------------------------------

inline void export_loss_curve_csv(const std::vector<double>& losses,
                                  const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out.precision(17);
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < losses.size(); ++e) out << (e + 1) << "," << losses[e] << "\n";
}

inline void export_freq_response_csv(const FrequencyResponse& fr,
                                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out.precision(17);
    out << "bin,freq_hz,magnitude\n";
    for (std::size_t m = 0; m < fr.magnitudes.size(); ++m) {
        out << m << "," << fr.bin_hz[m] << "," << fr.magnitudes[m] << "\n";
    }
}

inline nlohmann::ordered_json eval_report_json(const EvalReport& rep) {
    nlohmann::ordered_json j;
    j["accuracy"] = rep.accuracy;
    j["class_names"] = rep.class_names;
    j["precision"] = rep.precision;
    j["recall"] = rep.recall;
    j["f1"] = rep.f1;
    j["confusion"] = rep.confusion;
    return j;
}

inline void export_confusion_json(const EvalReport& rep, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << eval_report_json(rep).dump(2) << "\n";
}

/// Raw input window next to selected code-channel time series. Code
/// rows are shorter than the window only for pooled encoders; DR-SAE
/// codes share the window length.
inline void export_feature_dump_csv(const Tensor& raw_window, const Tensor& codes,
                                    const std::vector<std::size_t>& channel_ids,
                                    const std::filesystem::path& path) {
    require(raw_window.rank() == 1, "feature_dump: raw window must be rank 1");
    require(codes.rank() == 2, "feature_dump: codes must be (channels, len)");
    for (std::size_t id : channel_ids)
        require(id < codes.dim(0), "feature_dump: channel id out of range");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out.precision(17);
    out << "t,raw";
    for (std::size_t id : channel_ids) out << ",code" << id;
    out << "\n";
    std::size_t rows = std::max(raw_window.size(), codes.dim(1));
    for (std::size_t t = 0; t < rows; ++t) {
        out << t;
        out << ",";
        if (t < raw_window.size()) out << raw_window[t];
        for (std::size_t i = 0; i < channel_ids.size(); ++i) {
            out << ",";
            if (t < codes.dim(1)) out << codes(channel_ids[i], t);
        }
        out << "\n";
    }
}

}  // namespace huf
