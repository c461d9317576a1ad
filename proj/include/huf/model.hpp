#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "huf/errors.hpp"
#include "huf/net.hpp"
#include "huf/rng.hpp"
#include "huf/tensor.hpp"

namespace huf {

/// Body-worn sensor units: each unit carries 3 accelerometer and 3
/// gyroscope axes, in a fixed (ax, ay, az, gx, gy, gz) channel order.
struct SensorLayout {
    static constexpr std::size_t axes_per_unit = 6;
    static constexpr std::array<const char*, 6> axis_names = {"ax", "ay", "az",
                                                              "gx", "gy", "gz"};

    std::size_t n_units = 1;
    std::vector<std::string> unit_names;   // defaults to u1..un
    std::vector<std::uint8_t> active_mask; // defaults to all active

    static SensorLayout of(std::size_t n_units) {
        SensorLayout l;
        l.n_units = n_units;
        for (std::size_t u = 0; u < n_units; ++u) l.unit_names.push_back("u" + std::to_string(u + 1));
        l.active_mask.assign(n_units, 1);
        return l;
    }

    std::size_t total_channels() const { return n_units * axes_per_unit; }

    bool unit_active(std::size_t u) const { return active_mask[u] != 0; }

    std::size_t active_count() const {
        std::size_t n = 0;
        for (auto a : active_mask) n += a ? 1 : 0;
        return n;
    }

    void validate() const {
        if (n_units == 0) throw ConfigError("layout: n_units must be positive");
        if (unit_names.size() != n_units) throw ConfigError("layout: unit_names size mismatch");
        if (active_mask.size() != n_units) throw ConfigError("layout: active_mask size mismatch");
        if (active_count() == 0) throw ConfigError("layout: at least one unit must be active");
    }

    std::string channel_name(std::size_t ch) const {
        return unit_names[ch / axes_per_unit] + "_" + axis_names[ch % axes_per_unit];
    }
};

/// Per-axis stacked autoencoder: overcomplete, kernel 3, stride 1, same
/// padding, no pooling; trained layer pair by layer pair.
struct DrSaeConfig {
    std::vector<std::size_t> channels = {16, 32, 64, 128, 256};
    std::size_t kernel_size = 3;
    bool share_weights = false;  // one net per axis role instead of per axis

    std::size_t code_channels() const { return channels.back(); }

    void validate() const {
        if (channels.empty()) throw ConfigError("dr_sae: channel progression is empty");
        for (auto c : channels)
            if (c == 0) throw ConfigError("dr_sae: zero channel count");
        if (channels.back() < 2) {
            throw ConfigError("dr_sae: code layer must be overcomplete (> 1 channel)");
        }
        if (kernel_size == 0) throw ConfigError("dr_sae: kernel_size must be positive");
    }
};

/// Fusion autoencoder: 4 convs with pools after the first two, one BN
/// after the third conv; decoder mirrors convs with stride-2 transposed
/// convs in place of pools and no BN.
struct FusionAeConfig {
    std::array<std::size_t, 4> channels = {512, 384, 320, 256};
    std::size_t kernel_size = 3;
    std::array<std::size_t, 2> pool_sizes = {4, 3};
    std::size_t pool_stride = 2;

    std::size_t code_channels() const { return channels[3]; }

    static FusionAeConfig lff_default() { return FusionAeConfig{}; }
    static FusionAeConfig gff_default() {
        FusionAeConfig c;
        c.channels = {512, 256, 128, 64};
        return c;
    }

    void validate() const {
        for (auto c : channels)
            if (c == 0) throw ConfigError("fusion_ae: zero channel count");
        if (kernel_size == 0) throw ConfigError("fusion_ae: kernel_size must be positive");
        if (pool_stride == 0) throw ConfigError("fusion_ae: pool_stride must be positive");
    }
};

struct ClassifierConfig {
    std::vector<std::size_t> hidden = {512, 256};

    void validate() const {
        for (auto h : hidden)
            if (h == 0) throw ConfigError("classifier: zero hidden width");
    }
};

/// A sequential net split into an encoder prefix and decoder suffix,
/// with optional stage pairs for stacked training and pool/unpool
/// bookkeeping for fusion decoders.
struct Autoencoder {
    struct Stage {
        std::size_t enc_first, enc_last;  // half-open layer ranges
        std::size_t dec_first, dec_last;
    };

    Net net;
    std::size_t encoder_layers = 0;
    std::size_t in_channels = 0;
    std::size_t code_channels = 0;
    std::vector<Stage> stages;  // empty for end-to-end trained AEs
    // decoder layer index -> encoder pool layer index it inverts
    std::vector<std::pair<std::size_t, std::size_t>> unpool_pairs;

    Tensor encode(const Tensor& x, Mode mode) {
        return net.forward_range(0, encoder_layers, x, mode);
    }

    /// Full reconstruction pass. Fusion decoders receive output padding
    /// hints so every unpool restores the exact pre-pool length.
    Tensor forward(const Tensor& x, Mode mode) {
        std::vector<std::size_t> pool_in_len(net.layer_count(), 0);
        Tensor h = x;
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            const LayerSpec& spec = net.layer(i).spec();
            if (spec.kind == LayerKind::maxpool1d) {
                pool_in_len[i] = h.dim(h.rank() - 1);
            }
            for (const auto& [dec_idx, pool_idx] : unpool_pairs) {
                if (dec_idx != i) continue;
                std::size_t cur = h.dim(h.rank() - 1);
                std::size_t std_len = conv_transpose_out_len(cur, spec.kernel_size, spec.stride,
                                                             spec.padding);
                std::size_t target = pool_in_len[pool_idx];
                if (target < std_len || target > std_len + 1) {
                    throw ShapeError("fusion decoder cannot restore pre-pool length");
                }
                static_cast<ConvTranspose1dLayer&>(net.layer(i)).set_output_padding(target -
                                                                                    std_len);
            }
            h = net.layer(i).forward(h, net.params(), mode);
        }
        return h;
    }

    /// Encoder output length for a given input length.
    std::size_t encoded_length(std::size_t input_len) const {
        std::size_t L = input_len;
        for (std::size_t i = 0; i < encoder_layers; ++i) {
            const LayerSpec& s = net.layer(i).spec();
            switch (s.kind) {
                case LayerKind::conv1d: L = conv_out_len(L, s.kernel_size, s.stride, s.padding); break;
                case LayerKind::maxpool1d: L = pool_out_len(L, s.pool_size, s.stride); break;
                default: break;
            }
        }
        return L;
    }
};

inline Autoencoder build_dr_sae(const DrSaeConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    Autoencoder ae;
    ae.in_channels = 1;
    ae.code_channels = cfg.code_channels();
    std::size_t S = cfg.channels.size();
    std::vector<std::size_t> chain;
    chain.push_back(1);
    for (auto c : cfg.channels) chain.push_back(c);

    for (std::size_t i = 0; i < S; ++i) {
        ae.net.add(LayerSpec::conv1d(chain[i], chain[i + 1], cfg.kernel_size, 1, Padding::same),
                   rng);
        ae.net.add(LayerSpec::act(Activation::selu), rng);
    }
    ae.encoder_layers = ae.net.layer_count();
    for (std::size_t i = S; i > 0; --i) {
        ae.net.add(LayerSpec::conv1d_transpose(chain[i], chain[i - 1], cfg.kernel_size, 1,
                                               Padding::same),
                   rng);
        // The outermost decoder layer regresses the raw signal, so it
        // stays linear; inner mirrors regress SELU-range features.
        ae.net.add(LayerSpec::act(i == 1 ? Activation::linear : Activation::selu), rng);
    }
    for (std::size_t i = 0; i < S; ++i) {
        Autoencoder::Stage st;
        st.enc_first = 2 * i;
        st.enc_last = 2 * i + 2;
        st.dec_first = 2 * S + 2 * (S - 1 - i);
        st.dec_last = st.dec_first + 2;
        ae.stages.push_back(st);
    }
    return ae;
}

inline Autoencoder build_fusion_ae(const FusionAeConfig& cfg, std::size_t in_channels,
                                   std::uint64_t seed) {
    cfg.validate();
    if (in_channels == 0) throw ConfigError("fusion_ae: in_channels must be positive");
    Rng rng(seed);
    Autoencoder ae;
    ae.in_channels = in_channels;
    ae.code_channels = cfg.code_channels();
    std::size_t k = cfg.kernel_size;
    const auto& c = cfg.channels;

    // encoder: conv1 -> pool(4,2) -> conv2 -> pool(3,2) -> conv3 -> BN -> conv4
    ae.net.add(LayerSpec::conv1d(in_channels, c[0], k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    std::size_t pool1_idx = ae.net.layer_count();
    ae.net.add(LayerSpec::maxpool1d(cfg.pool_sizes[0], cfg.pool_stride), rng);
    ae.net.add(LayerSpec::conv1d(c[0], c[1], k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    std::size_t pool2_idx = ae.net.layer_count();
    ae.net.add(LayerSpec::maxpool1d(cfg.pool_sizes[1], cfg.pool_stride), rng);
    ae.net.add(LayerSpec::conv1d(c[1], c[2], k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    ae.net.add(LayerSpec::batchnorm1d(c[2]), rng);
    ae.net.add(LayerSpec::conv1d(c[2], c[3], k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    ae.encoder_layers = ae.net.layer_count();

    // decoder: mirrored convs, stride-2 transposed convs for the pools,
    // no BN, linear output layer.
    ae.net.add(LayerSpec::conv1d_transpose(c[3], c[2], k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    ae.net.add(LayerSpec::conv1d_transpose(c[2], c[1], k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    std::size_t unpool2_idx = ae.net.layer_count();
    ae.net.add(LayerSpec::conv1d_transpose(c[1], c[1], cfg.pool_sizes[1], cfg.pool_stride,
                                           Padding::valid),
               rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    ae.net.add(LayerSpec::conv1d_transpose(c[1], c[0], k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    std::size_t unpool1_idx = ae.net.layer_count();
    ae.net.add(LayerSpec::conv1d_transpose(c[0], c[0], cfg.pool_sizes[0], cfg.pool_stride,
                                           Padding::valid),
               rng);
    ae.net.add(LayerSpec::act(Activation::selu), rng);
    ae.net.add(LayerSpec::conv1d_transpose(c[0], in_channels, k, 1, Padding::same), rng);
    ae.net.add(LayerSpec::act(Activation::linear), rng);

    ae.unpool_pairs.emplace_back(unpool2_idx, pool2_idx);
    ae.unpool_pairs.emplace_back(unpool1_idx, pool1_idx);
    return ae;
}

/// Four layers of neurons: input -> hidden... -> num_classes logits.
inline Net build_classifier(std::size_t input_dim, std::size_t num_classes,
                            const ClassifierConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (input_dim == 0 || num_classes == 0)
        throw ConfigError("classifier: input_dim and num_classes must be positive");
    Rng rng(seed);
    Net net;
    std::size_t prev = input_dim;
    for (std::size_t h : cfg.hidden) {
        net.add(LayerSpec::dense(prev, h), rng);
        net.add(LayerSpec::act(Activation::selu), rng);
        prev = h;
    }
    net.add(LayerSpec::dense(prev, num_classes), rng);
    return net;
}

/// Per-window fused feature set flowing between blocks.
struct FusionFeatures {
    Tensor per_axis_codes;  // (6n, dr_code, l)
    Tensor per_unit_codes;  // (n, lff_code, l6); masked units all zero
    Tensor global_code;     // (gff_code, l12); empty when n_units == 1
    std::size_t l = 0, l6 = 0, l12 = 0;
};

/// The full model: per-axis DR-SAEs, per-unit LFF-AEs, the GFF-AE
/// (absent for single-unit layouts) and the MLP classifier, plus the
/// per-axis normalization statistics captured from the training split.
struct HufModel {
    SensorLayout layout;
    DrSaeConfig dr_cfg;
    FusionAeConfig lff_cfg;
    FusionAeConfig gff_cfg;
    ClassifierConfig cls_cfg;
    std::size_t window_size = 0;
    std::size_t num_classes = 0;
    std::vector<std::string> class_names;

    std::vector<Autoencoder> dr_saes;  // 6n nets, or 6 when weights are shared per axis role
    std::vector<Autoencoder> lff_aes;  // one per unit
    std::optional<Autoencoder> gff_ae; // nullopt when n_units == 1
    std::optional<Net> classifier;

    Tensor norm_mean;  // per axis channel (6n)
    Tensor norm_std;

    std::size_t dr_sae_count() const {
        return dr_cfg.share_weights ? SensorLayout::axes_per_unit : layout.total_channels();
    }

    Autoencoder& dr_sae_for_axis(std::size_t axis) {
        return dr_saes[dr_cfg.share_weights ? axis % SensorLayout::axes_per_unit : axis];
    }
    const Autoencoder& dr_sae_for_axis(std::size_t axis) const {
        return dr_saes[dr_cfg.share_weights ? axis % SensorLayout::axes_per_unit : axis];
    }

    bool has_gff() const { return layout.n_units > 1; }

    std::size_t lff_input_channels() const {
        return SensorLayout::axes_per_unit * dr_cfg.code_channels();
    }
    std::size_t gff_input_channels() const { return layout.n_units * lff_cfg.code_channels(); }

    /// Flattened classifier feature width for a given window length.
    std::size_t classifier_input_dim(std::size_t W) const {
        std::size_t l = dr_saes.front().encoded_length(W);
        std::size_t l6 = lff_aes.front().encoded_length(l);
        if (!has_gff()) return lff_cfg.code_channels() * l6;
        std::size_t l12 = gff_ae->encoded_length(l6);
        return gff_cfg.code_channels() * l12;
    }
};

inline HufModel build_huf_model(const SensorLayout& layout, const DrSaeConfig& dr,
                                const FusionAeConfig& lff, const FusionAeConfig& gff,
                                const ClassifierConfig& cls, std::uint64_t seed) {
    layout.validate();
    HufModel m;
    m.layout = layout;
    m.dr_cfg = dr;
    m.lff_cfg = lff;
    m.gff_cfg = gff;
    m.cls_cfg = cls;
    for (std::size_t i = 0; i < m.dr_sae_count(); ++i) {
        m.dr_saes.push_back(build_dr_sae(dr, Rng::derive(seed, "dr_sae." + std::to_string(i))));
    }
    for (std::size_t u = 0; u < layout.n_units; ++u) {
        m.lff_aes.push_back(build_fusion_ae(lff, m.lff_input_channels(),
                                            Rng::derive(seed, "lff." + std::to_string(u))));
    }
    if (m.has_gff()) {
        m.gff_ae = build_fusion_ae(gff, m.gff_input_channels(), Rng::derive(seed, "gff"));
    }
    std::size_t ch = layout.total_channels();
    m.norm_mean = Tensor::zeros({ch});
    m.norm_std = Tensor::full({ch}, 1.0);
    return m;
}

namespace detail {

// (N, C, L) z-score using stored per-channel statistics.
inline Tensor normalize_windows(const Tensor& windows, const Tensor& mean, const Tensor& std_dev) {
    auto d = as_batch(windows, "normalize_windows");
    require(mean.size() == d.c && std_dev.size() == d.c, "normalize: stats size mismatch");
    Tensor out(windows.shape());
    for (std::size_t n = 0; n < d.n; ++n) {
        for (std::size_t c = 0; c < d.c; ++c) {
            const double* x = windows.data() + (n * d.c + c) * d.l;
            double* y = out.data() + (n * d.c + c) * d.l;
            double m = mean[c];
            double inv = 1.0 / std_dev[c];
            for (std::size_t t = 0; t < d.l; ++t) y[t] = (x[t] - m) * inv;
        }
    }
    return out;
}

// Extracts channel rows [first, last) of sample n into a (last-first, L) tensor.
inline Tensor slice_channels(const Tensor& batch, std::size_t n, std::size_t first,
                             std::size_t last) {
    auto d = as_batch(batch, "slice_channels");
    Tensor out({last - first, d.l});
    const double* src = batch.data() + (n * d.c + first) * d.l;
    std::copy(src, src + (last - first) * d.l, out.data());
    return out;
}

}  // namespace detail

/// Hierarchical inference for one raw window (6n, W): normalize, encode
/// each axis, fuse per unit, mask inactive units, fuse globally.
/// Inactive units are skipped entirely; their code slices stay zero, so
/// changing a masked unit's raw input cannot affect anything downstream.
inline FusionFeatures huf_forward(HufModel& model, const Tensor& window) {
    model.layout.validate();
    require(window.rank() == 2, "huf_forward: window must be (channels, W)");
    std::size_t ch = model.layout.total_channels();
    require(window.dim(0) == ch, "huf_forward: window has " + std::to_string(window.dim(0)) +
                                     " channels, layout expects " + std::to_string(ch));
    std::size_t W = window.dim(1);
    Tensor norm = detail::normalize_windows(window, model.norm_mean, model.norm_std);

    FusionFeatures f;
    f.l = model.dr_saes.front().encoded_length(W);
    std::size_t dr_code = model.dr_cfg.code_channels();
    f.per_axis_codes = Tensor::zeros({ch, dr_code, f.l});

    std::size_t n_units = model.layout.n_units;
    std::size_t lff_in = model.lff_input_channels();
    f.l6 = model.lff_aes.front().encoded_length(f.l);
    std::size_t lff_code = model.lff_cfg.code_channels();
    f.per_unit_codes = Tensor::zeros({n_units, lff_code, f.l6});

    for (std::size_t u = 0; u < n_units; ++u) {
        if (!model.layout.unit_active(u)) continue;
        Tensor unit_feat({lff_in, f.l});
        for (std::size_t a = 0; a < SensorLayout::axes_per_unit; ++a) {
            std::size_t axis = u * SensorLayout::axes_per_unit + a;
            Tensor x({1, W});
            std::copy(norm.data() + axis * W, norm.data() + (axis + 1) * W, x.data());
            Tensor code = model.dr_sae_for_axis(axis).encode(x, Mode::infer);
            std::copy(code.data(), code.data() + code.size(),
                      f.per_axis_codes.data() + axis * dr_code * f.l);
            std::copy(code.data(), code.data() + code.size(),
                      unit_feat.data() + a * dr_code * f.l);
        }
        Tensor unit_code = model.lff_aes[u].encode(unit_feat, Mode::infer);
        std::copy(unit_code.data(), unit_code.data() + unit_code.size(),
                  f.per_unit_codes.data() + u * lff_code * f.l6);
    }

    if (model.has_gff()) {
        Tensor gff_in = f.per_unit_codes.reshaped({n_units * lff_code, f.l6});
        f.global_code = model.gff_ae->encode(gff_in, Mode::infer);
        f.l12 = f.global_code.dim(1);
    }
    return f;
}

/// Flattened classifier features: the global code, or the single unit's
/// local code when the layout has no GFF block.
inline Tensor classifier_features(const FusionFeatures& f, bool has_gff) {
    if (has_gff) return f.global_code.reshaped({f.global_code.size()});
    Tensor code({f.per_unit_codes.dim(1) * f.l6});
    std::copy(f.per_unit_codes.data(), f.per_unit_codes.data() + code.size(), code.data());
    return code;
}

/// Batched feature extraction: (N, 6n, W) -> (N, D) classifier inputs.
/// Bitwise identical to running huf_forward per window.
inline Tensor huf_feature_matrix(HufModel& model, const Tensor& windows) {
    auto d = detail::as_batch(windows, "huf_feature_matrix");
    std::size_t D = model.classifier_input_dim(d.l);
    Tensor out({d.n, D});
    for (std::size_t n = 0; n < d.n; ++n) {
        Tensor w = detail::slice_channels(windows, n, 0, d.c);
        FusionFeatures f = huf_forward(model, w);
        Tensor feat = classifier_features(f, model.has_gff());
        require(feat.size() == D, "huf_feature_matrix: feature width mismatch");
        std::copy(feat.data(), feat.data() + D, out.data() + n * D);
    }
    return out;
}

}  // namespace huf
