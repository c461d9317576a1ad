#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "huf/errors.hpp"
#include "huf/layers.hpp"
#include "huf/losses.hpp"
#include "huf/param_store.hpp"
#include "huf/rng.hpp"
#include "huf/tensor.hpp"

namespace huf {

enum class Mode { infer, train };

/// One layer of a sequential net. Parameters live in the owning net's
/// ParamStore; the layer keeps handles plus whatever forward cache its
/// backward pass needs. Backward is only valid after a train-mode forward.
class Layer {
public:
    explicit Layer(LayerSpec spec) : spec_(spec) {}
    virtual ~Layer() = default;
    const LayerSpec& spec() const { return spec_; }

    virtual void init_params(ParamStore&, const std::string& /*prefix*/, Rng&) {}
    virtual Tensor forward(const Tensor& x, ParamStore& store, Mode mode) = 0;
    virtual Tensor backward(const Tensor& grad_out, ParamStore& store) = 0;

protected:
    LayerSpec spec_;
};

namespace detail {

// Kaiming-style fan-in init: normal with std = sqrt(1 / fan_in).
inline Tensor init_weight(const std::vector<std::size_t>& shape, std::size_t fan_in, Rng& rng) {
    Tensor w(shape);
    double std_dev = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std_dev * rng.normal();
    return w;
}

}  // namespace detail

class Conv1dLayer : public Layer {
public:
    using Layer::Layer;

    void init_params(ParamStore& store, const std::string& prefix, Rng& rng) override {
        std::size_t fan_in = spec_.in_channels * spec_.kernel_size;
        weight_ = store.add(prefix + "weight",
                            detail::init_weight({spec_.out_channels, spec_.in_channels,
                                                 spec_.kernel_size},
                                                fan_in, rng));
        bias_ = store.add(prefix + "bias", Tensor::zeros({spec_.out_channels}));
    }

    Tensor forward(const Tensor& x, ParamStore& store, Mode mode) override {
        if (mode == Mode::train) cached_input_ = x;
        return conv1d_forward(x, store.at(weight_).value, store.at(bias_).value, spec_.stride,
                              spec_.padding);
    }

    Tensor backward(const Tensor& grad_out, ParamStore& store) override {
        if (cached_input_.size() == 0) throw UsageError("conv1d: backward without forward cache");
        auto g = conv1d_backward(grad_out, cached_input_, store.at(weight_).value, spec_.stride,
                                 spec_.padding);
        accumulate(store.at(weight_).grad, g.grad_kernels);
        accumulate(store.at(bias_).grad, g.grad_bias);
        return g.grad_input;
    }

private:
    static void accumulate(Tensor& dst, const Tensor& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    std::size_t weight_ = 0, bias_ = 0;
    Tensor cached_input_;
};

class ConvTranspose1dLayer : public Layer {
public:
    using Layer::Layer;

    void init_params(ParamStore& store, const std::string& prefix, Rng& rng) override {
        std::size_t fan_in = spec_.in_channels * spec_.kernel_size;
        weight_ = store.add(prefix + "weight",
                            detail::init_weight({spec_.in_channels, spec_.out_channels,
                                                 spec_.kernel_size},
                                                fan_in, rng));
        bias_ = store.add(prefix + "bias", Tensor::zeros({spec_.out_channels}));
    }

    Tensor forward(const Tensor& x, ParamStore& store, Mode mode) override {
        if (mode == Mode::train) cached_input_ = x;
        return conv1d_transpose_forward(x, store.at(weight_).value, store.at(bias_).value,
                                        spec_.stride, spec_.padding, out_pad_);
    }

    Tensor backward(const Tensor& grad_out, ParamStore& store) override {
        if (cached_input_.size() == 0)
            throw UsageError("conv1d_transpose: backward without forward cache");
        auto g = conv1d_transpose_backward(grad_out, cached_input_, store.at(weight_).value,
                                           spec_.stride, spec_.padding, out_pad_);
        for (std::size_t i = 0; i < g.grad_kernels.size(); ++i)
            store.at(weight_).grad[i] += g.grad_kernels[i];
        for (std::size_t i = 0; i < g.grad_bias.size(); ++i)
            store.at(bias_).grad[i] += g.grad_bias[i];
        return g.grad_input;
    }

    /// Output padding for the next forward (set per input length by
    /// autoencoder drivers inverting a pool).
    void set_output_padding(std::size_t p) { out_pad_ = p; }

private:
    std::size_t weight_ = 0, bias_ = 0;
    std::size_t out_pad_ = 0;
    Tensor cached_input_;
};

class MaxPool1dLayer : public Layer {
public:
    using Layer::Layer;

    Tensor forward(const Tensor& x, ParamStore&, Mode mode) override {
        auto res = maxpool1d_forward(x, spec_.pool_size, spec_.stride);
        if (mode == Mode::train) {
            argmax_ = std::move(res.argmax);
            input_shape_ = x.shape();
        }
        return std::move(res.output);
    }

    Tensor backward(const Tensor& grad_out, ParamStore&) override {
        if (argmax_.empty()) throw UsageError("maxpool1d: backward without forward cache");
        return maxpool1d_backward(grad_out, argmax_, input_shape_);
    }

private:
    std::vector<std::size_t> argmax_;
    std::vector<std::size_t> input_shape_;
};

class BatchNorm1dLayer : public Layer {
public:
    explicit BatchNorm1dLayer(LayerSpec spec, double eps = 1e-5, double momentum = 0.9)
        : Layer(spec), eps_(eps), momentum_(momentum) {}

    void init_params(ParamStore& store, const std::string& prefix, Rng&) override {
        gamma_ = store.add(prefix + "gamma", Tensor::full({spec_.in_channels}, 1.0));
        beta_ = store.add(prefix + "beta", Tensor::zeros({spec_.in_channels}));
        mean_name_ = prefix + "running_mean";
        var_name_ = prefix + "running_var";
        store.add_buffer(mean_name_, Tensor::zeros({spec_.in_channels}));
        store.add_buffer(var_name_, Tensor::full({spec_.in_channels}, 1.0));
    }

    Tensor forward(const Tensor& x, ParamStore& store, Mode mode) override {
        bool training = mode == Mode::train;
        return batchnorm1d_forward(x, store.at(gamma_).value, store.at(beta_).value, eps_,
                                   training, store.buffer(mean_name_), store.buffer(var_name_),
                                   momentum_, training ? &cache_ : nullptr);
    }

    Tensor backward(const Tensor& grad_out, ParamStore& store) override {
        if (cache_.normalized.size() == 0)
            throw UsageError("batchnorm1d: backward without forward cache");
        auto g = batchnorm1d_backward(grad_out, cache_, store.at(gamma_).value);
        for (std::size_t i = 0; i < g.grad_gamma.size(); ++i) {
            store.at(gamma_).grad[i] += g.grad_gamma[i];
            store.at(beta_).grad[i] += g.grad_beta[i];
        }
        return g.grad_input;
    }

private:
    double eps_;
    double momentum_;
    std::size_t gamma_ = 0, beta_ = 0;
    std::string mean_name_, var_name_;
    BatchNormCache cache_;
};

class DenseLayer : public Layer {
public:
    using Layer::Layer;

    void init_params(ParamStore& store, const std::string& prefix, Rng& rng) override {
        weight_ = store.add(prefix + "weight",
                            detail::init_weight({spec_.out_channels, spec_.in_channels},
                                                spec_.in_channels, rng));
        bias_ = store.add(prefix + "bias", Tensor::zeros({spec_.out_channels}));
    }

    Tensor forward(const Tensor& x, ParamStore& store, Mode mode) override {
        if (mode == Mode::train) cached_input_ = x;
        return dense_forward(x, store.at(weight_).value, store.at(bias_).value);
    }

    Tensor backward(const Tensor& grad_out, ParamStore& store) override {
        if (cached_input_.size() == 0) throw UsageError("dense: backward without forward cache");
        auto g = dense_backward(grad_out, cached_input_, store.at(weight_).value);
        for (std::size_t i = 0; i < g.grad_weights.size(); ++i)
            store.at(weight_).grad[i] += g.grad_weights[i];
        for (std::size_t i = 0; i < g.grad_bias.size(); ++i)
            store.at(bias_).grad[i] += g.grad_bias[i];
        return g.grad_input;
    }

private:
    std::size_t weight_ = 0, bias_ = 0;
    Tensor cached_input_;
};

class ActivationLayer : public Layer {
public:
    using Layer::Layer;

    Tensor forward(const Tensor& x, ParamStore&, Mode mode) override {
        Tensor out;
        switch (spec_.activation) {
            case Activation::linear: out = x; break;
            case Activation::selu: out = selu(x); break;
            case Activation::relu: out = relu(x); break;
            case Activation::softmax: out = softmax(x); break;
        }
        if (mode == Mode::train) {
            cached_ = spec_.activation == Activation::softmax ? out : x;
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out, ParamStore&) override {
        switch (spec_.activation) {
            case Activation::linear: return grad_out;
            case Activation::selu: return selu_backward(grad_out, cached_);
            case Activation::relu: return relu_backward(grad_out, cached_);
            case Activation::softmax: return softmax_backward(grad_out, cached_);
        }
        throw UsageError("activation: unknown kind");
    }

private:
    Tensor cached_;
};

/// Sequential net owning its layers and parameters.
class Net {
public:
    Net() = default;
    Net(Net&&) = default;
    Net& operator=(Net&&) = default;
    Net(const Net&) = delete;
    Net& operator=(const Net&) = delete;

    Layer& add(const LayerSpec& spec, Rng& rng) {
        std::unique_ptr<Layer> layer;
        switch (spec.kind) {
            case LayerKind::conv1d: layer = std::make_unique<Conv1dLayer>(spec); break;
            case LayerKind::conv1d_transpose:
                layer = std::make_unique<ConvTranspose1dLayer>(spec);
                break;
            case LayerKind::maxpool1d: layer = std::make_unique<MaxPool1dLayer>(spec); break;
            case LayerKind::batchnorm1d: layer = std::make_unique<BatchNorm1dLayer>(spec); break;
            case LayerKind::dense: layer = std::make_unique<DenseLayer>(spec); break;
            case LayerKind::activation: layer = std::make_unique<ActivationLayer>(spec); break;
        }
        std::string prefix = "l" + std::to_string(layers_.size()) + ".";
        layer->init_params(params_, prefix, rng);
        layers_.push_back(std::move(layer));
        return *layers_.back();
    }

    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    Tensor forward(const Tensor& x, Mode mode) { return forward_range(0, layers_.size(), x, mode); }

    Tensor forward_range(std::size_t first, std::size_t last, const Tensor& x, Mode mode) {
        Tensor h = x;
        for (std::size_t i = first; i < last; ++i) h = layers_[i]->forward(h, params_, mode);
        if (first != last) require_finite(h, "net forward output");
        return h;
    }

    Tensor backward(const Tensor& grad_out) { return backward_range(0, layers_.size(), grad_out); }

    Tensor backward_range(std::size_t first, std::size_t last, const Tensor& grad_out) {
        Tensor g = grad_out;
        for (std::size_t i = last; i > first; --i) g = layers_[i - 1]->backward(g, params_);
        return g;
    }

    /// Names of parameters created by layers in [first, last).
    std::vector<std::string> param_names_in_range(std::size_t first, std::size_t last) const {
        std::vector<std::string> names;
        for (const auto& e : params_.entries()) {
            std::size_t dot = e.name.find('.');
            std::size_t idx = std::stoul(e.name.substr(1, dot - 1));
            if (idx >= first && idx < last) names.push_back(e.name);
        }
        return names;
    }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    ParamStore params_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.
// ---------------------------------------------------------------------------

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_param;
    std::map<std::string, double> per_param_errors;
};

/// Compares analytic gradients against central differences (step h).
/// Relative error uses denominator max(|analytic|, |numeric|, 1e-8).
inline GradCheckReport gradient_check(Net& net, const Tensor& input,
                                      const std::function<LossResult(const Tensor&)>& loss,
                                      double h = 1e-5) {
    net.params().zero_grads();
    Tensor out = net.forward(input, Mode::train);
    LossResult base = loss(out);
    if (!std::isfinite(base.value)) throw NumericError("gradient_check: non-finite loss");
    net.backward(base.grad);

    std::vector<Tensor> analytic;
    analytic.reserve(net.params().count());
    for (const auto& e : net.params().entries()) analytic.push_back(e.grad);

    GradCheckReport report;
    for (std::size_t p = 0; p < net.params().count(); ++p) {
        auto& entry = net.params().at(p);
        double worst = 0.0;
        for (std::size_t i = 0; i < entry.value.size(); ++i) {
            double saved = entry.value[i];
            entry.value[i] = saved + h;
            double lp = loss(net.forward(input, Mode::train)).value;
            entry.value[i] = saved - h;
            double lm = loss(net.forward(input, Mode::train)).value;
            entry.value[i] = saved;
            double numeric = (lp - lm) / (2.0 * h);
            double a = analytic[p][i];
            // Central differences of an O(1) loss carry ~1e-11 roundoff
            // at this step size; below that, both sides are zero.
            if (std::fabs(a) < 1e-9 && std::fabs(numeric) < 1e-9) continue;
            double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            worst = std::max(worst, std::fabs(a - numeric) / denom);
        }
        report.per_param_errors[entry.name] = worst;
        if (worst >= report.max_relative_error) {
            report.max_relative_error = worst;
            report.worst_param = entry.name;
        }
    }
    return report;
}

}  // namespace huf
