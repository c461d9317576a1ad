#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "huf/errors.hpp"
#include "huf/tensor.hpp"

namespace huf {

enum class Padding { valid, same };
enum class Activation { linear, selu, relu, softmax };
enum class LayerKind { conv1d, conv1d_transpose, maxpool1d, batchnorm1d, dense, activation };

// SELU self-normalizing constants, full double precision.
inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

struct LayerSpec {
    LayerKind kind = LayerKind::activation;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_size = 0;
    std::size_t pool_size = 0;
    std::size_t stride = 1;
    Padding padding = Padding::valid;
    Activation activation = Activation::linear;

    static LayerSpec conv1d(std::size_t in_c, std::size_t out_c, std::size_t k,
                            std::size_t stride = 1, Padding pad = Padding::valid) {
        LayerSpec s;
        s.kind = LayerKind::conv1d;
        s.in_channels = in_c;
        s.out_channels = out_c;
        s.kernel_size = k;
        s.stride = stride;
        s.padding = pad;
        return s;
    }
    static LayerSpec conv1d_transpose(std::size_t in_c, std::size_t out_c, std::size_t k,
                                      std::size_t stride = 1, Padding pad = Padding::valid) {
        LayerSpec s = conv1d(in_c, out_c, k, stride, pad);
        s.kind = LayerKind::conv1d_transpose;
        return s;
    }
    static LayerSpec maxpool1d(std::size_t pool, std::size_t stride) {
        LayerSpec s;
        s.kind = LayerKind::maxpool1d;
        s.pool_size = pool;
        s.stride = stride;
        return s;
    }
    static LayerSpec batchnorm1d(std::size_t channels) {
        LayerSpec s;
        s.kind = LayerKind::batchnorm1d;
        s.in_channels = channels;
        s.out_channels = channels;
        return s;
    }
    static LayerSpec dense(std::size_t in_dim, std::size_t out_dim) {
        LayerSpec s;
        s.kind = LayerKind::dense;
        s.in_channels = in_dim;
        s.out_channels = out_dim;
        return s;
    }
    static LayerSpec act(Activation a) {
        LayerSpec s;
        s.kind = LayerKind::activation;
        s.activation = a;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Length arithmetic. padding=same uses total padding K-1 (left-biased:
// pad_left = floor((K-1)/2)), so with stride 1 the length is preserved.
// ---------------------------------------------------------------------------

inline std::size_t pad_total(Padding p, std::size_t k) {
    return p == Padding::same ? k - 1 : 0;
}

inline std::size_t pad_left(Padding p, std::size_t k) {
    return p == Padding::same ? (k - 1) / 2 : 0;
}

inline std::size_t conv_out_len(std::size_t L, std::size_t K, std::size_t stride, Padding p) {
    if (K == 0) throw ConfigError("conv1d: kernel size must be positive");
    if (stride == 0) throw ConfigError("conv1d: stride must be positive");
    std::size_t pt = pad_total(p, K);
    if (K > L + pt) throw ShapeError("conv1d: kernel longer than padded input");
    return (L + pt - K) / stride + 1;
}

/// out_pad appends extra output positions that receive only the bias,
/// used by fusion decoders to invert a pool whose input length was odd.
inline std::size_t conv_transpose_out_len(std::size_t L, std::size_t K, std::size_t stride,
                                          Padding p, std::size_t out_pad = 0) {
    if (K == 0) throw ConfigError("conv1d_transpose: kernel size must be positive");
    if (stride == 0) throw ConfigError("conv1d_transpose: stride must be positive");
    if (L == 0) throw ShapeError("conv1d_transpose: empty input");
    std::size_t pt = pad_total(p, K);
    std::size_t full = (L - 1) * stride + K + out_pad;
    if (full < pt) throw ShapeError("conv1d_transpose: padding exceeds output");
    return full - pt;
}

inline std::size_t pool_out_len(std::size_t L, std::size_t pool, std::size_t stride) {
    if (pool == 0) throw ConfigError("maxpool1d: pool size must be positive");
    if (stride == 0) throw ConfigError("maxpool1d: stride must be positive");
    if (pool > L) throw ShapeError("maxpool1d: pool size exceeds input length");
    return (L - pool) / stride + 1;
}

namespace detail {

struct Dims3 {
    std::size_t n, c, l;
};

// Accepts (C, L) or (N, C, L); rank-2 is treated as a single-sample batch.
inline Dims3 as_batch(const Tensor& t, const char* what) {
    if (t.rank() == 2) return {1, t.dim(0), t.dim(1)};
    if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2)};
    throw ShapeError(std::string(what) + ": expected rank 2 or 3, got " + t.shape_str());
}

inline std::vector<std::size_t> like_rank(const Tensor& ref, std::size_t c, std::size_t l) {
    if (ref.rank() == 2) return {c, l};
    return {ref.dim(0), c, l};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// conv1d: cross-correlation (deep-learning convention).
// out[n,co,t] = bias[co] + sum_ci sum_k in[n,ci,t*stride+k-padL] * W[co,ci,k]
// ---------------------------------------------------------------------------

namespace detail {

// Four-lane reductions with a fixed summation order: deterministic and
// free of the scalar FMA latency chain.
inline double dot_n(const double* __restrict a, const double* __restrict b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

inline double sum_n(const double* __restrict a, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i];
        s1 += a[i + 1];
        s2 += a[i + 2];
        s3 += a[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

// Valid output range [t0, t1) for one kernel tap: 0 <= t*stride + k - pl < L.
struct TapRange {
    std::size_t t0, t1;
};

inline TapRange tap_range(std::size_t L, std::size_t L_out, std::size_t stride, std::size_t k,
                          std::size_t pl) {
    std::size_t t0 = pl > k ? (pl - k + stride - 1) / stride : 0;
    auto last_src = static_cast<long long>(L) - 1 - static_cast<long long>(k) +
                    static_cast<long long>(pl);
    if (last_src < 0 || t0 >= L_out) return {0, 0};
    std::size_t t1 = static_cast<std::size_t>(last_src) / stride + 1;
    t1 = std::min(t1, L_out);
    return {t0, t1 > t0 ? t1 : t0};
}

}  // namespace detail

inline Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                             std::size_t stride, Padding padding) {
    auto d = detail::as_batch(input, "conv1d_forward");
    require(kernels.rank() == 3, "conv1d_forward: kernels must be (C_out, C_in, K)");
    std::size_t c_out = kernels.dim(0), c_in = kernels.dim(1), K = kernels.dim(2);
    require(c_in == d.c, "conv1d_forward: input channels " + std::to_string(d.c) +
                             " != kernel channels " + std::to_string(c_in));
    require(bias.size() == c_out, "conv1d_forward: bias size != out channels");
    std::size_t L = d.l;
    std::size_t L_out = conv_out_len(L, K, stride, padding);
    std::size_t pl = pad_left(padding, K);

    Tensor out(detail::like_rank(input, c_out, L_out));
    const double* in = input.data();
    double* o = out.data();
    const double* W = kernels.data();
    for (std::size_t n = 0; n < d.n; ++n) {
        const double* in_n = in + n * d.c * L;
        for (std::size_t co = 0; co < c_out; ++co) {
            double* row = o + (n * c_out + co) * L_out;
            double b = bias[co];
            for (std::size_t t = 0; t < L_out; ++t) row[t] = b;
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                const double* x = in_n + ci * L;
                const double* w = W + (co * c_in + ci) * K;
                for (std::size_t k = 0; k < K; ++k) {
                    double wk = w[k];
                    auto [t0, t1] = detail::tap_range(L, L_out, stride, k, pl);
                    if (t1 == t0) continue;
                    if (stride == 1) {
                        const double* __restrict xs = x + (t0 + k - pl);
                        double* __restrict r = row + t0;
                        std::size_t len = t1 - t0;
                        for (std::size_t i = 0; i < len; ++i) r[i] += wk * xs[i];
                    } else {
                        for (std::size_t t = t0; t < t1; ++t) {
                            row[t] += wk * x[t * stride + k - pl];
                        }
                    }
                }
            }
        }
    }
    return out;
}

struct ConvGrads {
    Tensor grad_input;
    Tensor grad_kernels;
    Tensor grad_bias;
};

inline ConvGrads conv1d_backward(const Tensor& grad_out, const Tensor& cached_input,
                                 const Tensor& kernels, std::size_t stride, Padding padding) {
    auto d = detail::as_batch(cached_input, "conv1d_backward");
    auto g = detail::as_batch(grad_out, "conv1d_backward");
    std::size_t c_out = kernels.dim(0), c_in = kernels.dim(1), K = kernels.dim(2);
    std::size_t L = d.l;
    std::size_t L_out = conv_out_len(L, K, stride, padding);
    require(g.n == d.n && g.c == c_out && g.l == L_out,
            "conv1d_backward: grad_out shape inconsistent with forward pass");
    std::size_t pl = pad_left(padding, K);

    ConvGrads out;
    out.grad_input = Tensor::zeros(cached_input.shape());
    out.grad_kernels = Tensor::zeros(kernels.shape());
    out.grad_bias = Tensor::zeros({c_out});
    const double* in = cached_input.data();
    const double* go = grad_out.data();
    const double* W = kernels.data();
    double* gi = out.grad_input.data();
    double* gw = out.grad_kernels.data();
    double* gb = out.grad_bias.data();

    for (std::size_t n = 0; n < d.n; ++n) {
        for (std::size_t co = 0; co < c_out; ++co) {
            const double* grow = go + (n * c_out + co) * L_out;
            gb[co] += detail::sum_n(grow, L_out);
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                const double* x = in + (n * d.c + ci) * L;
                double* gx = gi + (n * d.c + ci) * L;
                const double* w = W + (co * c_in + ci) * K;
                double* gwk = gw + (co * c_in + ci) * K;
                for (std::size_t k = 0; k < K; ++k) {
                    auto [t0, t1] = detail::tap_range(L, L_out, stride, k, pl);
                    if (t1 == t0) continue;
                    double wk = w[k];
                    if (stride == 1) {
                        const double* __restrict xs = x + (t0 + k - pl);
                        double* __restrict gxs = gx + (t0 + k - pl);
                        const double* __restrict g = grow + t0;
                        std::size_t len = t1 - t0;
                        gwk[k] += detail::dot_n(g, xs, len);
                        for (std::size_t i = 0; i < len; ++i) gxs[i] += wk * g[i];
                    } else {
                        double gsum = 0.0;
                        for (std::size_t t = t0; t < t1; ++t) {
                            std::size_t src = t * stride + k - pl;
                            gsum += grow[t] * x[src];
                            gx[src] += wk * grow[t];
                        }
                        gwk[k] += gsum;
                    }
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// conv1d_transpose: the adjoint of conv1d as a linear map. Kernels are
// (C_in, C_out, K): the forward scatters each input sample across K output
// taps. L_out = (L_in - 1) * stride + K - pad_total.
// ---------------------------------------------------------------------------

inline Tensor conv1d_transpose_forward(const Tensor& input, const Tensor& kernels,
                                       const Tensor& bias, std::size_t stride, Padding padding,
                                       std::size_t out_pad = 0) {
    auto d = detail::as_batch(input, "conv1d_transpose_forward");
    require(kernels.rank() == 3, "conv1d_transpose_forward: kernels must be (C_in, C_out, K)");
    std::size_t c_in = kernels.dim(0), c_out = kernels.dim(1), K = kernels.dim(2);
    require(c_in == d.c, "conv1d_transpose_forward: input channels mismatch");
    require(bias.size() == c_out, "conv1d_transpose_forward: bias size != out channels");
    std::size_t L_in = d.l;
    std::size_t L_out = conv_transpose_out_len(L_in, K, stride, padding, out_pad);
    std::size_t pl = pad_left(padding, K);

    Tensor out(detail::like_rank(input, c_out, L_out));
    const double* in = input.data();
    double* o = out.data();
    const double* W = kernels.data();
    for (std::size_t n = 0; n < d.n; ++n) {
        for (std::size_t co = 0; co < c_out; ++co) {
            double* row = o + (n * c_out + co) * L_out;
            double b = bias[co];
            for (std::size_t t = 0; t < L_out; ++t) row[t] = b;
        }
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* x = in + (n * d.c + ci) * L_in;
            for (std::size_t co = 0; co < c_out; ++co) {
                double* row = o + (n * c_out + co) * L_out;
                const double* w = W + (ci * c_out + co) * K;
                for (std::size_t k = 0; k < K; ++k) {
                    // valid t: 0 <= t*stride + k - pl < L_out
                    auto [t0, t1] = detail::tap_range(L_out, L_in, stride, k, pl);
                    if (t1 == t0) continue;
                    double wk = w[k];
                    if (stride == 1) {
                        double* __restrict r = row + (t0 + k - pl);
                        const double* __restrict xs = x + t0;
                        std::size_t len = t1 - t0;
                        for (std::size_t i = 0; i < len; ++i) r[i] += wk * xs[i];
                    } else {
                        for (std::size_t t = t0; t < t1; ++t) {
                            row[t * stride + k - pl] += wk * x[t];
                        }
                    }
                }
            }
        }
    }
    return out;
}

inline ConvGrads conv1d_transpose_backward(const Tensor& grad_out, const Tensor& cached_input,
                                           const Tensor& kernels, std::size_t stride,
                                           Padding padding, std::size_t out_pad = 0) {
    auto d = detail::as_batch(cached_input, "conv1d_transpose_backward");
    auto g = detail::as_batch(grad_out, "conv1d_transpose_backward");
    std::size_t c_in = kernels.dim(0), c_out = kernels.dim(1), K = kernels.dim(2);
    std::size_t L_in = d.l;
    std::size_t L_out = conv_transpose_out_len(L_in, K, stride, padding, out_pad);
    require(g.n == d.n && g.c == c_out && g.l == L_out,
            "conv1d_transpose_backward: grad_out shape inconsistent with forward pass");
    std::size_t pl = pad_left(padding, K);

    ConvGrads out;
    out.grad_input = Tensor::zeros(cached_input.shape());
    out.grad_kernels = Tensor::zeros(kernels.shape());
    out.grad_bias = Tensor::zeros({c_out});
    const double* in = cached_input.data();
    const double* go = grad_out.data();
    const double* W = kernels.data();
    double* gi = out.grad_input.data();
    double* gw = out.grad_kernels.data();
    double* gb = out.grad_bias.data();

    for (std::size_t n = 0; n < d.n; ++n) {
        for (std::size_t co = 0; co < c_out; ++co) {
            const double* grow = go + (n * c_out + co) * L_out;
            gb[co] += detail::sum_n(grow, L_out);
        }
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* x = in + (n * d.c + ci) * L_in;
            double* gx = gi + (n * d.c + ci) * L_in;
            for (std::size_t co = 0; co < c_out; ++co) {
                const double* grow = go + (n * c_out + co) * L_out;
                const double* w = W + (ci * c_out + co) * K;
                double* gwk = gw + (ci * c_out + co) * K;
                for (std::size_t k = 0; k < K; ++k) {
                    auto [t0, t1] = detail::tap_range(L_out, L_in, stride, k, pl);
                    if (t1 == t0) continue;
                    double wk = w[k];
                    if (stride == 1) {
                        const double* __restrict g = grow + (t0 + k - pl);
                        const double* __restrict xs = x + t0;
                        double* __restrict gxs = gx + t0;
                        std::size_t len = t1 - t0;
                        gwk[k] += detail::dot_n(xs, g, len);
                        for (std::size_t i = 0; i < len; ++i) gxs[i] += wk * g[i];
                    } else {
                        double gsum = 0.0;
                        for (std::size_t t = t0; t < t1; ++t) {
                            double gd = grow[t * stride + k - pl];
                            gsum += x[t] * gd;
                            gx[t] += wk * gd;
                        }
                        gwk[k] += gsum;
                    }
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// maxpool1d. Ties break toward the lowest index.
// ---------------------------------------------------------------------------

struct PoolResult {
    Tensor output;
    std::vector<std::size_t> argmax;  // source index within L, per output element
};

inline PoolResult maxpool1d_forward(const Tensor& input, std::size_t pool, std::size_t stride) {
    auto d = detail::as_batch(input, "maxpool1d_forward");
    std::size_t L = d.l;
    std::size_t L_out = pool_out_len(L, pool, stride);

    PoolResult res;
    res.output = Tensor(detail::like_rank(input, d.c, L_out));
    res.argmax.resize(d.n * d.c * L_out);
    const double* in = input.data();
    double* o = res.output.data();
    for (std::size_t nc = 0; nc < d.n * d.c; ++nc) {
        const double* x = in + nc * L;
        double* row = o + nc * L_out;
        std::size_t* am = res.argmax.data() + nc * L_out;
        for (std::size_t t = 0; t < L_out; ++t) {
            std::size_t start = t * stride;
            double best = x[start];
            std::size_t best_i = start;
            for (std::size_t k = 1; k < pool; ++k) {
                if (x[start + k] > best) {
                    best = x[start + k];
                    best_i = start + k;
                }
            }
            row[t] = best;
            am[t] = best_i;
        }
    }
    return res;
}

inline Tensor maxpool1d_backward(const Tensor& grad_out, const std::vector<std::size_t>& argmax,
                                 const std::vector<std::size_t>& input_shape) {
    Tensor grad_in = Tensor::zeros(input_shape);
    auto g = detail::as_batch(grad_out, "maxpool1d_backward");
    auto d = detail::as_batch(grad_in, "maxpool1d_backward");
    require(argmax.size() == grad_out.size(), "maxpool1d_backward: argmax cache missing");
    const double* go = grad_out.data();
    double* gi = grad_in.data();
    for (std::size_t nc = 0; nc < g.n * g.c; ++nc) {
        const double* grow = go + nc * g.l;
        double* gx = gi + nc * d.l;
        const std::size_t* am = argmax.data() + nc * g.l;
        for (std::size_t t = 0; t < g.l; ++t) gx[am[t]] += grow[t];
    }
    return grad_in;
}

// ---------------------------------------------------------------------------
// batchnorm1d: normalizes per channel over (batch, length).
// ---------------------------------------------------------------------------

struct BatchNormCache {
    Tensor normalized;      // x_hat
    std::vector<double> mean;
    std::vector<double> inv_std;
};

inline Tensor batchnorm1d_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                                  double eps, bool training, Tensor& running_mean,
                                  Tensor& running_var, double momentum,
                                  BatchNormCache* cache = nullptr) {
    if (eps <= 0.0) throw ConfigError("batchnorm1d: eps must be positive");
    auto d = detail::as_batch(input, "batchnorm1d_forward");
    require(gamma.size() == d.c && beta.size() == d.c, "batchnorm1d: gamma/beta size mismatch");
    require(running_mean.size() == d.c && running_var.size() == d.c,
            "batchnorm1d: running stats size mismatch");

    Tensor out(input.shape());
    const double* in = input.data();
    double* o = out.data();
    std::size_t M = d.n * d.l;  // reduction size per channel
    if (cache) {
        cache->normalized = Tensor(input.shape());
        cache->mean.assign(d.c, 0.0);
        cache->inv_std.assign(d.c, 0.0);
    }
    for (std::size_t c = 0; c < d.c; ++c) {
        double mean, var;
        if (training) {
            double s = 0.0;
            for (std::size_t n = 0; n < d.n; ++n) {
                const double* x = in + (n * d.c + c) * d.l;
                for (std::size_t t = 0; t < d.l; ++t) s += x[t];
            }
            mean = s / static_cast<double>(M);
            double sq = 0.0;
            for (std::size_t n = 0; n < d.n; ++n) {
                const double* x = in + (n * d.c + c) * d.l;
                for (std::size_t t = 0; t < d.l; ++t) {
                    double dv = x[t] - mean;
                    sq += dv * dv;
                }
            }
            var = sq / static_cast<double>(M);
            running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * mean;
            running_var[c] = momentum * running_var[c] + (1.0 - momentum) * var;
        } else {
            mean = running_mean[c];
            var = running_var[c];
        }
        double inv_std = 1.0 / std::sqrt(var + eps);
        double g = gamma[c], b = beta[c];
        for (std::size_t n = 0; n < d.n; ++n) {
            const double* x = in + (n * d.c + c) * d.l;
            double* y = o + (n * d.c + c) * d.l;
            double* xh = cache ? cache->normalized.data() + (n * d.c + c) * d.l : nullptr;
            for (std::size_t t = 0; t < d.l; ++t) {
                double nv = (x[t] - mean) * inv_std;
                if (xh) xh[t] = nv;
                y[t] = g * nv + b;
            }
        }
        if (cache) {
            cache->mean[c] = mean;
            cache->inv_std[c] = inv_std;
        }
    }
    return out;
}

struct BatchNormGrads {
    Tensor grad_input;
    Tensor grad_gamma;
    Tensor grad_beta;
};

// Train-mode backward through the batch statistics.
inline BatchNormGrads batchnorm1d_backward(const Tensor& grad_out, const BatchNormCache& cache,
                                           const Tensor& gamma) {
    auto d = detail::as_batch(grad_out, "batchnorm1d_backward");
    require(cache.normalized.same_shape(grad_out), "batchnorm1d_backward: cache missing");
    BatchNormGrads res;
    res.grad_input = Tensor(grad_out.shape());
    res.grad_gamma = Tensor::zeros({d.c});
    res.grad_beta = Tensor::zeros({d.c});
    const double* go = grad_out.data();
    const double* xh = cache.normalized.data();
    double* gi = res.grad_input.data();
    double M = static_cast<double>(d.n * d.l);
    for (std::size_t c = 0; c < d.c; ++c) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t n = 0; n < d.n; ++n) {
            const double* grow = go + (n * d.c + c) * d.l;
            const double* xrow = xh + (n * d.c + c) * d.l;
            for (std::size_t t = 0; t < d.l; ++t) {
                sum_g += grow[t];
                sum_gx += grow[t] * xrow[t];
            }
        }
        res.grad_beta[c] = sum_g;
        res.grad_gamma[c] = sum_gx;
        double scale = gamma[c] * cache.inv_std[c];
        for (std::size_t n = 0; n < d.n; ++n) {
            const double* grow = go + (n * d.c + c) * d.l;
            const double* xrow = xh + (n * d.c + c) * d.l;
            double* grad = gi + (n * d.c + c) * d.l;
            for (std::size_t t = 0; t < d.l; ++t) {
                grad[t] = scale * (grow[t] - sum_g / M - xrow[t] * sum_gx / M);
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Activations (elementwise; softmax is over the last dimension).
// ---------------------------------------------------------------------------

inline double selu_scalar(double x) {
    return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * (std::exp(x) - 1.0);
}

inline Tensor selu(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = selu_scalar(input[i]);
    return out;
}

inline Tensor selu_backward(const Tensor& grad_out, const Tensor& cached_input) {
    require(grad_out.same_shape(cached_input), "selu_backward: shape mismatch");
    Tensor grad(grad_out.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        double x = cached_input[i];
        double d = x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
        grad[i] = grad_out[i] * d;
    }
    return grad;
}

inline Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0 ? input[i] : 0.0;
    return out;
}

inline Tensor relu_backward(const Tensor& grad_out, const Tensor& cached_input) {
    Tensor grad(grad_out.shape());
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad[i] = cached_input[i] > 0.0 ? grad_out[i] : 0.0;
    return grad;
}

/// Softmax over the last dimension of a rank-1 or rank-2 tensor.
inline Tensor softmax(const Tensor& input) {
    require(input.rank() >= 1 && input.rank() <= 2, "softmax: expected rank 1 or 2");
    std::size_t rows = input.rank() == 2 ? input.dim(0) : 1;
    std::size_t cols = input.rank() == 2 ? input.dim(1) : input.dim(0);
    Tensor out(input.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = input.data() + r * cols;
        double* y = out.data() + r * cols;
        double mx = x[0];
        for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        for (std::size_t j = 0; j < cols; ++j) y[j] /= sum;
    }
    return out;
}

inline Tensor softmax_backward(const Tensor& grad_out, const Tensor& cached_output) {
    std::size_t rows = cached_output.rank() == 2 ? cached_output.dim(0) : 1;
    std::size_t cols = cached_output.rank() == 2 ? cached_output.dim(1) : cached_output.dim(0);
    Tensor grad(grad_out.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* g = grad_out.data() + r * cols;
        const double* y = cached_output.data() + r * cols;
        double dotgy = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dotgy += g[j] * y[j];
        double* o = grad.data() + r * cols;
        for (std::size_t j = 0; j < cols; ++j) o[j] = y[j] * (g[j] - dotgy);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// dense: affine map on (D) or (N, D). Weights are (out_dim, in_dim).
// ---------------------------------------------------------------------------

inline Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    require(weights.rank() == 2, "dense_forward: weights must be (out, in)");
    std::size_t out_dim = weights.dim(0), in_dim = weights.dim(1);
    require(bias.size() == out_dim, "dense_forward: bias size mismatch");
    std::size_t rows = input.rank() == 2 ? input.dim(0) : 1;
    std::size_t cols = input.rank() == 2 ? input.dim(1) : input.dim(0);
    require(cols == in_dim, "dense_forward: input dim " + std::to_string(cols) +
                                " != weight in dim " + std::to_string(in_dim));
    Tensor out(input.rank() == 2 ? std::vector<std::size_t>{rows, out_dim}
                                 : std::vector<std::size_t>{out_dim});
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = input.data() + r * in_dim;
        double* y = out.data() + r * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double* w = weights.data() + o * in_dim;
            y[o] = bias[o] + detail::dot_n(w, x, in_dim);
        }
    }
    return out;
}

struct DenseGrads {
    Tensor grad_input;
    Tensor grad_weights;
    Tensor grad_bias;
};

inline DenseGrads dense_backward(const Tensor& grad_out, const Tensor& cached_input,
                                 const Tensor& weights) {
    std::size_t out_dim = weights.dim(0), in_dim = weights.dim(1);
    std::size_t rows = cached_input.rank() == 2 ? cached_input.dim(0) : 1;
    DenseGrads res;
    res.grad_input = Tensor::zeros(cached_input.shape());
    res.grad_weights = Tensor::zeros(weights.shape());
    res.grad_bias = Tensor::zeros({out_dim});
    for (std::size_t r = 0; r < rows; ++r) {
        const double* g = grad_out.data() + r * out_dim;
        const double* x = cached_input.data() + r * in_dim;
        double* gx = res.grad_input.data() + r * in_dim;
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double* w = weights.data() + o * in_dim;
            double* gw = res.grad_weights.data() + o * in_dim;
            double go = g[o];
            res.grad_bias[o] += go;
            for (std::size_t j = 0; j < in_dim; ++j) {
                gw[j] += go * x[j];
                gx[j] += go * w[j];
            }
        }
    }
    return res;
}

}  // namespace huf
