#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "huf/layers.hpp"
#include "huf/losses.hpp"
#include "huf/rng.hpp"

using huf::Padding;
using huf::Tensor;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, huf::Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

}  // namespace

TEST_CASE("conv1d identity and differencing kernels") {
    // single-tap identity kernel
    Tensor x({1, 3}, {1, 2, 3});
    Tensor k({1, 1, 1}, {1.0});
    Tensor b = Tensor::zeros({1});
    Tensor y = huf::conv1d_forward(x, k, b, 1, Padding::valid);
    CHECK(y.shape() == std::vector<std::size_t>{1, 3});
    for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(x[i]));

    // differencing a constant
    Tensor xc({1, 4}, {1, 1, 1, 1});
    Tensor kd({1, 1, 2}, {1.0, -1.0});
    Tensor yd = huf::conv1d_forward(xc, kd, b, 1, Padding::valid);
    CHECK(yd.shape() == std::vector<std::size_t>{1, 3});
    for (std::size_t i = 0; i < 3; ++i) CHECK(yd[i] == doctest::Approx(0.0));
}

TEST_CASE("conv1d same padding matches the sliding-dot-product oracle") {
    Tensor x({1, 4}, {1, 2, 3, 4});
    Tensor k({1, 1, 3}, {1.0, 0.0, -1.0});
    Tensor b = Tensor::zeros({1});
    Tensor y = huf::conv1d_forward(x, k, b, 1, Padding::same);
    Tensor expect = oracle::conv_direct(x, k, b, 1, 1, 2);
    REQUIRE(y.shape() == expect.shape());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(expect[i]));
    CHECK(y.dim(1) == 4);  // same padding, stride 1 preserves length
}

TEST_CASE("conv1d agrees with the oracle across random configurations") {
    huf::Rng rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t c_in = 1 + rng.below(3), c_out = 1 + rng.below(3);
        std::size_t K = 1 + rng.below(4);
        std::size_t L = K + rng.below(10);
        std::size_t stride = 1 + rng.below(2);
        Padding pad = rng.below(2) ? Padding::same : Padding::valid;
        Tensor x = random_tensor({c_in, L}, rng);
        Tensor k = random_tensor({c_out, c_in, K}, rng);
        Tensor b = random_tensor({c_out}, rng);
        Tensor got = huf::conv1d_forward(x, k, b, stride, pad);
        Tensor expect = oracle::conv_direct(x, k, b, stride, huf::pad_left(pad, K),
                                            huf::pad_total(pad, K));
        REQUIRE(got.shape() == expect.shape());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv1d rejects mismatched shapes") {
    Tensor x({2, 5});
    Tensor k({1, 3, 3});  // kernel expects 3 input channels
    Tensor b = Tensor::zeros({1});
    CHECK_THROWS_AS(huf::conv1d_forward(x, k, b, 1, Padding::valid), huf::ShapeError);
    Tensor k2({1, 2, 7});  // kernel longer than input, valid padding
    CHECK_THROWS_AS(huf::conv1d_forward(x, k2, Tensor::zeros({1}), 1, Padding::valid),
                    huf::ShapeError);
}

TEST_CASE("conv1d backward: trivial cases") {
    huf::Rng rng(7);
    Tensor x = random_tensor({2, 6}, rng);
    Tensor k = random_tensor({3, 2, 3}, rng);
    Tensor b = Tensor::zeros({3});
    Tensor y = huf::conv1d_forward(x, k, b, 1, Padding::valid);

    // zero grad_out -> all gradients zero
    auto g0 = huf::conv1d_backward(Tensor::zeros(y.shape()), x, k, 1, Padding::valid);
    for (std::size_t i = 0; i < g0.grad_input.size(); ++i) CHECK(g0.grad_input[i] == 0.0);
    for (std::size_t i = 0; i < g0.grad_kernels.size(); ++i) CHECK(g0.grad_kernels[i] == 0.0);
    for (std::size_t i = 0; i < g0.grad_bias.size(); ++i) CHECK(g0.grad_bias[i] == 0.0);

    // identity kernel -> grad_input == grad_out
    Tensor ki({1, 1, 1}, {1.0});
    Tensor xi = random_tensor({1, 5}, rng);
    Tensor go = random_tensor({1, 5}, rng);
    auto gi = huf::conv1d_backward(go, xi, ki, 1, Padding::valid);
    for (std::size_t i = 0; i < go.size(); ++i) CHECK(gi.grad_input[i] == doctest::Approx(go[i]));
}

namespace {

// Finite-difference check of conv-style backward passes under an MSE
// loss against a fixed random target.
template <typename Forward, typename Backward>
void check_conv_grads(Forward fwd, Backward bwd, Tensor x, Tensor k, Tensor b, huf::Rng& rng,
                      double tol) {
    Tensor y0 = fwd(x, k, b);
    Tensor target = random_tensor(y0.shape(), rng);
    auto loss_of = [&](const Tensor& xx, const Tensor& kk, const Tensor& bb) {
        return huf::mse_loss(fwd(xx, kk, bb), target).value;
    };
    huf::LossResult base = huf::mse_loss(y0, target);
    auto grads = bwd(base.grad, x, k);

    double h = 1e-5;
    double worst = 0.0;
    auto probe = [&](Tensor& t, const Tensor& analytic) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            double saved = t[i];
            t[i] = saved + h;
            double lp = loss_of(x, k, b);
            t[i] = saved - h;
            double lm = loss_of(x, k, b);
            t[i] = saved;
            double numeric = (lp - lm) / (2 * h);
            worst = std::max(worst, oracle::rel_err(analytic[i], numeric));
        }
    };
    probe(x, grads.grad_input);
    probe(k, grads.grad_kernels);
    // bias gradient: grad_bias sums grad_out
    for (std::size_t i = 0; i < b.size(); ++i) {
        double saved = b[i];
        b[i] = saved + h;
        double lp = loss_of(x, k, b);
        b[i] = saved - h;
        double lm = loss_of(x, k, b);
        b[i] = saved;
        worst = std::max(worst, oracle::rel_err(grads.grad_bias[i], (lp - lm) / (2 * h)));
    }
    CHECK(worst < tol);
}

}  // namespace

TEST_CASE("conv1d backward matches finite differences") {
    huf::Rng rng(202);
    for (int trial = 0; trial < 6; ++trial) {
        std::size_t c_in = 1 + rng.below(3), c_out = 1 + rng.below(3);
        std::size_t K = 3;
        std::size_t L = K + rng.below(6);
        std::size_t stride = 1 + rng.below(2);
        Padding pad = rng.below(2) ? Padding::same : Padding::valid;
        Tensor x = random_tensor({c_in, L}, rng);
        Tensor k = random_tensor({c_out, c_in, K}, rng);
        Tensor b = random_tensor({c_out}, rng);
        check_conv_grads(
            [&](const Tensor& xx, const Tensor& kk, const Tensor& bb) {
                return huf::conv1d_forward(xx, kk, bb, stride, pad);
            },
            [&](const Tensor& go, const Tensor& xx, const Tensor& kk) {
                return huf::conv1d_backward(go, xx, kk, stride, pad);
            },
            x, k, b, rng, 1e-6);
    }
}

TEST_CASE("conv1d_transpose: identity, length formula, adjointness") {
    // single-tap kernel, stride 1 -> identity
    Tensor x({1, 4}, {1, 2, 3, 4});
    Tensor k({1, 1, 1}, {1.0});
    Tensor y = huf::conv1d_transpose_forward(x, k, Tensor::zeros({1}), 1, Padding::valid);
    REQUIRE(y.shape() == x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]));

    // stride 2, K=3, L_in=4, no padding -> L_out = 9
    Tensor k3({1, 1, 3}, {1.0, 1.0, 1.0});
    Tensor y3 = huf::conv1d_transpose_forward(x, k3, Tensor::zeros({1}), 2, Padding::valid);
    CHECK(y3.dim(1) == 9);

    // adjoint: <conv(x), y> == <x, convT(y)> within 1e-9
    huf::Rng rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t c_in = 1 + rng.below(3), c_out = 1 + rng.below(3);
        std::size_t K = 1 + rng.below(4);
        std::size_t L = K + rng.below(8);
        std::size_t stride = 1 + rng.below(2);
        Padding pad = rng.below(2) ? Padding::same : Padding::valid;
        Tensor w = random_tensor({c_out, c_in, K}, rng);
        Tensor zb_out = Tensor::zeros({c_out});
        Tensor zb_in = Tensor::zeros({c_in});
        Tensor xx = random_tensor({c_in, L}, rng);
        Tensor cx = huf::conv1d_forward(xx, w, zb_out, stride, pad);
        Tensor yy = random_tensor(cx.shape(), rng);
        // strided convs ignore tail samples; out_pad restores the domain
        std::size_t base_len = huf::conv_transpose_out_len(cx.dim(1), K, stride, pad);
        Tensor cty = huf::conv1d_transpose_forward(yy, w, zb_in, stride, pad, L - base_len);
        REQUIRE(cty.shape() == xx.shape());
        CHECK(std::fabs(huf::dot(cx, yy) - huf::dot(xx, cty)) < 1e-9);
    }
}

TEST_CASE("conv1d_transpose backward matches finite differences") {
    huf::Rng rng(404);
    for (int trial = 0; trial < 5; ++trial) {
        std::size_t c_in = 1 + rng.below(3), c_out = 1 + rng.below(3);
        std::size_t K = 1 + rng.below(3);
        std::size_t L = 2 + rng.below(5);
        std::size_t stride = 1 + rng.below(2);
        Tensor x = random_tensor({c_in, L}, rng);
        Tensor k = random_tensor({c_in, c_out, K}, rng);
        Tensor b = random_tensor({c_out}, rng);
        check_conv_grads(
            [&](const Tensor& xx, const Tensor& kk, const Tensor& bb) {
                return huf::conv1d_transpose_forward(xx, kk, bb, stride, Padding::valid);
            },
            [&](const Tensor& go, const Tensor& xx, const Tensor& kk) {
                return huf::conv1d_transpose_backward(go, xx, kk, stride, Padding::valid);
            },
            x, k, b, rng, 1e-6);
    }
}

TEST_CASE("maxpool1d forward examples and tie handling") {
    Tensor x({1, 8}, {1, 3, 2, 5, 4, 0, 1, 2});
    auto res = huf::maxpool1d_forward(x, 4, 2);
    auto expect = oracle::pool_direct({1, 3, 2, 5, 4, 0, 1, 2}, 4, 2);
    REQUIRE(res.output.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(res.output[i] == doctest::Approx(expect[i]));
    CHECK(res.output[0] == doctest::Approx(5));
    CHECK(res.output[1] == doctest::Approx(5));
    CHECK(res.output[2] == doctest::Approx(4));

    // constant input -> constant output
    Tensor c = Tensor::full({1, 6}, 2.5);
    auto rc = huf::maxpool1d_forward(c, 3, 2);
    for (std::size_t i = 0; i < rc.output.size(); ++i) CHECK(rc.output[i] == doctest::Approx(2.5));
    // ties break toward the lowest index
    CHECK(rc.argmax[0] == 0);
    CHECK(rc.argmax[1] == 2);

    // pool 1, stride 1 -> identity
    auto ri = huf::maxpool1d_forward(x, 1, 1);
    REQUIRE(ri.output.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(ri.output[i] == doctest::Approx(x[i]));

    CHECK_THROWS_AS(huf::maxpool1d_forward(Tensor({1, 3}), 4, 1), huf::ShapeError);
}

TEST_CASE("maxpool1d backward routes gradients to argmax positions") {
    Tensor x({1, 6}, {1, 9, 2, 3, 8, 0});
    auto res = huf::maxpool1d_forward(x, 2, 2);  // maxima at 1, 3, 4
    Tensor go({1, 3}, {1.0, 2.0, 3.0});
    Tensor gi = huf::maxpool1d_backward(go, res.argmax, x.shape());
    CHECK(gi[1] == doctest::Approx(1.0));
    CHECK(gi[3] == doctest::Approx(2.0));
    CHECK(gi[4] == doctest::Approx(3.0));
    CHECK(gi[0] == 0.0);
    CHECK(gi[2] == 0.0);
    CHECK(gi[5] == 0.0);
}

TEST_CASE("batchnorm1d normalizes per channel and honors gamma/beta") {
    huf::Rng rng(505);
    double eps = 1e-9;

    // constant channel -> output ~ 0
    Tensor xc = Tensor::full({2, 1, 4}, 3.0);
    Tensor gamma = Tensor::full({1}, 1.0), beta = Tensor::zeros({1});
    Tensor rm = Tensor::zeros({1}), rv = Tensor::full({1}, 1.0);
    Tensor yc = huf::batchnorm1d_forward(xc, gamma, beta, eps, true, rm, rv, 0.9);
    for (std::size_t i = 0; i < yc.size(); ++i) CHECK(std::fabs(yc[i]) < 1e-3);

    // gamma = 0 -> output == beta
    Tensor x = random_tensor({3, 2, 5}, rng);
    Tensor g0 = Tensor::zeros({2}), b2({2}, {0.5, -1.5});
    Tensor rm2 = Tensor::zeros({2}), rv2 = Tensor::full({2}, 1.0);
    Tensor y0 = huf::batchnorm1d_forward(x, g0, b2, eps, true, rm2, rv2, 0.9);
    for (std::size_t n = 0; n < 3; ++n)
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t t = 0; t < 5; ++t) CHECK(y0(n, c, t) == doctest::Approx(b2[c]));

    // random batch: output stats match beta / gamma^2 (direct oracle)
    Tensor xb = random_tensor({4, 3, 6}, rng);
    for (std::size_t i = 0; i < xb.size(); ++i) xb[i] *= 2.0;
    Tensor gb({3}, {1.3, 0.7, -0.4}), bb({3}, {0.1, -0.2, 0.3});
    Tensor rm3 = Tensor::zeros({3}), rv3 = Tensor::full({3}, 1.0);
    Tensor yb = huf::batchnorm1d_forward(xb, gb, bb, eps, true, rm3, rv3, 0.9);
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t t = 0; t < 6; ++t) mean += yb(n, c, t);
        mean /= 24.0;
        double var = 0.0;
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t t = 0; t < 6; ++t) var += (yb(n, c, t) - mean) * (yb(n, c, t) - mean);
        var /= 24.0;
        CHECK(std::fabs(mean - bb[c]) < 1e-9);
        CHECK(std::fabs(var - gb[c] * gb[c]) < 1e-6);
    }

    CHECK_THROWS_AS(
        huf::batchnorm1d_forward(xb, gb, bb, 0.0, true, rm3, rv3, 0.9), huf::ConfigError);
}

TEST_CASE("batchnorm1d inference uses running statistics") {
    Tensor x({1, 1, 4}, {10.0, 12.0, 8.0, 10.0});
    Tensor gamma = Tensor::full({1}, 1.0), beta = Tensor::zeros({1});
    Tensor rm({1}, {10.0}), rv({1}, {4.0});
    Tensor y = huf::batchnorm1d_forward(x, gamma, beta, 1e-12, false, rm, rv, 0.9);
    CHECK(y[0] == doctest::Approx(0.0));
    CHECK(y[1] == doctest::Approx(1.0));
    CHECK(y[2] == doctest::Approx(-1.0));
    // running stats untouched in inference mode
    CHECK(rm[0] == doctest::Approx(10.0));
    CHECK(rv[0] == doctest::Approx(4.0));
}

TEST_CASE("selu values, limit, and linearity bound") {
    CHECK(huf::selu_scalar(0.0) == doctest::Approx(0.0));
    CHECK(huf::selu_scalar(1.0) == doctest::Approx(huf::kSeluLambda));

    // approaches -lambda*alpha from above; monotone where the tail is
    // still representable in double precision
    double floor = -huf::kSeluLambda * huf::kSeluAlpha;
    CHECK(huf::selu_scalar(-50.0) >= floor);
    CHECK(huf::selu_scalar(-50.0) == doctest::Approx(floor).epsilon(1e-12));
    double prev = huf::selu_scalar(-30.0);
    CHECK(prev > floor);
    for (double x = -29.5; x < 5.0; x += 0.5) {
        double v = huf::selu_scalar(x);
        CHECK(v > prev);
        CHECK(v > floor);
        prev = v;
    }

    // exactly linear on (0, 1)
    for (double x = 0.01; x < 1.0; x += 0.01) {
        CHECK(huf::selu_scalar(x) == huf::kSeluLambda * x);
    }
    // On (-1, 0) the deviation from the tangent at 0- (slope lambda*alpha)
    // equals lambda*alpha*(|x| - 1 + e^{-|x|}) pointwise.
    for (double x = -0.99; x < 0.0; x += 0.01) {
        double dev = std::fabs(huf::selu_scalar(x) -
                               huf::kSeluLambda * huf::kSeluAlpha * x);
        double bound = huf::kSeluLambda * huf::kSeluAlpha *
                       (std::fabs(x) - 1.0 + std::exp(-std::fabs(x)));
        CHECK(dev <= bound + 1e-12);
        CHECK(dev == doctest::Approx(bound).epsilon(1e-9));
    }
}

TEST_CASE("selu backward matches finite differences") {
    huf::Rng rng(606);
    Tensor x = random_tensor({10}, rng);
    Tensor go = Tensor::full({10}, 1.0);
    Tensor gi = huf::selu_backward(go, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double numeric = oracle::central_diff(
            [&](double v) { return huf::selu_scalar(v); }, x[i]);
        CHECK(oracle::rel_err(gi[i], numeric) < 1e-6);
    }
}

TEST_CASE("dense forward and backward") {
    // identity weights, zero bias -> unchanged
    Tensor w({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor b = Tensor::zeros({3});
    Tensor x({3}, {1.5, -2.0, 0.25});
    Tensor y = huf::dense_forward(x, w, b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(x[i]));

    // zero weights -> bias
    Tensor wz = Tensor::zeros({2, 3});
    Tensor bz({2}, {0.7, -0.3});
    Tensor yz = huf::dense_forward(x, wz, bz);
    CHECK(yz[0] == doctest::Approx(0.7));
    CHECK(yz[1] == doctest::Approx(-0.3));

    CHECK_THROWS_AS(huf::dense_forward(Tensor({4}), w, b), huf::ShapeError);

    // finite differences on a random batch case
    huf::Rng rng(707);
    Tensor xb = random_tensor({2, 4}, rng);
    Tensor wr = random_tensor({3, 4}, rng);
    Tensor br = random_tensor({3}, rng);
    Tensor target = random_tensor({2, 3}, rng);
    auto loss_of = [&]() {
        return huf::mse_loss(huf::dense_forward(xb, wr, br), target).value;
    };
    auto base = huf::mse_loss(huf::dense_forward(xb, wr, br), target);
    auto grads = huf::dense_backward(base.grad, xb, wr);
    double h = 1e-5, worst = 0.0;
    auto probe = [&](Tensor& t, const Tensor& analytic) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            double saved = t[i];
            t[i] = saved + h;
            double lp = loss_of();
            t[i] = saved - h;
            double lm = loss_of();
            t[i] = saved;
            worst = std::max(worst, oracle::rel_err(analytic[i], (lp - lm) / (2 * h)));
        }
    };
    probe(xb, grads.grad_input);
    probe(wr, grads.grad_weights);
    probe(br, grads.grad_bias);
    CHECK(worst < 1e-6);
}

TEST_CASE("losses: mse and cross entropy") {
    huf::Rng rng(808);
    Tensor x = random_tensor({2, 5}, rng);
    CHECK(huf::mse_loss(x, x).value == doctest::Approx(0.0));
    CHECK_THROWS_AS(huf::mse_loss(x, Tensor({2, 4})), huf::ShapeError);

    // uniform logits over C classes -> ln C
    for (std::size_t C : {2, 5, 7}) {
        Tensor logits = Tensor::full({C}, 0.42);
        auto ce = huf::cross_entropy_loss(logits, {0});
        CHECK(ce.value == doctest::Approx(std::log(static_cast<double>(C))));
    }
    CHECK_THROWS_AS(huf::cross_entropy_loss(Tensor::full({3}, 0.0), {5}), huf::DataError);

    // CE gradient vs finite differences on 5 random logits
    Tensor logits = random_tensor({5}, rng);
    auto base = huf::cross_entropy_loss(logits, {2});
    double h = 1e-5, worst = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        double saved = logits[i];
        logits[i] = saved + h;
        double lp = huf::cross_entropy_loss(logits, {2}).value;
        logits[i] = saved - h;
        double lm = huf::cross_entropy_loss(logits, {2}).value;
        logits[i] = saved;
        worst = std::max(worst, oracle::rel_err(base.grad[i], (lp - lm) / (2 * h)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("length formulas hold on an exhaustive small grid") {
    for (std::size_t L = 1; L <= 32; ++L) {
        for (std::size_t K = 1; K <= 7; ++K) {
            for (std::size_t stride = 1; stride <= 3; ++stride) {
                for (Padding pad : {Padding::valid, Padding::same}) {
                    std::size_t pt = huf::pad_total(pad, K);
                    if (K > L + pt) continue;
                    CHECK(huf::conv_out_len(L, K, stride, pad) ==
                          oracle::conv_len_enum(L, K, stride, pt));
                }
                if (K <= L) {
                    CHECK(huf::pool_out_len(L, K, stride) ==
                          oracle::pool_len_enum(L, K, stride));
                    CHECK(huf::pool_out_len(L, K, stride) ==
                          oracle::pool_direct(std::vector<double>(L, 0.0), K, stride).size());
                }
            }
        }
    }
    // pool on exact-fit length -> a single output
    CHECK(huf::pool_out_len(4, 4, 2) == 1);
}

TEST_CASE("transpose length is the smallest preimage of the conv length") {
    // conv_transpose_out_len(L') must be the least L with
    // conv_len_enum(L) == L' (strided convs drop tail samples, and the
    // transpose reconstructs the shortest input that explains L').
    for (std::size_t K = 1; K <= 7; ++K) {
        for (std::size_t stride = 1; stride <= 3; ++stride) {
            for (huf::Padding pad : {huf::Padding::valid, huf::Padding::same}) {
                std::size_t pt = huf::pad_total(pad, K);
                for (std::size_t L_in = 1; L_in <= 24; ++L_in) {
                    std::size_t L_out = huf::conv_transpose_out_len(L_in, K, stride, pad);
                    std::size_t smallest = 0;
                    for (std::size_t L = 1; L <= 128; ++L) {
                        if (K > L + pt) continue;
                        if (oracle::conv_len_enum(L, K, stride, pt) == L_in) {
                            smallest = L;
                            break;
                        }
                    }
                    if (smallest == 0) continue;  // padding exceeds the minimal output
                    CHECK(L_out == smallest);
                }
            }
        }
    }
}

TEST_CASE("softmax rows sum to one and backward matches finite differences") {
    huf::Rng rng(909);
    Tensor x = random_tensor({3, 4}, rng);
    Tensor y = huf::softmax(x);
    for (std::size_t r = 0; r < 3; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 4; ++c) s += y(r, c);
        CHECK(s == doctest::Approx(1.0));
    }
    // scalar objective: weighted sum of softmax outputs
    Tensor wts = random_tensor({3, 4}, rng);
    auto objective = [&](const Tensor& logits) {
        Tensor p = huf::softmax(logits);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += wts[i] * p[i];
        return s;
    };
    Tensor grad = huf::softmax_backward(wts, y);
    double h = 1e-6, worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double saved = x[i];
        x[i] = saved + h;
        double lp = objective(x);
        x[i] = saved - h;
        double lm = objective(x);
        x[i] = saved;
        worst = std::max(worst, oracle::rel_err(grad[i], (lp - lm) / (2 * h)));
    }
    CHECK(worst < 1e-4);
}
