#pragma once

#include <cmath>
#include <vector>

#include "huf/errors.hpp"
#include "huf/layers.hpp"
#include "huf/tensor.hpp"

namespace huf {

struct LossResult {
    double value = 0.0;
    Tensor grad;  // d loss / d prediction, same shape as the prediction
};

/// Mean of squared differences over all elements.
inline LossResult mse_loss(const Tensor& pred, const Tensor& target) {
    require(pred.same_shape(target), "mse_loss: shape mismatch " + pred.shape_str() + " vs " +
                                         target.shape_str());
    if (pred.size() == 0) throw ShapeError("mse_loss: empty tensors");
    LossResult res;
    res.grad = Tensor(pred.shape());
    double inv_n = 1.0 / static_cast<double>(pred.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - target[i];
        acc += d * d;
        res.grad[i] = 2.0 * d * inv_n;
    }
    res.value = acc * inv_n;
    return res;
}

/// Softmax + negative log-likelihood, averaged over the batch.
/// logits: (C) with one label, or (N, C) with N labels.
inline LossResult cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels) {
    std::size_t rows = logits.rank() == 2 ? logits.dim(0) : 1;
    std::size_t classes = logits.rank() == 2 ? logits.dim(1) : logits.dim(0);
    if (classes == 0 || logits.size() == 0) throw ShapeError("cross_entropy_loss: empty logits");
    require(labels.size() == rows, "cross_entropy_loss: label count != batch size");
    for (int lab : labels) {
        if (lab < 0 || static_cast<std::size_t>(lab) >= classes) {
            throw DataError("cross_entropy_loss: label out of range");
        }
    }
    Tensor probs = softmax(logits);
    LossResult res;
    res.grad = Tensor(logits.shape());
    double inv_n = 1.0 / static_cast<double>(rows);
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* p = probs.data() + r * classes;
        double* g = res.grad.data() + r * classes;
        std::size_t lab = static_cast<std::size_t>(labels[r]);
        acc -= std::log(std::max(p[lab], 1e-300));
        for (std::size_t c = 0; c < classes; ++c) {
            g[c] = (p[c] - (c == lab ? 1.0 : 0.0)) * inv_n;
        }
    }
    res.value = acc * inv_n;
    return res;
}

}  // namespace huf
