#pragma once

#include <cmath>

#include "huf/errors.hpp"
#include "huf/param_store.hpp"

namespace huf {

enum class OptAlgo { sgd, adam };

struct OptimizerConfig {
    OptAlgo algorithm = OptAlgo::adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Applies one update to every non-frozen entry. Frozen entries are left
/// bit-identical and their optimizer state is not advanced.
inline void optimizer_step(ParamStore& store, const OptimizerConfig& cfg) {
    if (cfg.lr <= 0.0) throw ConfigError("optimizer: lr must be positive");
    for (auto& e : store.entries()) {
        if (e.frozen) continue;
        switch (cfg.algorithm) {
            case OptAlgo::sgd:
                for (std::size_t i = 0; i < e.value.size(); ++i) {
                    e.value[i] -= cfg.lr * e.grad[i];
                }
                break;
            case OptAlgo::adam: {
                e.steps += 1;
                double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(e.steps));
                double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(e.steps));
                for (std::size_t i = 0; i < e.value.size(); ++i) {
                    double g = e.grad[i];
                    e.adam_m[i] = cfg.beta1 * e.adam_m[i] + (1.0 - cfg.beta1) * g;
                    e.adam_v[i] = cfg.beta2 * e.adam_v[i] + (1.0 - cfg.beta2) * g * g;
                    double m_hat = e.adam_m[i] / bc1;
                    double v_hat = e.adam_v[i] / bc2;
                    e.value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
                }
                break;
            }
        }
        if (!e.value.all_finite()) {
            throw NumericError("optimizer: non-finite parameter after update of " + e.name);
        }
    }
}

}  // namespace huf
