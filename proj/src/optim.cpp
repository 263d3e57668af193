#include "c2l/optim.hpp"

#include <cmath>

namespace c2l {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (learning_rate < 0.0) throw ConfigError("train config: learning_rate must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("train config: beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train config: beta2 must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("train config: adam_eps must be > 0");
    if (weight_decay < 0.0) throw ConfigError("train config: weight_decay must be >= 0");
    if (seeds.empty()) throw ConfigError("train config: need at least one seed");
    if (train_stride < 1 || val_stride < 1) throw ConfigError("train config: strides must be >= 1");
}

void adamw_step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
                OptimState& state, const TrainConfig& cfg) {
    if (params.size() != grads.size()) {
        throw ShapeError("adamw_step: " + std::to_string(params.size()) + " parameters vs " +
                         std::to_string(grads.size()) + " gradients");
    }
    if (state.m.empty()) {
        state.m.reserve(params.size());
        state.v.reserve(params.size());
        for (const Mat* p : params) {
            state.m.push_back(Mat::Zero(p->rows(), p->cols()));
            state.v.push_back(Mat::Zero(p->rows(), p->cols()));
        }
    }
    if (state.m.size() != params.size()) {
        throw ShapeError("adamw_step: optimizer state tracks " +
                         std::to_string(state.m.size()) + " tensors, got " +
                         std::to_string(params.size()));
    }

    state.step += 1;
    const Scalar t = static_cast<Scalar>(state.step);
    const Scalar bias1 = 1.0 - std::pow(cfg.beta1, t);
    const Scalar bias2 = 1.0 - std::pow(cfg.beta2, t);

    for (std::size_t k = 0; k < params.size(); ++k) {
        Mat& p = *params[k];
        const Mat& g = *grads[k];
        require_same_shape(p, g, "adamw_step");
        require_same_shape(p, state.m[k], "adamw_step(state)");

        if (cfg.weight_decay != 0.0) {
            p *= (1.0 - cfg.learning_rate * cfg.weight_decay);
        }
        state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
        state.v[k] = cfg.beta2 * state.v[k].array().matrix() +
                     (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const auto m_hat = state.m[k].array() / bias1;
        const auto v_hat = state.v[k].array() / bias2;
        p.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
    }
}

} // namespace c2l
