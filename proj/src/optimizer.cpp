#include "irnn/optimizer.hpp"

#include <cmath>
#include <string>

namespace irnn {

void adam_step(AdamState& state, std::span<double> param, std::span<const double> grad) {
    if (param.size() != grad.size() || param.size() != state.m.size()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "adam_step: parameter (" + std::to_string(param.size()) + "), gradient (" +
                        std::to_string(grad.size()) + ") and state (" +
                        std::to_string(state.m.size()) + ") sizes differ");
    }
    const AdamSettings& s = state.settings;
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(s.beta1, t);
    const double correction2 = 1.0 - std::pow(s.beta2, t);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        state.m[i] = s.beta1 * state.m[i] + (1.0 - s.beta1) * g;
        state.v[i] = s.beta2 * state.v[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        param[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
}

BlockAdam::BlockAdam(const Model& model, AdamSettings settings) {
    for_each_block(model, [&](auto, auto, auto, std::span<const double> v) {
        states_.emplace_back(v.size(), settings);
    });
}

void BlockAdam::step(Model& model, const Model& grads) {
    if (model.index() != grads.index()) {
        throw Error(ErrorCode::dimension_mismatch, "gradient architecture differs from model");
    }
    std::vector<std::span<const double>> grad_blocks;
    for_each_block(grads, [&](auto, auto, auto, std::span<const double> v) {
        grad_blocks.push_back(v);
    });
    std::size_t b = 0;
    for_each_block(model, [&](auto, auto, auto, std::span<double> v) {
        adam_step(states_.at(b), v, grad_blocks.at(b));
        ++b;
    });
}

}  // namespace irnn
