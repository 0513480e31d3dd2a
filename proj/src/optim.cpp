#include "poseidon/optim.hpp"

#include <cmath>

namespace poseidon {

void OptimizerConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("optimizer: learning_rate must be > 0");
    if (adadelta_rho <= 0.0 || adadelta_rho >= 1.0) {
        throw ConfigError("optimizer: adadelta_rho must be in (0,1)");
    }
    if (adadelta_eps <= 0.0) throw ConfigError("optimizer: adadelta_eps must be > 0");
    if (minibatch_size < 1) throw ConfigError("optimizer: minibatch_size must be >= 1");
    if (halve_every_epochs < 1) throw ConfigError("optimizer: halve_every_epochs must be >= 1");
}

double sgd_lr(const OptimizerConfig& cfg, int epoch) {
    return cfg.learning_rate * std::pow(2.0, -static_cast<double>(epoch / cfg.halve_every_epochs));
}

namespace {

void check_keys(const ModelState& state, const Grads& grads) {
    if (grads.g.size() != state.params.size()) {
        throw ShapeError("optimizer: gradient set has " + std::to_string(grads.g.size()) +
                         " layers, parameters have " + std::to_string(state.params.size()));
    }
    for (size_t i = 0; i < state.params.size(); ++i) {
        if (state.params[i].empty() != grads.g[i].empty()) {
            throw ShapeError("optimizer: missing gradient for layer " + std::to_string(i));
        }
    }
}

void ensure_slots(ModelState& state) {
    if (!state.slot_grad_sq.empty()) return;
    state.slot_grad_sq.resize(state.params.size());
    state.slot_upd_sq.resize(state.params.size());
    for (size_t i = 0; i < state.params.size(); ++i) {
        if (!state.params[i].empty()) {
            state.slot_grad_sq[i].weights = Tensor(state.params[i].weights.shape());
            state.slot_grad_sq[i].bias = Tensor(state.params[i].bias.shape());
            state.slot_upd_sq[i].weights = Tensor(state.params[i].weights.shape());
            state.slot_upd_sq[i].bias = Tensor(state.params[i].bias.shape());
        }
    }
}

void adadelta_apply(Tensor& p, const Tensor& g, Tensor& eg2, Tensor& edx2, double rho,
                    double eps) {
    const std::int64_t n = p.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const double gi = g[i];
        eg2[i] = rho * eg2[i] + (1.0 - rho) * gi * gi;
        const double dx = -std::sqrt((edx2[i] + eps) / (eg2[i] + eps)) * gi;
        edx2[i] = rho * edx2[i] + (1.0 - rho) * dx * dx;
        p[i] += dx;
    }
}

} // namespace

void sgd_step(ModelState& state, const Grads& grads, const OptimizerConfig& cfg, int epoch) {
    check_keys(state, grads);
    const double lr = sgd_lr(cfg, epoch);
    for (size_t i = 0; i < state.params.size(); ++i) {
        if (state.params[i].empty()) continue;
        add_scaled(state.params[i].weights, grads.g[i].weights, -lr);
        add_scaled(state.params[i].bias, grads.g[i].bias, -lr);
    }
}

void adadelta_step(ModelState& state, const Grads& grads, const OptimizerConfig& cfg) {
    check_keys(state, grads);
    ensure_slots(state);
    for (size_t i = 0; i < state.params.size(); ++i) {
        if (state.params[i].empty()) continue;
        adadelta_apply(state.params[i].weights, grads.g[i].weights, state.slot_grad_sq[i].weights,
                       state.slot_upd_sq[i].weights, cfg.adadelta_rho, cfg.adadelta_eps);
        adadelta_apply(state.params[i].bias, grads.g[i].bias, state.slot_grad_sq[i].bias,
                       state.slot_upd_sq[i].bias, cfg.adadelta_rho, cfg.adadelta_eps);
    }
}

void optimizer_step(ModelState& state, const Grads& grads, const OptimizerConfig& cfg,
                    int epoch) {
    if (cfg.kind == OptimizerConfig::Kind::SGD) {
        sgd_step(state, grads, cfg, epoch);
    } else {
        adadelta_step(state, grads, cfg);
    }
}

} // namespace poseidon
