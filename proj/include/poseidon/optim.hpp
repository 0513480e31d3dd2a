#pragma once

#include "poseidon/network.hpp"

namespace poseidon {

struct OptimizerConfig {
    enum class Kind { SGD, Adadelta };

    Kind kind = Kind::SGD;
    double learning_rate = 0.1;
    int halve_every_epochs = 15;
    double adadelta_rho = 0.95;
    double adadelta_eps = 1e-6;
    int minibatch_size = 32;

    void validate() const;
};

// lr(epoch) = lr0 * 2^(-floor(epoch / halve_every_epochs))
double sgd_lr(const OptimizerConfig& cfg, int epoch);

// p <- p - lr(epoch) * g
void sgd_step(ModelState& state, const Grads& grads, const OptimizerConfig& cfg, int epoch);

// Standard Adadelta: running averages of squared gradients and squared
// updates with decay rho, update = -RMS(dx)/RMS(g) * g.
void adadelta_step(ModelState& state, const Grads& grads, const OptimizerConfig& cfg);

void optimizer_step(ModelState& state, const Grads& grads, const OptimizerConfig& cfg, int epoch);

} // namespace poseidon
