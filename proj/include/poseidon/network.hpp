#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poseidon/layers.hpp"
#include "poseidon/tensor.hpp"

namespace poseidon {

/// Declarative layer sequence. Shape composition is checked by validate();
/// builders call it before returning.
struct NetworkSpec {
    std::string name;
    std::vector<int> input_shape; // (channels, rows, cols) or (n)
    std::vector<LayerKind> layers;

    void validate() const;
    std::vector<int> output_shape() const;
    int output_dim() const;

    static std::vector<int> shape_after(const LayerKind& layer, const std::vector<int>& in);
};

struct LayerParams {
    Tensor weights;
    Tensor bias;
    bool empty() const { return weights.numel() == 0; }
};

/// Learned parameters plus optimizer slots, indexed by layer.
struct ModelState {
    std::vector<LayerParams> params;
    std::vector<LayerParams> slot_grad_sq; // Adadelta E[g^2], allocated lazily
    std::vector<LayerParams> slot_upd_sq;  // Adadelta E[dx^2]
    bool training = false;

    bool all_finite() const;
};

/// Gradients keyed identically to ModelState::params.
struct Grads {
    std::vector<LayerParams> g;

    void init_like(const ModelState& state);
    void zero();
    void scale_all(double s);
};

// Glorot-uniform initialization, deterministic in `seed`.
ModelState init_state(const NetworkSpec& spec, std::uint64_t seed);

/// Saved activations for exact reverse-mode differentiation of one forward
/// pass.
struct Tape {
    struct LayerTrace {
        Tensor saved;                      // input (conv/dense), output (tanh), mask (dropout)
        std::vector<std::int32_t> argmax;  // maxpool routing
        std::vector<int> in_shape;
    };
    const NetworkSpec* spec = nullptr;
    const ModelState* state = nullptr;
    std::vector<LayerTrace> traces;
    Tensor input;
    Tensor output;
};

// Runs the network; the tape holds what backward() needs. Dropout draws
// from rng_seed (mixed with the layer index), so a fixed seed gives a
// reproducible mask.
std::pair<Tensor, Tape> forward(const NetworkSpec& spec, const ModelState& state,
                                const Tensor& input, bool training, std::uint64_t rng_seed = 0);

// Inference-only forward without tape bookkeeping.
Tensor predict(const NetworkSpec& spec, const ModelState& state, const Tensor& input);

// Accumulates parameter gradients into `accum` (+=) and returns the
// gradient with respect to the network input.
Tensor backward(const Tape& tape, const Tensor& loss_grad, Grads& accum);

// Convenience wrapper allocating a fresh Grads.
std::pair<Grads, Tensor> backward(const Tape& tape, const Tensor& loss_grad);

// FNV-1a over the raw parameter bytes; used to prove freezing.
std::uint64_t param_hash(const ModelState& state);

} // namespace poseidon
