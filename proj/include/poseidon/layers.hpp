#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poseidon/tensor.hpp"

namespace poseidon {

enum class LayerOp {
    Conv2D,
    MaxPool2x2,
    UpSample2x2,
    ZeroPad,
    Dense,
    Tanh,
    Dropout,
    Flatten,
};

/// One layer of a network description. Exactly the inventory the three
/// networks need; hyperparameters are validated on construction.
struct LayerKind {
    LayerOp op = LayerOp::Tanh;
    int out_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    int stride = 1;
    int padding = 0;
    int pad_rows = 0;
    int pad_cols = 0;
    int out_units = 0;
    double rate = 0.0;

    static LayerKind conv2d(int out_channels, int kernel_h, int kernel_w, int stride = 1,
                            int padding = 0);
    static LayerKind maxpool2x2();
    static LayerKind upsample2x2();
    static LayerKind zeropad(int rows, int cols);
    static LayerKind dense(int out_units);
    static LayerKind tanh_act();
    static LayerKind dropout(double rate);
    static LayerKind flatten();

    bool has_params() const { return op == LayerOp::Conv2D || op == LayerOp::Dense; }
    std::string describe() const;
};

// ---- layer primitives -------------------------------------------------
//
// Image tensors are (channels, rows, cols). Cross-correlation semantics
// (no kernel flip). Output spatial dims follow
//   out = floor((in + 2*padding - kernel) / stride) + 1.

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
                      int padding);

struct Conv2dGrads {
    Tensor grad_input;
    Tensor grad_weights;
    Tensor grad_bias;
};

Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& saved_input,
                            const Tensor& weights, int stride, int padding);

// 2x2 max pooling with floor semantics: odd trailing rows/cols are dropped.
struct MaxPoolResult {
    Tensor output;
    std::vector<std::int32_t> argmax; // flat input index per output element
};

MaxPoolResult maxpool2x2_forward(const Tensor& input);
Tensor maxpool2x2_backward(const Tensor& grad_out, const std::vector<std::int32_t>& argmax,
                           const std::vector<int>& input_shape);

// Nearest-neighbour 2x replication of both spatial dims.
Tensor upsample2x2(const Tensor& input);
Tensor upsample2x2_backward(const Tensor& grad_out);

Tensor zeropad(const Tensor& input, int rows, int cols);
Tensor zeropad_backward(const Tensor& grad_out, int rows, int cols);

// y = W x + b with W of shape (out, in); input of any shape is flattened.
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct DenseGrads {
    Tensor grad_input;
    Tensor grad_weights;
    Tensor grad_bias;
};

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& saved_input,
                          const Tensor& weights);

Tensor tanh_forward(const Tensor& input);
// Uses the saved forward output: d/dx tanh = 1 - y^2.
Tensor tanh_backward(const Tensor& grad_out, const Tensor& saved_output);

// Inverted dropout: at train time each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); inference is the identity.
struct DropoutResult {
    Tensor output;
    Tensor mask; // per-element multiplier (0 or 1/(1-rate))
};

DropoutResult dropout_forward(const Tensor& input, double rate, std::uint64_t rng_seed,
                              bool training);
Tensor dropout_backward(const Tensor& grad_out, const Tensor& mask);

int conv_out_dim(int in, int kernel, int stride, int padding);

} // namespace poseidon
