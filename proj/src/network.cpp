#include "poseidon/network.hpp"

#include <cmath>
#include <cstring>

#include "poseidon/rng.hpp"

namespace poseidon {

std::vector<int> NetworkSpec::shape_after(const LayerKind& layer, const std::vector<int>& in) {
    auto need_image = [&](const char* what) {
        if (in.size() != 3) {
            throw ShapeError(std::string(what) + ": needs (channels,rows,cols) input, got " +
                             Tensor::shape_str(in));
        }
    };
    switch (layer.op) {
        case LayerOp::Conv2D: {
            need_image("conv2d");
            const int oh = conv_out_dim(in[1], layer.kernel_h, layer.stride, layer.padding);
            const int ow = conv_out_dim(in[2], layer.kernel_w, layer.stride, layer.padding);
            if (oh <= 0 || ow <= 0) {
                throw ShapeError("conv2d: output dims collapse for input " + Tensor::shape_str(in));
            }
            return {layer.out_channels, oh, ow};
        }
        case LayerOp::MaxPool2x2: {
            need_image("maxpool2x2");
            if (in[1] / 2 == 0 || in[2] / 2 == 0) {
                throw ShapeError("maxpool2x2: input too small " + Tensor::shape_str(in));
            }
            return {in[0], in[1] / 2, in[2] / 2};
        }
        case LayerOp::UpSample2x2:
            need_image("upsample2x2");
            return {in[0], in[1] * 2, in[2] * 2};
        case LayerOp::ZeroPad:
            need_image("zeropad");
            return {in[0], in[1] + 2 * layer.pad_rows, in[2] + 2 * layer.pad_cols};
        case LayerOp::Dense:
            return {layer.out_units};
        case LayerOp::Tanh:
        case LayerOp::Dropout:
            return in;
        case LayerOp::Flatten: {
            int n = 1;
            for (int d : in) n *= d;
            return {n};
        }
    }
    throw ShapeError("unknown layer");
}

void NetworkSpec::validate() const {
    if (input_shape.empty()) throw ShapeError(name + ": empty input shape");
    std::vector<int> shape = input_shape;
    for (size_t i = 0; i < layers.size(); ++i) {
        try {
            shape = shape_after(layers[i], shape);
        } catch (const Error& e) {
            throw ShapeError(name + ": layer " + std::to_string(i) + " (" +
                             layers[i].describe() + "): " + e.what());
        }
    }
}

std::vector<int> NetworkSpec::output_shape() const {
    std::vector<int> shape = input_shape;
    for (const auto& l : layers) shape = shape_after(l, shape);
    return shape;
}

int NetworkSpec::output_dim() const {
    int n = 1;
    for (int d : output_shape()) n *= d;
    return n;
}

bool ModelState::all_finite() const {
    for (const auto& p : params) {
        if (!p.weights.all_finite() || !p.bias.all_finite()) return false;
    }
    return true;
}

void Grads::init_like(const ModelState& state) {
    g.resize(state.params.size());
    for (size_t i = 0; i < state.params.size(); ++i) {
        if (state.params[i].empty()) {
            g[i] = LayerParams{};
        } else {
            g[i].weights = Tensor(state.params[i].weights.shape());
            g[i].bias = Tensor(state.params[i].bias.shape());
        }
    }
}

void Grads::zero() {
    for (auto& p : g) {
        if (!p.empty()) {
            fill(p.weights, 0.0);
            fill(p.bias, 0.0);
        }
    }
}

void Grads::scale_all(double s) {
    for (auto& p : g) {
        if (!p.empty()) {
            scale(p.weights, s);
            scale(p.bias, s);
        }
    }
}

ModelState init_state(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    ModelState state;
    state.params.resize(spec.layers.size());
    std::vector<int> shape = spec.input_shape;
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerKind& l = spec.layers[i];
        if (l.op == LayerOp::Conv2D) {
            const int fan_in = shape[0] * l.kernel_h * l.kernel_w;
            const int fan_out = l.out_channels * l.kernel_h * l.kernel_w;
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            Rng rng(seed_mix(seed, i));
            Tensor w({l.out_channels, shape[0], l.kernel_h, l.kernel_w});
            for (std::int64_t k = 0; k < w.numel(); ++k) w[k] = rng.uniform(-limit, limit);
            state.params[i].weights = std::move(w);
            state.params[i].bias = Tensor({l.out_channels});
        } else if (l.op == LayerOp::Dense) {
            int in_n = 1;
            for (int d : shape) in_n *= d;
            const double limit = std::sqrt(6.0 / (in_n + l.out_units));
            Rng rng(seed_mix(seed, i));
            Tensor w({l.out_units, in_n});
            for (std::int64_t k = 0; k < w.numel(); ++k) w[k] = rng.uniform(-limit, limit);
            state.params[i].weights = std::move(w);
            state.params[i].bias = Tensor({l.out_units});
        }
        shape = NetworkSpec::shape_after(l, shape);
    }
    return state;
}

std::pair<Tensor, Tape> forward(const NetworkSpec& spec, const ModelState& state,
                                const Tensor& input, bool training, std::uint64_t rng_seed) {
    if (input.shape() != spec.input_shape) {
        throw ShapeError(spec.name + ": input " + Tensor::shape_str(input.shape()) +
                         " does not match declared " + Tensor::shape_str(spec.input_shape));
    }
    if (state.params.size() != spec.layers.size()) {
        throw ShapeError(spec.name + ": state has " + std::to_string(state.params.size()) +
                         " layers, spec has " + std::to_string(spec.layers.size()));
    }
    Tape tape;
    tape.spec = &spec;
    tape.state = &state;
    tape.input = input;
    tape.traces.resize(spec.layers.size());

    Tensor x = input;
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerKind& l = spec.layers[i];
        Tape::LayerTrace& tr = tape.traces[i];
        switch (l.op) {
            case LayerOp::Conv2D: {
                tr.saved = x;
                x = conv2d_forward(x, state.params[i].weights, state.params[i].bias, l.stride,
                                   l.padding);
                break;
            }
            case LayerOp::MaxPool2x2: {
                tr.in_shape = x.shape();
                MaxPoolResult r = maxpool2x2_forward(x);
                tr.argmax = std::move(r.argmax);
                x = std::move(r.output);
                break;
            }
            case LayerOp::UpSample2x2:
                x = upsample2x2(x);
                break;
            case LayerOp::ZeroPad:
                x = zeropad(x, l.pad_rows, l.pad_cols);
                break;
            case LayerOp::Dense: {
                tr.in_shape = x.shape();
                Tensor flat = x.order() == 1 ? x : x.reshaped({static_cast<int>(x.numel())});
                tr.saved = flat;
                x = dense_forward(flat, state.params[i].weights, state.params[i].bias);
                break;
            }
            case LayerOp::Tanh:
                x = tanh_forward(x);
                tr.saved = x;
                break;
            case LayerOp::Dropout: {
                DropoutResult r =
                    dropout_forward(x, l.rate, seed_mix(rng_seed, i), training);
                tr.saved = std::move(r.mask);
                x = std::move(r.output);
                break;
            }
            case LayerOp::Flatten:
                tr.in_shape = x.shape();
                x = x.reshaped({static_cast<int>(x.numel())});
                break;
        }
    }
    tape.output = x;
    return {std::move(x), std::move(tape)};
}

Tensor predict(const NetworkSpec& spec, const ModelState& state, const Tensor& input) {
    return forward(spec, state, input, false).first;
}

Tensor backward(const Tape& tape, const Tensor& loss_grad, Grads& accum) {
    const NetworkSpec& spec = *tape.spec;
    const ModelState& state = *tape.state;
    if (accum.g.size() != spec.layers.size()) {
        throw ShapeError(spec.name + ": gradient accumulator not initialized for this network");
    }
    require_same_shape(loss_grad, tape.output, "backward loss_grad");

    Tensor g = loss_grad;
    for (size_t ii = spec.layers.size(); ii-- > 0;) {
        const LayerKind& l = spec.layers[ii];
        const Tape::LayerTrace& tr = tape.traces[ii];
        switch (l.op) {
            case LayerOp::Conv2D: {
                Conv2dGrads cg =
                    conv2d_backward(g, tr.saved, state.params[ii].weights, l.stride, l.padding);
                add_scaled(accum.g[ii].weights, cg.grad_weights, 1.0);
                add_scaled(accum.g[ii].bias, cg.grad_bias, 1.0);
                g = std::move(cg.grad_input);
                break;
            }
            case LayerOp::MaxPool2x2:
                g = maxpool2x2_backward(g, tr.argmax, tr.in_shape);
                break;
            case LayerOp::UpSample2x2:
                g = upsample2x2_backward(g);
                break;
            case LayerOp::ZeroPad:
                g = zeropad_backward(g, l.pad_rows, l.pad_cols);
                break;
            case LayerOp::Dense: {
                DenseGrads dg = dense_backward(g, tr.saved, state.params[ii].weights);
                add_scaled(accum.g[ii].weights, dg.grad_weights, 1.0);
                add_scaled(accum.g[ii].bias, dg.grad_bias, 1.0);
                g = dg.grad_input.reshaped(tr.in_shape);
                break;
            }
            case LayerOp::Tanh:
                g = tanh_backward(g, tr.saved);
                break;
            case LayerOp::Dropout:
                g = dropout_backward(g, tr.saved);
                break;
            case LayerOp::Flatten:
                g = g.reshaped(tr.in_shape);
                break;
        }
    }
    return g;
}

std::pair<Grads, Tensor> backward(const Tape& tape, const Tensor& loss_grad) {
    Grads grads;
    grads.init_like(*tape.state);
    Tensor gi = backward(tape, loss_grad, grads);
    return {std::move(grads), std::move(gi)};
}

std::uint64_t param_hash(const ModelState& state) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const Tensor& t) {
        const char* bytes = reinterpret_cast<const char*>(t.data());
        const size_t n = static_cast<size_t>(t.numel()) * sizeof(double);
        h = fnv1a64(std::string_view(bytes, n), h);
    };
    for (const auto& p : state.params) {
        if (!p.empty()) {
            feed(p.weights);
            feed(p.bias);
        }
    }
    return h;
}

} // namespace poseidon
