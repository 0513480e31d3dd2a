#include "poseidon/arch.hpp"

#include <cmath>
#include <cstring>

#include "poseidon/rng.hpp"

namespace poseidon {

NetworkSpec build_locnet() {
    NetworkSpec s;
    s.name = "locnet";
    s.input_shape = {1, 132, 160};
    auto& L = s.layers;
    const int filters[4] = {16, 32, 32, 64};
    const int kernels[4] = {5, 3, 3, 3};
    for (int i = 0; i < 4; ++i) {
        L.push_back(LayerKind::conv2d(filters[i], kernels[i], kernels[i], 1, kernels[i] / 2));
        L.push_back(LayerKind::tanh_act());
        L.push_back(LayerKind::maxpool2x2());
    }
    L.push_back(LayerKind::flatten());
    L.push_back(LayerKind::dense(128));
    L.push_back(LayerKind::tanh_act());
    L.push_back(LayerKind::dropout(0.5));
    L.push_back(LayerKind::dense(64));
    L.push_back(LayerKind::tanh_act());
    L.push_back(LayerKind::dropout(0.5));
    L.push_back(LayerKind::dense(2));
    L.push_back(LayerKind::tanh_act());
    s.validate();
    return s;
}

NetworkSpec build_branch_net(int in_channels) {
    if (in_channels != 1 && in_channels != 2) {
        throw ConfigError("build_branch_net: in_channels must be 1 or 2");
    }
    NetworkSpec s;
    s.name = "branch" + std::to_string(in_channels) + "ch";
    s.input_shape = {in_channels, 64, 64};
    auto& L = s.layers;
    const int filters[5] = {32, 32, 32, 32, 128};
    const int kernels[5] = {5, 4, 3, 3, 3};
    for (int i = 0; i < 5; ++i) {
        // padding keeps sizes workable; the even 4x4 kernel shrinks by one
        L.push_back(LayerKind::conv2d(filters[i], kernels[i], kernels[i], 1,
                                      kernels[i] == 4 ? 1 : kernels[i] / 2));
        L.push_back(LayerKind::tanh_act());
        if (i < 3) L.push_back(LayerKind::maxpool2x2());
    }
    L.push_back(LayerKind::flatten());
    L.push_back(LayerKind::dense(128));
    L.push_back(LayerKind::tanh_act());
    L.push_back(LayerKind::dense(84));
    L.push_back(LayerKind::tanh_act());
    L.push_back(LayerKind::dense(3));
    L.push_back(LayerKind::tanh_act());
    s.validate();
    return s;
}

NetworkSpec build_ffd_net() {
    NetworkSpec s;
    s.name = "ffd";
    s.input_shape = {1, 64, 64};
    auto& L = s.layers;
    // coding phase: valid convs 1-2 with explicit zero padding, pool after 2
    L.push_back(LayerKind::conv2d(32, 3, 3, 1, 0));
    L.push_back(LayerKind::tanh_act());
    L.push_back(LayerKind::zeropad(1, 1));
    L.push_back(LayerKind::conv2d(32, 3, 3, 1, 0));
    L.push_back(LayerKind::tanh_act());
    L.push_back(LayerKind::zeropad(1, 1));
    L.push_back(LayerKind::maxpool2x2());
    for (int i = 0; i < 5; ++i) { // convs 3-7
        L.push_back(LayerKind::conv2d(32, 3, 3, 1, 1));
        L.push_back(LayerKind::tanh_act());
    }
    // decoding phase: convs 8-13, upsample, conv 14 down to one channel
    for (int i = 0; i < 6; ++i) {
        L.push_back(LayerKind::conv2d(32, 3, 3, 1, 1));
        L.push_back(LayerKind::tanh_act());
    }
    L.push_back(LayerKind::upsample2x2());
    L.push_back(LayerKind::conv2d(1, 3, 3, 1, 1));
    L.push_back(LayerKind::tanh_act());
    // final fully connected layer emits the output image
    L.push_back(LayerKind::flatten());
    L.push_back(LayerKind::dense(64 * 64));
    L.push_back(LayerKind::tanh_act());
    s.validate();
    return s;
}

FusionKind fusion_kind_from_string(const std::string& s) {
    if (s == "mul") return FusionKind::Multiplication;
    if (s == "concat") return FusionKind::Concatenation;
    if (s == "conv") return FusionKind::Convolution;
    if (s == "conv+concat") return FusionKind::ConvThenConcat;
    if (s == "mul+concat") return FusionKind::MulThenConcat;
    throw ConfigError("unknown fusion kind '" + s +
                      "' (expected mul|concat|conv|conv+concat|mul+concat)");
}

std::string fusion_kind_to_string(FusionKind k) {
    switch (k) {
        case FusionKind::Multiplication: return "mul";
        case FusionKind::Concatenation: return "concat";
        case FusionKind::Convolution: return "conv";
        case FusionKind::ConvThenConcat: return "conv+concat";
        case FusionKind::MulThenConcat: return "mul+concat";
    }
    return "?";
}

namespace {

void require_spatial_match(const Tensor& a, const Tensor& b) {
    if (a.order() != 3 || b.order() != 3) {
        throw ShapeError("fuse: operands must be (channels,rows,cols)");
    }
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
        throw ShapeError("fuse: spatial dims differ, " + Tensor::shape_str(a.shape()) + " vs " +
                         Tensor::shape_str(b.shape()));
    }
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_spatial_match(a, b);
    Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::memcpy(out.data(), a.data(), sizeof(double) * static_cast<size_t>(a.numel()));
    std::memcpy(out.data() + a.numel(), b.data(), sizeof(double) * static_cast<size_t>(b.numel()));
    return out;
}

Tensor slice_channels(const Tensor& t, int from, int count) {
    Tensor out({count, t.dim(1), t.dim(2)});
    const std::int64_t plane = static_cast<std::int64_t>(t.dim(1)) * t.dim(2);
    std::memcpy(out.data(), t.data() + from * plane,
                sizeof(double) * static_cast<size_t>(count * plane));
    return out;
}

Tensor elementwise_mul(const Tensor& a, const Tensor& b) {
    require_spatial_match(a, b);
    if (a.dim(0) != b.dim(0)) {
        throw ShapeError("fuse: multiplication needs equal channel counts, got " +
                         std::to_string(a.dim(0)) + " and " + std::to_string(b.dim(0)));
    }
    Tensor out(a.shape());
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
    return out;
}

LayerParams make_fusion_conv(int in_ch, int out_ch, Rng& rng) {
    LayerParams p;
    const double limit = std::sqrt(6.0 / (in_ch + out_ch));
    p.weights = Tensor({out_ch, in_ch, 1, 1});
    for (std::int64_t i = 0; i < p.weights.numel(); ++i) p.weights[i] = rng.uniform(-limit, limit);
    p.bias = Tensor({out_ch});
    return p;
}

} // namespace

int fused_channels(int da, int db, FusionKind kind) {
    switch (kind) {
        case FusionKind::Multiplication:
            if (da != db) {
                throw ShapeError("fuse: multiplication needs equal channel counts, got " +
                                 std::to_string(da) + " and " + std::to_string(db));
            }
            return da;
        case FusionKind::Concatenation:
            return da + db;
        case FusionKind::Convolution:
            if ((da + db) % 2 != 0) {
                throw ShapeError("fuse: convolution fusion needs an even channel sum, got " +
                                 std::to_string(da + db));
            }
            return (da + db) / 2;
        default:
            throw ConfigError("fuse: " + fusion_kind_to_string(kind) +
                              " is a trident-level combination, not a binary operator");
    }
}

Tensor fuse(const Tensor& a, const Tensor& b, FusionKind kind, const LayerParams* conv_params) {
    switch (kind) {
        case FusionKind::Multiplication:
            return elementwise_mul(a, b);
        case FusionKind::Concatenation:
            return concat_channels(a, b);
        case FusionKind::Convolution: {
            const int out_ch = fused_channels(a.dim(0), b.dim(0), kind);
            const Tensor stacked = concat_channels(a, b);
            if (conv_params == nullptr || conv_params->empty()) {
                throw ConfigError("fuse: convolution fusion needs 1x1 conv parameters");
            }
            if (conv_params->weights.dim(0) != out_ch ||
                conv_params->weights.dim(1) != a.dim(0) + b.dim(0)) {
                throw ShapeError("fuse: conv parameters are " +
                                 Tensor::shape_str(conv_params->weights.shape()) + ", expected (" +
                                 std::to_string(out_ch) + "x" +
                                 std::to_string(a.dim(0) + b.dim(0)) + "x1x1)");
            }
            return conv2d_forward(stacked, conv_params->weights, conv_params->bias, 1, 0);
        }
        default:
            throw ConfigError("fuse: " + fusion_kind_to_string(kind) +
                              " is a trident-level combination, not a binary operator");
    }
}

int trident_fused_channels(int ch, FusionKind kind) {
    switch (kind) {
        case FusionKind::Multiplication: return ch;
        case FusionKind::Concatenation: return 3 * ch;
        case FusionKind::Convolution: return ch; // two folded pairwise convs
        case FusionKind::ConvThenConcat: return 2 * ch;
        case FusionKind::MulThenConcat: return 2 * ch;
    }
    throw ConfigError("unknown fusion kind");
}

Tensor trident_fuse_forward(const TridentModel& m, const std::array<Tensor, 3>& maps,
                            TridentFuseTrace* trace) {
    const Tensor& d = maps[0];
    const Tensor& f = maps[1];
    const Tensor& mo = maps[2];
    switch (m.fusion) {
        case FusionKind::Multiplication:
            return elementwise_mul(elementwise_mul(d, f), mo);
        case FusionKind::Concatenation:
            return concat_channels(concat_channels(d, f), mo);
        case FusionKind::Convolution: {
            // fold left: conv(depth, ffd) then conv(result, motion)
            Tensor s0 = concat_channels(d, f);
            Tensor t0 = conv2d_forward(s0, m.fusion_convs[0].weights, m.fusion_convs[0].bias, 1, 0);
            Tensor s1 = concat_channels(t0, mo);
            Tensor out =
                conv2d_forward(s1, m.fusion_convs[1].weights, m.fusion_convs[1].bias, 1, 0);
            if (trace) {
                trace->stacked0 = std::move(s0);
                trace->stacked1 = std::move(s1);
            }
            return out;
        }
        case FusionKind::ConvThenConcat: {
            // the depth stream joins both fused pairs
            Tensor s0 = concat_channels(d, f);
            Tensor s1 = concat_channels(d, mo);
            Tensor t0 = conv2d_forward(s0, m.fusion_convs[0].weights, m.fusion_convs[0].bias, 1, 0);
            Tensor t1 = conv2d_forward(s1, m.fusion_convs[1].weights, m.fusion_convs[1].bias, 1, 0);
            Tensor out = concat_channels(t0, t1);
            if (trace) {
                trace->stacked0 = std::move(s0);
                trace->stacked1 = std::move(s1);
            }
            return out;
        }
        case FusionKind::MulThenConcat:
            return concat_channels(elementwise_mul(d, f), elementwise_mul(d, mo));
    }
    throw ConfigError("unknown fusion kind");
}

void trident_fuse_backward(const TridentModel& m, const TridentFuseTrace& trace,
                           const Tensor& grad_fused, std::vector<LayerParams>& fusion_grads) {
    if (m.fusion_convs.empty()) return; // mul/concat fusions carry no parameters
    if (fusion_grads.size() != m.fusion_convs.size()) {
        throw ShapeError("trident_fuse_backward: gradient buffers not initialized");
    }
    if (m.fusion == FusionKind::Convolution) {
        Conv2dGrads g1 =
            conv2d_backward(grad_fused, trace.stacked1, m.fusion_convs[1].weights, 1, 0);
        add_scaled(fusion_grads[1].weights, g1.grad_weights, 1.0);
        add_scaled(fusion_grads[1].bias, g1.grad_bias, 1.0);
        const int ch = m.fusion_convs[0].weights.dim(0);
        Tensor grad_t0 = slice_channels(g1.grad_input, 0, ch);
        Conv2dGrads g0 = conv2d_backward(grad_t0, trace.stacked0, m.fusion_convs[0].weights, 1, 0);
        add_scaled(fusion_grads[0].weights, g0.grad_weights, 1.0);
        add_scaled(fusion_grads[0].bias, g0.grad_bias, 1.0);
        return;
    }
    if (m.fusion == FusionKind::ConvThenConcat) {
        const int ch = m.fusion_convs[0].weights.dim(0);
        Tensor gy0 = slice_channels(grad_fused, 0, ch);
        Tensor gy1 = slice_channels(grad_fused, ch, grad_fused.dim(0) - ch);
        Conv2dGrads g0 = conv2d_backward(gy0, trace.stacked0, m.fusion_convs[0].weights, 1, 0);
        Conv2dGrads g1 = conv2d_backward(gy1, trace.stacked1, m.fusion_convs[1].weights, 1, 0);
        add_scaled(fusion_grads[0].weights, g0.grad_weights, 1.0);
        add_scaled(fusion_grads[0].bias, g0.grad_bias, 1.0);
        add_scaled(fusion_grads[1].weights, g1.grad_weights, 1.0);
        add_scaled(fusion_grads[1].bias, g1.grad_bias, 1.0);
        return;
    }
}

std::array<double, 3> TridentModel::predict(const Tensor& depth_in, const Tensor& ffd_in,
                                            const Tensor& motion_in) const {
    std::array<Tensor, 3> maps = {
        poseidon::predict(branch_specs[0], branch_states[0], depth_in),
        poseidon::predict(branch_specs[1], branch_states[1], ffd_in),
        poseidon::predict(branch_specs[2], branch_states[2], motion_in),
    };
    Tensor fused = trident_fuse_forward(*this, maps, nullptr);
    Tensor out = poseidon::predict(head_spec, head_state, fused);
    return {out[0], out[1], out[2]};
}

TridentModel assemble_poseidon(const std::array<NetworkSpec, 3>& branch_specs,
                               const std::array<ModelState, 3>& branch_states, FusionKind kind,
                               std::uint64_t seed) {
    TridentModel m;
    m.fusion = kind;
    for (int b = 0; b < 3; ++b) {
        const NetworkSpec& full = branch_specs[b];
        size_t cut = full.layers.size();
        for (size_t i = 0; i < full.layers.size(); ++i) {
            if (full.layers[i].op == LayerOp::Flatten) {
                cut = i;
                break;
            }
        }
        if (cut == full.layers.size()) {
            throw ShapeError("assemble_poseidon: branch '" + full.name +
                             "' has no flatten/FC stage to truncate at");
        }
        NetworkSpec trunc;
        trunc.name = full.name + "-trunk";
        trunc.input_shape = full.input_shape;
        trunc.layers.assign(full.layers.begin(), full.layers.begin() + cut);
        trunc.validate();
        m.branch_specs[b] = std::move(trunc);
        ModelState st;
        st.params.assign(branch_states[b].params.begin(), branch_states[b].params.begin() + cut);
        m.branch_states[b] = std::move(st);
    }

    const auto s0 = m.branch_specs[0].output_shape();
    for (int b = 1; b < 3; ++b) {
        const auto sb = m.branch_specs[b].output_shape();
        if (sb[1] != s0[1] || sb[2] != s0[2]) {
            throw ShapeError("assemble_poseidon: branch feature maps disagree, " +
                             Tensor::shape_str(s0) + " vs " + Tensor::shape_str(sb));
        }
        if (sb[0] != s0[0]) {
            throw ShapeError("assemble_poseidon: branch channel counts disagree");
        }
    }

    const int ch = s0[0];
    Rng rng(seed_mix(seed, "fusion"));
    if (kind == FusionKind::Convolution || kind == FusionKind::ConvThenConcat) {
        m.fusion_convs.push_back(make_fusion_conv(2 * ch, ch, rng));
        m.fusion_convs.push_back(make_fusion_conv(2 * ch, ch, rng));
    }

    NetworkSpec head;
    head.name = "poseidon-head";
    head.input_shape = {trident_fused_channels(ch, kind), s0[1], s0[2]};
    head.layers.push_back(LayerKind::flatten());
    head.layers.push_back(LayerKind::dense(128));
    head.layers.push_back(LayerKind::tanh_act());
    head.layers.push_back(LayerKind::dropout(0.5));
    head.layers.push_back(LayerKind::dense(84));
    head.layers.push_back(LayerKind::tanh_act());
    head.layers.push_back(LayerKind::dropout(0.5));
    head.layers.push_back(LayerKind::dense(3));
    head.layers.push_back(LayerKind::tanh_act());
    head.validate();
    m.head_state = init_state(head, seed_mix(seed, "head"));
    m.head_spec = std::move(head);
    return m;
}

} // namespace poseidon
