#include "poseidon/layers.hpp"

#include <cmath>
#include <cstring>

#include "poseidon/gemm.hpp"
#include "poseidon/parallel.hpp"
#include "poseidon/rng.hpp"

namespace poseidon {

LayerKind LayerKind::conv2d(int out_channels, int kernel_h, int kernel_w, int stride,
                            int padding) {
    if (out_channels <= 0 || kernel_h <= 0 || kernel_w <= 0 || stride <= 0 || padding < 0) {
        throw ConfigError("conv2d: non-positive hyperparameter");
    }
    LayerKind k;
    k.op = LayerOp::Conv2D;
    k.out_channels = out_channels;
    k.kernel_h = kernel_h;
    k.kernel_w = kernel_w;
    k.stride = stride;
    k.padding = padding;
    return k;
}

LayerKind LayerKind::maxpool2x2() {
    LayerKind k;
    k.op = LayerOp::MaxPool2x2;
    return k;
}

LayerKind LayerKind::upsample2x2() {
    LayerKind k;
    k.op = LayerOp::UpSample2x2;
    return k;
}

LayerKind LayerKind::zeropad(int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw ConfigError("zeropad: border must be positive");
    LayerKind k;
    k.op = LayerOp::ZeroPad;
    k.pad_rows = rows;
    k.pad_cols = cols;
    return k;
}

LayerKind LayerKind::dense(int out_units) {
    if (out_units <= 0) throw ConfigError("dense: unit count must be positive");
    LayerKind k;
    k.op = LayerOp::Dense;
    k.out_units = out_units;
    return k;
}

LayerKind LayerKind::tanh_act() {
    LayerKind k;
    k.op = LayerOp::Tanh;
    return k;
}

LayerKind LayerKind::dropout(double rate) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout: rate must be in [0,1)");
    LayerKind k;
    k.op = LayerOp::Dropout;
    k.rate = rate;
    return k;
}

LayerKind LayerKind::flatten() {
    LayerKind k;
    k.op = LayerOp::Flatten;
    return k;
}

std::string LayerKind::describe() const {
    switch (op) {
        case LayerOp::Conv2D:
            return "conv2d(" + std::to_string(out_channels) + "," + std::to_string(kernel_h) +
                   "x" + std::to_string(kernel_w) + ",s" + std::to_string(stride) + ",p" +
                   std::to_string(padding) + ")";
        case LayerOp::MaxPool2x2: return "maxpool2x2";
        case LayerOp::UpSample2x2: return "upsample2x2";
        case LayerOp::ZeroPad:
            return "zeropad(" + std::to_string(pad_rows) + "," + std::to_string(pad_cols) + ")";
        case LayerOp::Dense: return "dense(" + std::to_string(out_units) + ")";
        case LayerOp::Tanh: return "tanh";
        case LayerOp::Dropout: return "dropout(" + std::to_string(rate) + ")";
        case LayerOp::Flatten: return "flatten";
    }
    return "?";
}

int conv_out_dim(int in, int kernel, int stride, int padding) {
    return (in + 2 * padding - kernel) / stride + 1;
}

namespace {

void require_image(const Tensor& t, const char* what) {
    if (t.order() != 3) {
        throw ShapeError(std::string(what) + ": expected (channels,rows,cols), got " +
                         Tensor::shape_str(t.shape()));
    }
}

// im2col: input (C,H,W) -> matrix (C*kh*kw, oh*ow) for stride/padding.
void im2col(const Tensor& input, int kh, int kw, int stride, int padding, int oh, int ow,
            std::vector<double>& col) {
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::int64_t span = static_cast<std::int64_t>(oh) * ow;
    col.assign(static_cast<size_t>(c) * kh * kw * span, 0.0);
    const double* src = input.data();
    par::parallel_for(c, 1 + 64 / (kh * kw), [&](std::int64_t c0, std::int64_t c1) {
        for (std::int64_t ci = c0; ci < c1; ++ci) {
            const double* plane = src + ci * h * w;
            double* dst_base = col.data() + ci * kh * kw * span;
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    double* dst = dst_base + (static_cast<std::int64_t>(ky) * kw + kx) * span;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride - padding + ky;
                        double* drow = dst + static_cast<std::int64_t>(oy) * ow;
                        if (iy < 0 || iy >= h) continue; // stays zero
                        const double* srow = plane + static_cast<std::int64_t>(iy) * w;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride - padding + kx;
                            if (ix >= 0 && ix < w) drow[ox] = srow[ix];
                        }
                    }
                }
            }
        }
    });
}

// col2im: scatter-add of the column matrix back into an image.
void col2im(const std::vector<double>& col, int c, int h, int w, int kh, int kw, int stride,
            int padding, int oh, int ow, Tensor& out) {
    const std::int64_t span = static_cast<std::int64_t>(oh) * ow;
    double* dst = out.data();
    par::parallel_for(c, 1 + 64 / (kh * kw), [&](std::int64_t c0, std::int64_t c1) {
        for (std::int64_t ci = c0; ci < c1; ++ci) {
            double* plane = dst + ci * h * w;
            const double* src_base = col.data() + ci * kh * kw * span;
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    const double* src = src_base + (static_cast<std::int64_t>(ky) * kw + kx) * span;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride - padding + ky;
                        if (iy < 0 || iy >= h) continue;
                        const double* srow = src + static_cast<std::int64_t>(oy) * ow;
                        double* drow = plane + static_cast<std::int64_t>(iy) * w;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride - padding + kx;
                            if (ix >= 0 && ix < w) drow[ix] += srow[ox];
                        }
                    }
                }
            }
        }
    });
}

} // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
                      int padding) {
    require_image(input, "conv2d");
    if (weights.order() != 4) {
        throw ShapeError("conv2d: weights must be (out,in,kh,kw), got " +
                         Tensor::shape_str(weights.shape()));
    }
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int oc = weights.dim(0), wc = weights.dim(1), kh = weights.dim(2), kw = weights.dim(3);
    if (wc != c) {
        throw ShapeError("conv2d: input channel axis is " + std::to_string(c) +
                         " but weights expect " + std::to_string(wc));
    }
    if (bias.numel() != oc) {
        throw ShapeError("conv2d: bias axis 0 is " + std::to_string(bias.numel()) +
                         ", expected " + std::to_string(oc));
    }
    const int oh = conv_out_dim(h, kh, stride, padding);
    const int ow = conv_out_dim(w, kw, stride, padding);
    if (oh <= 0 || ow <= 0) {
        throw ShapeError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                         " does not fit input rows/cols " + Tensor::shape_str(input.shape()));
    }

    std::vector<double> col;
    im2col(input, kh, kw, stride, padding, oh, ow, col);

    Tensor out({oc, oh, ow});
    const std::int64_t span = static_cast<std::int64_t>(oh) * ow;
    gemm_nn(oc, span, static_cast<std::int64_t>(c) * kh * kw, weights.data(), col.data(),
            out.data(), false);
    double* o = out.data();
    for (int f = 0; f < oc; ++f) {
        const double b = bias[f];
        double* row = o + static_cast<std::int64_t>(f) * span;
        for (std::int64_t i = 0; i < span; ++i) row[i] += b;
    }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& saved_input,
                            const Tensor& weights, int stride, int padding) {
    require_image(grad_out, "conv2d_backward");
    require_image(saved_input, "conv2d_backward");
    const int c = saved_input.dim(0), h = saved_input.dim(1), w = saved_input.dim(2);
    const int oc = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    const int oh = conv_out_dim(h, kh, stride, padding);
    const int ow = conv_out_dim(w, kw, stride, padding);
    if (grad_out.dim(0) != oc || grad_out.dim(1) != oh || grad_out.dim(2) != ow) {
        throw ShapeError("conv2d_backward: grad_out " + Tensor::shape_str(grad_out.shape()) +
                         " does not match forward output (" + std::to_string(oc) + "x" +
                         std::to_string(oh) + "x" + std::to_string(ow) + ")");
    }

    Conv2dGrads g;
    const std::int64_t span = static_cast<std::int64_t>(oh) * ow;
    const std::int64_t kdim = static_cast<std::int64_t>(c) * kh * kw;

    // grad_bias: sum over spatial positions per filter
    g.grad_bias = Tensor({oc});
    for (int f = 0; f < oc; ++f) {
        const double* row = grad_out.data() + static_cast<std::int64_t>(f) * span;
        double acc = 0.0;
        for (std::int64_t i = 0; i < span; ++i) acc += row[i];
        g.grad_bias[f] = acc;
    }

    // grad_weights = grad_out (oc x span) * im2col^T (span x kdim)
    std::vector<double> col;
    im2col(saved_input, kh, kw, stride, padding, oh, ow, col);
    g.grad_weights = Tensor(weights.shape());
    gemm_nt(oc, kdim, span, grad_out.data(), col.data(), g.grad_weights.data(), false);

    // grad_input: col_grad = W^T (kdim x oc) * grad_out (oc x span), then col2im
    std::vector<double> col_grad(static_cast<size_t>(kdim) * span);
    gemm_tn(kdim, span, oc, weights.data(), grad_out.data(), col_grad.data(), false);
    g.grad_input = Tensor(saved_input.shape());
    col2im(col_grad, c, h, w, kh, kw, stride, padding, oh, ow, g.grad_input);
    return g;
}

MaxPoolResult maxpool2x2_forward(const Tensor& input) {
    require_image(input, "maxpool2x2");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int oh = h / 2, ow = w / 2; // odd trailing row/col dropped
    if (oh == 0 || ow == 0) {
        throw ShapeError("maxpool2x2: input rows/cols too small " +
                         Tensor::shape_str(input.shape()));
    }
    MaxPoolResult r;
    r.output = Tensor({c, oh, ow});
    r.argmax.resize(static_cast<size_t>(c) * oh * ow);
    const double* src = input.data();
    for (int ci = 0; ci < c; ++ci) {
        const double* plane = src + static_cast<std::int64_t>(ci) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const int iy = 2 * oy, ix = 2 * ox;
                std::int32_t best = static_cast<std::int32_t>(iy * w + ix);
                double bv = plane[best];
                const int cand[3] = {iy * w + ix + 1, (iy + 1) * w + ix, (iy + 1) * w + ix + 1};
                for (int t : cand) {
                    if (plane[t] > bv) {
                        bv = plane[t];
                        best = static_cast<std::int32_t>(t);
                    }
                }
                const std::int64_t oi = (static_cast<std::int64_t>(ci) * oh + oy) * ow + ox;
                r.output[oi] = bv;
                r.argmax[static_cast<size_t>(oi)] =
                    best + static_cast<std::int32_t>(ci * h * w);
            }
        }
    }
    return r;
}

Tensor maxpool2x2_backward(const Tensor& grad_out, const std::vector<std::int32_t>& argmax,
                           const std::vector<int>& input_shape) {
    Tensor g(input_shape);
    for (std::int64_t i = 0; i < grad_out.numel(); ++i) {
        g[argmax[static_cast<size_t>(i)]] += grad_out[i];
    }
    return g;
}

Tensor upsample2x2(const Tensor& input) {
    require_image(input, "upsample2x2");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    Tensor out({c, 2 * h, 2 * w});
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double v = input.at(ci, y, x);
                out.at(ci, 2 * y, 2 * x) = v;
                out.at(ci, 2 * y, 2 * x + 1) = v;
                out.at(ci, 2 * y + 1, 2 * x) = v;
                out.at(ci, 2 * y + 1, 2 * x + 1) = v;
            }
        }
    }
    return out;
}

Tensor upsample2x2_backward(const Tensor& grad_out) {
    require_image(grad_out, "upsample2x2_backward");
    const int c = grad_out.dim(0), h = grad_out.dim(1) / 2, w = grad_out.dim(2) / 2;
    Tensor g({c, h, w});
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                g.at(ci, y, x) = grad_out.at(ci, 2 * y, 2 * x) + grad_out.at(ci, 2 * y, 2 * x + 1) +
                                 grad_out.at(ci, 2 * y + 1, 2 * x) +
                                 grad_out.at(ci, 2 * y + 1, 2 * x + 1);
            }
        }
    }
    return g;
}

Tensor zeropad(const Tensor& input, int rows, int cols) {
    require_image(input, "zeropad");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    Tensor out({c, h + 2 * rows, w + 2 * cols});
    const int oh = h + 2 * rows, ow = w + 2 * cols;
    for (int ci = 0; ci < c; ++ci) {
        const double* src = input.data() + static_cast<std::int64_t>(ci) * h * w;
        double* dst = out.data() + (static_cast<std::int64_t>(ci) * oh + rows) * ow + cols;
        for (int y = 0; y < h; ++y) {
            std::memcpy(dst + static_cast<std::int64_t>(y) * ow, src + static_cast<std::int64_t>(y) * w,
                        sizeof(double) * static_cast<size_t>(w));
        }
    }
    return out;
}

Tensor zeropad_backward(const Tensor& grad_out, int rows, int cols) {
    require_image(grad_out, "zeropad_backward");
    const int c = grad_out.dim(0), h = grad_out.dim(1) - 2 * rows, w = grad_out.dim(2) - 2 * cols;
    Tensor g({c, h, w});
    const int gh = grad_out.dim(1), gw = grad_out.dim(2);
    for (int ci = 0; ci < c; ++ci) {
        const double* src =
            grad_out.data() + (static_cast<std::int64_t>(ci) * gh + rows) * gw + cols;
        double* dst = g.data() + static_cast<std::int64_t>(ci) * h * w;
        for (int y = 0; y < h; ++y) {
            std::memcpy(dst + static_cast<std::int64_t>(y) * w, src + static_cast<std::int64_t>(y) * gw,
                        sizeof(double) * static_cast<size_t>(w));
        }
    }
    return g;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (weights.order() != 2) {
        throw ShapeError("dense: weights must be (out,in), got " +
                         Tensor::shape_str(weights.shape()));
    }
    const int out_n = weights.dim(0), in_n = weights.dim(1);
    if (input.numel() != in_n) {
        throw ShapeError("dense: flattened input length " + std::to_string(input.numel()) +
                         " does not match weight input axis " + std::to_string(in_n));
    }
    if (bias.numel() != out_n) {
        throw ShapeError("dense: bias length " + std::to_string(bias.numel()) + ", expected " +
                         std::to_string(out_n));
    }
    Tensor out({out_n});
    const double* x = input.data();
    par::parallel_for(out_n, 1 + 16384 / (in_n + 1), [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t r = r0; r < r1; ++r) {
            const double* wr = weights.data() + r * in_n;
            double acc = bias[r];
            for (int i = 0; i < in_n; ++i) acc += wr[i] * x[i];
            out[r] = acc;
        }
    });
    return out;
}

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& saved_input,
                          const Tensor& weights) {
    const int out_n = weights.dim(0), in_n = weights.dim(1);
    if (grad_out.numel() != out_n) {
        throw ShapeError("dense_backward: grad_out length " + std::to_string(grad_out.numel()) +
                         ", expected " + std::to_string(out_n));
    }
    DenseGrads g;
    g.grad_bias = Tensor({out_n}, std::vector<double>(grad_out.data(), grad_out.data() + out_n));
    g.grad_weights = Tensor(weights.shape());
    // outer product grad_out (out x 1) * input^T (1 x in)
    gemm_nn(out_n, in_n, 1, grad_out.data(), saved_input.data(), g.grad_weights.data(), false);
    g.grad_input = Tensor(saved_input.shape());
    gemm_tn(in_n, 1, out_n, weights.data(), grad_out.data(), g.grad_input.data(), false);
    return g;
}

Tensor tanh_forward(const Tensor& input) {
    Tensor out(input.shape());
    const double* x = input.data();
    double* y = out.data();
    const std::int64_t n = input.numel();
    for (std::int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
    return out;
}

Tensor tanh_backward(const Tensor& grad_out, const Tensor& saved_output) {
    require_same_shape(grad_out, saved_output, "tanh_backward");
    Tensor g(grad_out.shape());
    const double* go = grad_out.data();
    const double* y = saved_output.data();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) g[i] = go[i] * (1.0 - y[i] * y[i]);
    return g;
}

DropoutResult dropout_forward(const Tensor& input, double rate, std::uint64_t rng_seed,
                              bool training) {
    DropoutResult r;
    if (!training || rate == 0.0) {
        r.output = input;
        r.mask = Tensor::full(input.shape(), 1.0);
        return r;
    }
    r.mask = Tensor(input.shape());
    r.output = Tensor(input.shape());
    Rng rng(rng_seed);
    const double keep_scale = 1.0 / (1.0 - rate);
    const std::int64_t n = input.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const double m = rng.uniform() < rate ? 0.0 : keep_scale;
        r.mask[i] = m;
        r.output[i] = input[i] * m;
    }
    return r;
}

Tensor dropout_backward(const Tensor& grad_out, const Tensor& mask) {
    require_same_shape(grad_out, mask, "dropout_backward");
    Tensor g(grad_out.shape());
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) g[i] = grad_out[i] * mask[i];
    return g;
}

} // namespace poseidon
