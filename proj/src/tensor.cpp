#include "poseidon/tensor.hpp"

#include <cmath>

namespace poseidon {

std::string Tensor::shape_str(const std::vector<int>& s) {
    std::string out = "(";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    out += ")";
    return out;
}

std::int64_t Tensor::checked_numel(const std::vector<int>& shape) {
    if (shape.size() > 4) {
        throw ShapeError("tensor: order " + std::to_string(shape.size()) + " exceeds 4");
    }
    std::int64_t n = 1;
    for (size_t i = 0; i < shape.size(); ++i) {
        if (shape[i] <= 0) {
            throw ShapeError("tensor: axis " + std::to_string(i) + " of shape " + shape_str(shape) +
                             " must be positive");
        }
        n *= shape[i];
    }
    return n;
}

bool Tensor::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void fill(Tensor& t, double v) {
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = v;
}

void scale(Tensor& t, double s) {
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] *= s;
}

void add_scaled(Tensor& dst, const Tensor& src, double s) {
    require_same_shape(dst, src, "add_scaled");
    double* d = dst.data();
    const double* x = src.data();
    const std::int64_t n = dst.numel();
    for (std::int64_t i = 0; i < n; ++i) d[i] += s * x[i];
}

double sum(const Tensor& t) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < t.numel(); ++i) acc += t[i];
    return acc;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + Tensor::shape_str(a.shape()) +
                         " vs " + Tensor::shape_str(b.shape()));
    }
}

} // namespace poseidon
