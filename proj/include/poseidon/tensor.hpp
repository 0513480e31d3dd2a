#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poseidon/errors.hpp"

namespace poseidon {

/// Dense n-dimensional array of doubles, order <= 4, row-major.
/// Images use channels-rows-cols layout; conv weights use
/// (out_channels, in_channels, kernel_h, kernel_w).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        values_.assign(static_cast<size_t>(checked_numel(shape_)), 0.0);
    }

    Tensor(std::vector<int> shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (checked_numel(shape_) != static_cast<std::int64_t>(values_.size())) {
            throw ShapeError("tensor: value count " + std::to_string(values_.size()) +
                             " does not match shape " + shape_str(shape_));
        }
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<int> shape, double v) {
        Tensor t(std::move(shape));
        for (auto& x : t.values_) x = v;
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int order() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
    std::int64_t numel() const { return static_cast<std::int64_t>(values_.size()); }
    bool empty() const { return values_.empty(); }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    double& operator[](std::int64_t i) { return values_[static_cast<size_t>(i)]; }
    double operator[](std::int64_t i) const { return values_[static_cast<size_t>(i)]; }

    // 2D (rows, cols)
    double& at(int r, int c) { return values_[static_cast<size_t>(r) * shape_[1] + c]; }
    double at(int r, int c) const { return values_[static_cast<size_t>(r) * shape_[1] + c]; }

    // 3D (channels, rows, cols)
    double& at(int ch, int r, int c) {
        return values_[(static_cast<size_t>(ch) * shape_[1] + r) * shape_[2] + c];
    }
    double at(int ch, int r, int c) const {
        return values_[(static_cast<size_t>(ch) * shape_[1] + r) * shape_[2] + c];
    }

    // 4D
    double& at(int o, int ch, int r, int c) {
        return values_[((static_cast<size_t>(o) * shape_[1] + ch) * shape_[2] + r) * shape_[3] + c];
    }
    double at(int o, int ch, int r, int c) const {
        return values_[((static_cast<size_t>(o) * shape_[1] + ch) * shape_[2] + r) * shape_[3] + c];
    }

    bool all_finite() const;

    Tensor reshaped(std::vector<int> new_shape) const {
        if (checked_numel(new_shape) != numel()) {
            throw ShapeError("reshape: element count mismatch, " + shape_str(shape_) + " -> " +
                             shape_str(new_shape));
        }
        return Tensor(std::move(new_shape), values_);
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    static std::string shape_str(const std::vector<int>& s);

private:
    static std::int64_t checked_numel(const std::vector<int>& shape);

    std::vector<int> shape_;
    std::vector<double> values_;
};

// In-place helpers used by the training loops.
void fill(Tensor& t, double v);
void scale(Tensor& t, double s);
void add_scaled(Tensor& dst, const Tensor& src, double s); // dst += s * src
double sum(const Tensor& t);

// Throws ShapeError naming `what` when shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

} // namespace poseidon
