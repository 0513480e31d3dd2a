#include "poseidon/losses.hpp"

#include <cmath>

namespace poseidon {

GaussianMask gaussian_mask(int rows, int cols, double alpha, double beta) {
    if (rows < 2 || cols < 2) throw ConfigError("gaussian_mask: rows and cols must be >= 2");
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw ConfigError("gaussian_mask: alpha and beta must be positive");
    }
    GaussianMask m;
    m.rows = rows;
    m.cols = cols;
    m.alpha = alpha;
    m.beta = beta;
    m.weights = Tensor({rows, cols});
    const double mu_r = rows / 2.0, mu_c = cols / 2.0;
    const double sigma_r = rows / alpha, sigma_c = cols / beta;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double dr = (i - mu_r) / sigma_r;
            const double dc = (j - mu_c) / sigma_c;
            m.weights.at(i, j) = std::exp(-0.5 * (dr * dr + dc * dc));
        }
    }
    return m;
}

FfdLoss ffd_loss(const Tensor& pred, const Tensor& target, const GaussianMask& mask) {
    require_same_shape(pred, target, "ffd_loss pred/target");
    require_same_shape(pred, mask.weights, "ffd_loss pred/mask");
    FfdLoss out;
    out.grad = Tensor(pred.shape());
    const std::int64_t n = pred.numel();
    const double inv_n = 1.0 / static_cast<double>(n);
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double diff = pred[i] - target[i];
        const double w = mask.weights[i];
        acc += diff * diff * w;
        out.grad[i] = 2.0 * diff * w * inv_n;
    }
    out.value = acc * inv_n;
    return out;
}

WeightedL2 weighted_l2(const std::array<double, 3>& pred, const std::array<double, 3>& target,
                       const std::array<double, 3>& weights) {
    WeightedL2 out;
    for (int i = 0; i < 3; ++i) {
        const double r = weights[i] * (target[i] - pred[i]);
        out.value += std::abs(r);
        // d|w(t-p)|/dp = -w * sign(t-p), taken as 0 at the kink
        if (r > 0.0) {
            out.grad[i] = -weights[i];
        } else if (r < 0.0) {
            out.grad[i] = weights[i];
        } else {
            out.grad[i] = 0.0;
        }
    }
    return out;
}

} // namespace poseidon
