#pragma once

#include <array>

#include "poseidon/tensor.hpp"

namespace poseidon {

/// Bivariate Gaussian prior mask, unnormalized with peak 1 at (R/2, C/2).
/// w_ij = exp(-1/2 [ ((i-R/2)/(R/alpha))^2 + ((j-C/2)/(C/beta))^2 ]).
struct GaussianMask {
    int rows = 0;
    int cols = 0;
    double alpha = 0.0;
    double beta = 0.0;
    Tensor weights; // (rows, cols), values in (0, 1]
};

inline constexpr double kFfdMaskAlpha = 3.5;
inline constexpr double kFfdMaskBeta = 2.5;

GaussianMask gaussian_mask(int rows, int cols, double alpha = kFfdMaskAlpha,
                           double beta = kFfdMaskBeta);

struct FfdLoss {
    double value = 0.0;
    Tensor grad; // d loss / d pred, same shape as pred
};

// L = 1/(R*C) sum_ij ||pred_ij - target_ij||^2 * w_ij for single-channel
// images; gradient is the exact analytic derivative.
FfdLoss ffd_loss(const Tensor& pred, const Tensor& target, const GaussianMask& mask);

// Loss weights ordered (pitch, roll, yaw); yaw carries the most weight.
inline constexpr std::array<double, 3> kPoseLossWeights{0.2, 0.35, 0.45};

struct WeightedL2 {
    double value = 0.0;
    std::array<double, 3> grad{}; // d loss / d pred
};

// L = sum_i |w_i * (target_i - pred_i)|; subgradient at zero residual is 0.
WeightedL2 weighted_l2(const std::array<double, 3>& pred, const std::array<double, 3>& target,
                       const std::array<double, 3>& weights = kPoseLossWeights);

} // namespace poseidon
