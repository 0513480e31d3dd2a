#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "poseidon/network.hpp"

namespace poseidon {

// Default per-angle normalization scales in degrees (pitch, roll, yaw),
// matching the wide-range head movements the regressors must cover.
inline constexpr std::array<double, 3> kHeadAngleScales{100.0, 70.0, 125.0};
inline constexpr std::array<double, 3> kShoulderAngleScales{60.0, 70.0, 60.0};

// Head localization: 1x132x160 depth in, normalized (x, y) out. Four
// conv+pool stages, tanh activations, dropout 0.5 in the FC head.
NetworkSpec build_locnet();

// Pose regression branch: in_channels x 64 x 64 in, 3 normalized angles
// out. Five convs with kernels (5,4,3,3,3), filters (32,32,32,32,128),
// pooling after the first three, FC 128-84-3.
NetworkSpec build_branch_net(int in_channels);

// Face-from-Depth encoder/decoder: 1x64x64 depth crop in, 64x64 gray-level
// image out (returned flattened as 4096 values). Fourteen convs plus one
// final fully connected layer; single 2x2 pool after the second conv and a
// matching upsample after the thirteenth; zero padding after convs 1 and 2.
NetworkSpec build_ffd_net();

enum class FusionKind {
    Multiplication,
    Concatenation,
    Convolution,
    ConvThenConcat,
    MulThenConcat,
};

FusionKind fusion_kind_from_string(const std::string& s);
std::string fusion_kind_to_string(FusionKind k);

// Binary fusion of two feature maps with equal spatial dims.
//   Multiplication: element-wise product, requires equal channel counts.
//   Concatenation:  channel stacking, d = da + db.
//   Convolution:    stack then 1x1 conv to (da+db)/2 channels.
// conv_params must be a (d_out, da+db, 1, 1) kernel for Convolution.
Tensor fuse(const Tensor& a, const Tensor& b, FusionKind kind,
            const LayerParams* conv_params = nullptr);

int fused_channels(int da, int db, FusionKind kind);

/// The assembled three-branch regressor: truncated branch conv stacks over
/// depth / face-from-depth / motion inputs, a fusion stage, and the shared
/// FC 128-84-3 head with two dropouts.
struct TridentModel {
    std::array<NetworkSpec, 3> branch_specs;  // truncated at the last conv feature map
    std::array<ModelState, 3> branch_states;
    FusionKind fusion = FusionKind::ConvThenConcat;
    std::vector<LayerParams> fusion_convs; // 1x1 kernels for conv-based fusion
    NetworkSpec head_spec;
    ModelState head_state;
    std::array<double, 3> norm_scales = kHeadAngleScales;

    // Forward over one (depth, ffd, motion) input triple; returns the three
    // normalized angle outputs.
    std::array<double, 3> predict(const Tensor& depth_in, const Tensor& ffd_in,
                                  const Tensor& motion_in) const;
};

// Cuts the branch at its last conv feature map (before Flatten) so the
// fusion operators see w x h maps, builds the fusion stage for `kind` and
// a freshly initialized head. Branch states are copied, never mutated.
TridentModel assemble_poseidon(const std::array<NetworkSpec, 3>& branch_specs,
                               const std::array<ModelState, 3>& branch_states, FusionKind kind,
                               std::uint64_t seed);

// Channel count entering the head for three branches with `ch` channels
// each under the given fusion kind.
int trident_fused_channels(int ch, FusionKind kind);

} // namespace poseidon
