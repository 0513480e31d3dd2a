#pragma once

#include <array>
#include <string>

#include "poseidon/tensor.hpp"

namespace poseidon {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>; // row-major

/// Head or shoulder orientation in degrees.
struct PoseAngles {
    double pitch = 0.0;
    double roll = 0.0;
    double yaw = 0.0;
};

struct BoundingBox {
    double center_x = 0.0;
    double center_y = 0.0;
    double width = 0.0;
    double height = 0.0;
};

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
};

// Average face extent in mm used by the head crop.
inline constexpr double kHeadBoxMm = 320.0;
// Shoulder crop extents (the best-performing rectangular crop).
inline constexpr double kShoulderBoxXMm = 850.0;
inline constexpr double kShoulderBoxYMm = 500.0;

// Euler convention used throughout: intrinsic Z-Y'-X'' (yaw, then pitch,
// then roll), R = Rz(yaw) Ry(pitch) Rx(roll), angles in degrees. The tag is
// recorded in checkpoints, dataset metadata and report headers.
inline constexpr const char* kEulerConventionTag =
    "intrinsic-ZYX(yaw,pitch,roll);shoulder-frame-cols=(N1,N2,-N3)";

// Distance-scaled bounding box: w = fx*Rx/D, h = fy*Ry/D, center preserved.
BoundingBox head_bbox(double center_x, double center_y, const CameraIntrinsics& intr,
                      double r_x_mm, double r_y_mm, double d_mm);

// Neck crop: center (x_H, y_H - h_H/4), extents from the same formula.
BoundingBox shoulder_bbox(const BoundingBox& head_box, const CameraIntrinsics& intr,
                          double r_x_mm, double r_y_mm, double d_mm);

/// Shoulder reference frame. As constructed, det[N1 N2 N3] = -1; use
/// shoulder_frame_to_rotmat for a proper rotation.
struct ShoulderFrame {
    Vec3 n1{};
    Vec3 n2{};
    Vec3 n3{};
};

// N1 = (p_RS-p_LS)/|..|, U = (p_RS-p_SB)/|..|, N3 = N1 x U / |..|,
// N2 = N1 x N3. Throws GeometryError on collinear or coincident joints.
ShoulderFrame shoulder_frame(const Vec3& p_ls, const Vec3& p_rs, const Vec3& p_sb);

// Proper rotation with columns (N1, N2, -N3); identity for the canonical
// T-pose (shoulders along +x, spine base below in image coordinates).
Mat3 shoulder_frame_to_rotmat(const ShoulderFrame& f);

Mat3 euler_to_rotmat(const PoseAngles& angles);

struct EulerResult {
    PoseAngles angles;
    bool gimbal_lock = false; // |pitch| at 90 deg; roll fixed to 0 there
};

// Requires M orthonormal within 1e-6.
EulerResult rotmat_to_euler(const Mat3& m);

Mat3 mat_mul(const Mat3& a, const Mat3& b);
Mat3 mat_transpose(const Mat3& m);
Vec3 mat_apply(const Mat3& m, const Vec3& v);

struct NormalizedAngles {
    std::array<double, 3> value{}; // (pitch, roll, yaw) scaled into [-1, 1]
    int clamped = 0;               // count of out-of-range inputs clamped
};

// Division by per-angle scales (degrees); out-of-range values clamp and are
// counted so training can surface a warning.
NormalizedAngles angle_normalize(const PoseAngles& angles, const std::array<double, 3>& scales);
PoseAngles angle_denormalize(const std::array<double, 3>& normalized,
                             const std::array<double, 3>& scales);

// Mean of valid (> 0) depth values in a (2r+1)^2 window around the center;
// 0 when no valid pixel is inside the frame.
double mean_depth_window(const Tensor& depth, double center_x, double center_y, int radius = 2);

} // namespace poseidon
