#include "poseidon/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace poseidon {

namespace {

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kRadToDeg = 57.29577951308232;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 normalize_checked(const Vec3& v, const char* what) {
    const double n = norm(v);
    if (n < 1e-12) throw GeometryError(std::string("shoulder_frame: degenerate ") + what);
    return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

} // namespace

BoundingBox head_bbox(double center_x, double center_y, const CameraIntrinsics& intr,
                      double r_x_mm, double r_y_mm, double d_mm) {
    if (!(d_mm > 0.0) || !std::isfinite(d_mm)) {
        throw GeometryError("head_bbox: invalid depth D=" + std::to_string(d_mm));
    }
    if (!(intr.fx > 0.0) || !(intr.fy > 0.0)) {
        throw GeometryError("head_bbox: focal lengths must be positive");
    }
    BoundingBox box;
    box.center_x = center_x;
    box.center_y = center_y;
    box.width = intr.fx * r_x_mm / d_mm;
    box.height = intr.fy * r_y_mm / d_mm;
    return box;
}

BoundingBox shoulder_bbox(const BoundingBox& head_box, const CameraIntrinsics& intr,
                          double r_x_mm, double r_y_mm, double d_mm) {
    BoundingBox box = head_bbox(head_box.center_x, head_box.center_y - head_box.height / 4.0,
                                intr, r_x_mm, r_y_mm, d_mm);
    return box;
}

ShoulderFrame shoulder_frame(const Vec3& p_ls, const Vec3& p_rs, const Vec3& p_sb) {
    ShoulderFrame f;
    f.n1 = normalize_checked(sub(p_rs, p_ls), "shoulder axis (p_RS == p_LS?)");
    const Vec3 u = normalize_checked(sub(p_rs, p_sb), "spine axis (p_RS == p_SB?)");
    const Vec3 c = cross(f.n1, u);
    if (norm(c) < 1e-9) {
        throw GeometryError("shoulder_frame: joints are collinear");
    }
    f.n3 = normalize_checked(c, "normal");
    f.n2 = cross(f.n1, f.n3);
    return f;
}

Mat3 shoulder_frame_to_rotmat(const ShoulderFrame& f) {
    // columns (N1, N2, -N3) gives det +1
    return {{{f.n1[0], f.n2[0], -f.n3[0]},
             {f.n1[1], f.n2[1], -f.n3[1]},
             {f.n1[2], f.n2[2], -f.n3[2]}}};
}

Mat3 euler_to_rotmat(const PoseAngles& a) {
    const double cy = std::cos(a.yaw * kDegToRad), sy = std::sin(a.yaw * kDegToRad);
    const double cp = std::cos(a.pitch * kDegToRad), sp = std::sin(a.pitch * kDegToRad);
    const double cr = std::cos(a.roll * kDegToRad), sr = std::sin(a.roll * kDegToRad);
    // R = Rz(yaw) * Ry(pitch) * Rx(roll)
    return {{{cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr},
             {sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr},
             {-sp, cp * sr, cp * cr}}};
}

EulerResult rotmat_to_euler(const Mat3& m) {
    // orthonormality check
    const Mat3 mt = mat_transpose(m);
    const Mat3 mmt = mat_mul(m, mt);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double expect = i == j ? 1.0 : 0.0;
            if (std::abs(mmt[i][j] - expect) > 1e-6) {
                throw GeometryError("rotmat_to_euler: matrix is not orthonormal");
            }
        }
    }
    EulerResult r;
    const double sp = std::clamp(-m[2][0], -1.0, 1.0);
    r.angles.pitch = std::asin(sp) * kRadToDeg;
    if (std::abs(std::abs(r.angles.pitch) - 90.0) < 1e-6) {
        // gimbal lock: yaw and roll share an axis; fix roll = 0, then
        // yaw = atan2(-R01, R11) holds for both pitch signs
        r.gimbal_lock = true;
        r.angles.roll = 0.0;
        r.angles.yaw = std::atan2(-m[0][1], m[1][1]) * kRadToDeg;
        return r;
    }
    r.angles.yaw = std::atan2(m[1][0], m[0][0]) * kRadToDeg;
    r.angles.roll = std::atan2(m[2][1], m[2][2]) * kRadToDeg;
    return r;
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += a[i][k] * b[k][j];
            c[i][j] = acc;
        }
    }
    return c;
}

Mat3 mat_transpose(const Mat3& m) {
    Mat3 t{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
    }
    return t;
}

Vec3 mat_apply(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

NormalizedAngles angle_normalize(const PoseAngles& angles, const std::array<double, 3>& scales) {
    for (double s : scales) {
        if (!(s > 0.0)) throw ConfigError("angle_normalize: scales must be positive");
    }
    NormalizedAngles out;
    const double raw[3] = {angles.pitch, angles.roll, angles.yaw};
    for (int i = 0; i < 3; ++i) {
        double v = raw[i] / scales[i];
        if (v < -1.0 || v > 1.0) {
            v = std::clamp(v, -1.0, 1.0);
            ++out.clamped;
        }
        out.value[i] = v;
    }
    return out;
}

PoseAngles angle_denormalize(const std::array<double, 3>& normalized,
                             const std::array<double, 3>& scales) {
    PoseAngles a;
    a.pitch = normalized[0] * scales[0];
    a.roll = normalized[1] * scales[1];
    a.yaw = normalized[2] * scales[2];
    return a;
}

double mean_depth_window(const Tensor& depth, double center_x, double center_y, int radius) {
    if (depth.order() != 2) {
        throw ShapeError("mean_depth_window: depth must be (rows,cols)");
    }
    const int rows = depth.dim(0), cols = depth.dim(1);
    const int cx = static_cast<int>(std::lround(center_x));
    const int cy = static_cast<int>(std::lround(center_y));
    double acc = 0.0;
    int n = 0;
    for (int y = cy - radius; y <= cy + radius; ++y) {
        if (y < 0 || y >= rows) continue;
        for (int x = cx - radius; x <= cx + radius; ++x) {
            if (x < 0 || x >= cols) continue;
            const double v = depth.at(y, x);
            if (v > 0.0) {
                acc += v;
                ++n;
            }
        }
    }
    return n > 0 ? acc / n : 0.0;
}

} // namespace poseidon
