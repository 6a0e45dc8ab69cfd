#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdbell {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Plain 3-vector for intermediate arithmetic. Not necessarily normalized.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// A direction on the unit sphere: x^2 + y^2 + z^2 = 1 (maintained by construction,
/// every constructor normalizes its input). Zero input is rejected.
class UnitVec3 {
  public:
    UnitVec3(double x, double y, double z) : UnitVec3(Vec3{x, y, z}) {}

    explicit UnitVec3(const Vec3& v) {
        const double n = norm(v);
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw std::invalid_argument("UnitVec3: cannot normalize zero or non-finite vector");
        }
        v_ = {v.x / n, v.y / n, v.z / n};
    }

    double x() const { return v_.x; }
    double y() const { return v_.y; }
    double z() const { return v_.z; }
    const Vec3& vec() const { return v_; }

  private:
    Vec3 v_;
};

/// Normalizes (x, y, z); throws std::invalid_argument on the zero vector.
inline UnitVec3 unit(double x, double y, double z) { return UnitVec3(x, y, z); }

/// Inner product of two directions, clamped to [-1, 1] so downstream acos/sqrt
/// never sees a rounding excursion outside the valid range.
inline double dot(const UnitVec3& u, const UnitVec3& v) {
    return std::clamp(dot(u.vec(), v.vec()), -1.0, 1.0);
}

inline Vec3 cross(const UnitVec3& u, const UnitVec3& v) { return cross(u.vec(), v.vec()); }

/// Angle between two directions in [0, pi]. atan2 form stays accurate near 0 and pi.
inline double angle_between(const UnitVec3& u, const UnitVec3& v) {
    return std::atan2(norm(cross(u, v)), dot(u.vec(), v.vec()));
}

/// Right-handed orthonormal triad with e3 = n.
struct Frame {
    UnitVec3 e1;
    UnitVec3 e2;
    UnitVec3 e3;
};

/// Deterministic frame about n: e3 = n, e1 is the coordinate axis least aligned
/// with n after Gram-Schmidt, e2 = e3 x e1. Ties between axes break in x, y, z order.
inline Frame orthonormal_frame(const UnitVec3& n) {
    const double ax = std::fabs(n.x());
    const double ay = std::fabs(n.y());
    const double az = std::fabs(n.z());
    Vec3 axis{1.0, 0.0, 0.0};
    if (ay < ax && ay <= az) {
        axis = {0.0, 1.0, 0.0};
    } else if (az < ax && az < ay) {
        axis = {0.0, 0.0, 1.0};
    }
    const Vec3 t = axis - dot(axis, n.vec()) * n.vec();
    UnitVec3 e1(t);
    UnitVec3 e2(cross(n.vec(), e1.vec()));
    return Frame{e1, e2, n};
}

/// Sign convention used by every outcome rule: sign_pm(0) = +1.
inline int sign_pm(double x) { return x < 0.0 ? -1 : +1; }

}  // namespace mdbell
