#pragma once

// Coordinate conventions
//
//   Pixel space: the image covers the continuous rectangle [0,W]x[0,H];
//   integer pixel (i,j) has its center at (i+0.5, j+0.5).
//
//   Sphere: yaw (longitude) in [-pi, pi), pitch (latitude) in [-pi/2, pi/2].
//   u = 0 is yaw -pi (the seam), u = W/2 is yaw 0, v = 0 is the zenith.
//
//   3D: right-handed, +x is yaw 0 on the horizon, +y is yaw +pi/2, +z is up.
//   Camera rotation applies pitch about the lateral (y) axis first, then yaw
//   about the world vertical (z) axis. There is no roll.

#include "vtour/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace vtour {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

constexpr double deg_to_rad(double deg) noexcept { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / kPi); }

struct Dimensions {
    std::int64_t width = 0;
    std::int64_t height = 0;

    Dimensions() = default;
    Dimensions(std::int64_t w, std::int64_t h) : width(w), height(h) {
        if (w <= 0 || h <= 0) {
            throw DomainError("dimensions must be positive, got " + std::to_string(w) + "x" +
                              std::to_string(h));
        }
    }

    std::int64_t area() const noexcept { return width * height; }
    bool operator==(const Dimensions&) const = default;
};

// Wrap an angle into [-pi, pi).
inline double wrap_yaw(double yaw) noexcept {
    if (yaw >= -kPi && yaw < kPi) return yaw;
    double w = std::fmod(yaw + kPi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    w -= kPi;
    if (w >= kPi) w = -kPi;
    return w;
}

class SphericalDirection {
public:
    SphericalDirection() = default;
    SphericalDirection(double yaw, double pitch) {
        if (!std::isfinite(yaw) || !std::isfinite(pitch)) {
            throw DomainError("spherical direction requires finite angles");
        }
        yaw_ = wrap_yaw(yaw);
        pitch_ = std::clamp(pitch, -kHalfPi, kHalfPi);
    }

    double yaw() const noexcept { return yaw_; }
    double pitch() const noexcept { return pitch_; }

    bool operator==(const SphericalDirection&) const = default;

private:
    double yaw_ = 0.0;
    double pitch_ = 0.0;
};

struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double dot(const Vec3& o) const noexcept { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const noexcept {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const noexcept { return std::sqrt(x * x + y * y + z * z); }
};

// A direction in 3D. Construction normalizes; zero or non-finite input is rejected.
class UnitVector {
public:
    UnitVector() = default;
    UnitVector(double x, double y, double z) {
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
            throw DomainError("unit vector requires finite components");
        }
        const double n = std::sqrt(x * x + y * y + z * z);
        if (n == 0.0) throw DomainError("cannot normalize the zero vector");
        if (std::abs(n - 1.0) > 1e-15) {
            x /= n;
            y /= n;
            z /= n;
        }
        v_ = {x, y, z};
    }
    explicit UnitVector(const Vec3& v) : UnitVector(v.x, v.y, v.z) {}

    double x() const noexcept { return v_.x; }
    double y() const noexcept { return v_.y; }
    double z() const noexcept { return v_.z; }
    const Vec3& vec() const noexcept { return v_; }

private:
    Vec3 v_{1.0, 0.0, 0.0};
};

inline SphericalDirection pixel_to_sphere(PixelCoord p, Dimensions d) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
        throw DomainError("pixel coordinate must be finite");
    }
    const auto w = static_cast<double>(d.width);
    const auto h = static_cast<double>(d.height);
    if (p.u < 0.0 || p.u > w || p.v < 0.0 || p.v > h) {
        throw DomainError("pixel coordinate outside [0,W]x[0,H]");
    }
    return {(p.u / w) * kTwoPi - kPi, kHalfPi - (p.v / h) * kPi};
}

inline PixelCoord sphere_to_pixel(const SphericalDirection& s, Dimensions d) {
    return {((s.yaw() + kPi) / kTwoPi) * static_cast<double>(d.width),
            ((kHalfPi - s.pitch()) / kPi) * static_cast<double>(d.height)};
}

inline UnitVector sphere_to_vec(const SphericalDirection& s) {
    const double cp = std::cos(s.pitch());
    return UnitVector(cp * std::cos(s.yaw()), cp * std::sin(s.yaw()), std::sin(s.pitch()));
}

inline SphericalDirection vec_to_sphere(const UnitVector& v) {
    const double horizontal = std::hypot(v.x(), v.y());
    // Longitude is undefined on the polar axis; pin it to 0.
    const double yaw = horizontal == 0.0 ? 0.0 : std::atan2(v.y(), v.x());
    return {yaw, std::atan2(v.z(), horizontal)};
}

// Pitch about the camera's lateral axis (positive tilts +x toward +z), then yaw about +z.
inline UnitVector rotate_view(const UnitVector& v, double yaw, double pitch) {
    const double sp = std::sin(pitch);
    const double cp = std::cos(pitch);
    const double x1 = v.x() * cp - v.z() * sp;
    const double z1 = v.x() * sp + v.z() * cp;
    const double sy = std::sin(yaw);
    const double cy = std::cos(yaw);
    return UnitVector(x1 * cy - v.y() * sy, x1 * sy + v.y() * cy, z1);
}

// Great-circle angle between two directions, stable for small and near-antipodal angles.
inline double angular_distance(const UnitVector& a, const UnitVector& b) {
    return std::atan2(a.vec().cross(b.vec()).norm(), a.vec().dot(b.vec()));
}

} // namespace vtour
