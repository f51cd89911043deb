// SPDX-License-Identifier: Apache-2.0
//
// jamloc: simulation and direction-finding toolkit for GNSS jammer localization
// Copyright (C) 2025 jamloc developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef JAMLOC_GEOMETRY_HPP
#define JAMLOC_GEOMETRY_HPP

#include <cmath>
#include <numbers>

#include "jamloc/errors.hpp"

namespace jamloc
{

constexpr double kPi = std::numbers::pi;
constexpr double kDegPerRad = 180.0 / kPi;
constexpr double kRadPerDeg = kPi / 180.0;
constexpr double kSpeedOfLight = 299792458.0; // m/s
constexpr double kGravity = 9.80665;          // m/s^2

// World frame: x east, y north, z up. Azimuth measured from +x,
// counterclockwise, in degrees within (-180, 180].

struct Vec3
{
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 &operator+=(const Vec3 &o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3 &v) { return v * s; }
inline double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3 &a, const Vec3 &b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline Vec3 normalized(const Vec3 &v)
{
    const double n = v.norm();
    if (n == 0.0)
        throw DegenerateGeometryError("cannot normalize the zero vector");
    return v / n;
}

// Unit quaternion, scalar-first, body-to-world convention.
struct Quat
{
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat conjugate() const { return {w, -x, -y, -z}; }

    Quat operator*(const Quat &o) const
    {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    Quat normalized() const
    {
        const double n = norm();
        if (n == 0.0)
            throw NumericalError("zero-norm quaternion");
        return {w / n, x / n, y / n, z / n};
    }

    // Rotate a body-frame vector into the world frame.
    Vec3 rotate(const Vec3 &v) const
    {
        const Vec3 u{x, y, z};
        const Vec3 t = 2.0 * cross(u, v);
        return v + w * t + cross(u, t);
    }

    Vec3 rotate_inverse(const Vec3 &v) const { return conjugate().rotate(v); }

    bool is_identity(double tol = 1e-12) const
    {
        return std::abs(std::abs(w) - 1.0) <= tol && std::abs(x) <= tol &&
               std::abs(y) <= tol && std::abs(z) <= tol;
    }
};

// Rotation by angle (rad) about a unit axis.
inline Quat quat_from_axis_angle(const Vec3 &axis, double angle_rad)
{
    const double h = 0.5 * angle_rad;
    const Vec3 a = normalized(axis) * std::sin(h);
    return {std::cos(h), a.x, a.y, a.z};
}

// Exponential map of a rotation vector (axis * angle). Small-angle safe.
inline Quat quat_exp(const Vec3 &rotvec)
{
    const double angle = rotvec.norm();
    if (angle < 1e-14)
        return Quat{1.0, 0.5 * rotvec.x, 0.5 * rotvec.y, 0.5 * rotvec.z}.normalized();
    return quat_from_axis_angle(rotvec, angle);
}

inline Quat quat_yaw(double yaw_rad) { return quat_from_axis_angle({0, 0, 1}, yaw_rad); }

inline Quat slerp(const Quat &a, Quat b, double t)
{
    double cos_half = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    if (cos_half < 0.0)
    {
        b = {-b.w, -b.x, -b.y, -b.z};
        cos_half = -cos_half;
    }
    if (cos_half > 1.0 - 1e-12)
    {
        Quat q{a.w + t * (b.w - a.w), a.x + t * (b.x - a.x),
               a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
        return q.normalized();
    }
    const double half = std::acos(cos_half);
    const double s = std::sin(half);
    const double wa = std::sin((1.0 - t) * half) / s;
    const double wb = std::sin(t * half) / s;
    return Quat{wa * a.w + wb * b.w, wa * a.x + wb * b.x,
                wa * a.y + wb * b.y, wa * a.z + wb * b.z}
        .normalized();
}

struct PoseSE3
{
    Vec3 position;
    Quat orientation; // body -> world
    double timestamp = 0.0;
};

// Wrap any finite angle into (-180, 180].
inline double wrap_angle_deg(double a)
{
    if (!std::isfinite(a))
        throw NumericalError("wrap_angle_deg requires a finite angle");
    double w = std::fmod(a, 360.0);
    if (w <= -180.0)
        w += 360.0;
    else if (w > 180.0)
        w -= 360.0;
    return w;
}

// Smallest absolute angular separation, in [0, 180].
inline double angular_error_deg(double a, double b)
{
    const double d = std::abs(wrap_angle_deg(a - b));
    return d;
}

struct LabelRecord
{
    double timestamp = 0.0; // s
    Vec3 delta;             // jammer position minus antenna center, meters
    double distance = 0.0;  // m
    double azimuth = 0.0;   // deg, (-180, 180]
    double elevation = 0.0; // deg, [-90, 90]
    double speed = 0.0;     // m/s
};

// Azimuth/elevation of a displacement vector. At the vertical pole the
// azimuth is fixed to 0 so labels stay deterministic.
inline void delta_to_angles(const Vec3 &delta, double &azimuth_deg, double &elevation_deg)
{
    const double horiz = std::hypot(delta.x, delta.y);
    azimuth_deg = (horiz == 0.0) ? 0.0 : std::atan2(delta.y, delta.x) * kDegPerRad;
    if (azimuth_deg <= -180.0)
        azimuth_deg = 180.0;
    elevation_deg = std::atan2(delta.z, horiz) * kDegPerRad;
}

inline Vec3 angles_to_direction(double azimuth_deg, double elevation_deg)
{
    const double az = azimuth_deg * kRadPerDeg;
    const double el = elevation_deg * kRadPerDeg;
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

inline LabelRecord relative_to_jammer(const Vec3 &antenna_center, const Vec3 &jammer,
                                      double timestamp = 0.0, double speed = 0.0)
{
    const Vec3 delta = jammer - antenna_center;
    const double dist = delta.norm();
    if (dist == 0.0)
        throw DegenerateGeometryError("antenna center coincides with the jammer");
    LabelRecord rec;
    rec.timestamp = timestamp;
    rec.delta = delta;
    rec.distance = dist;
    delta_to_angles(delta, rec.azimuth, rec.elevation);
    rec.speed = speed;
    return rec;
}

} // namespace jamloc

#endif
