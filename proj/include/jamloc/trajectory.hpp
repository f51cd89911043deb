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

#ifndef JAMLOC_TRAJECTORY_HPP
#define JAMLOC_TRAJECTORY_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"
#include "jamloc/rng.hpp"

namespace jamloc
{

constexpr double kMaxPlatformSpeed = 0.3; // m/s, positioning-system limit

struct JammerSpec
{
    Vec3 position;                        // world frame, meters
    double bandwidth = 20e6;              // Hz
    double sweep_period = 20e-6;          // s
    double power_dbm = 10.0;              // nominal output power
    double center_frequency = 1.57542e9;  // Hz
    bool triangular_sweep = false;        // default sawtooth
    std::string id = "jammer20";

    void validate() const
    {
        if (!(bandwidth > 0.0))
            throw ConfigError("jammer bandwidth must be > 0");
        if (!(sweep_period > 0.0))
            throw ConfigError("jammer sweep_period must be > 0");
        if (!(center_frequency > 0.0))
            throw ConfigError("jammer center_frequency must be > 0");
    }
};

// Four receive elements in the body frame. Default layout: a square of side
// 0.09 m in the body xy-plane, centered at the origin.
struct ArrayGeometry
{
    std::array<Vec3, 4> element_offsets;

    static ArrayGeometry square(double side = 0.09)
    {
        const double h = 0.5 * side;
        ArrayGeometry g;
        g.element_offsets = {Vec3{h, h, 0}, Vec3{-h, h, 0}, Vec3{-h, -h, 0}, Vec3{h, -h, 0}};
        return g;
    }
};

struct TrajectorySpec
{
    int grid_rows = 4;
    int grid_cols = 6;
    std::vector<double> circle_radii = {0.8, 1.1, 1.4, 1.7, 2.0}; // m
    std::vector<double> heights = {4.8, 4.3, 3.8, 3.3};           // m
    double speed = 0.3;      // m/s, per-circle traversal speed (cap)
    double sample_dt = 0.005; // s
    double grid_pitch = 4.5;  // m between adjacent circle centers
    int speed_levels = 1;     // >1: circles run at hashed fractions of `speed`
    bool yaw_follows_velocity = false;

    void validate() const
    {
        if (grid_rows < 1)
            throw ConfigError("trajectory grid_rows must be >= 1");
        if (grid_cols < 1)
            throw ConfigError("trajectory grid_cols must be >= 1");
        if (circle_radii.empty())
            throw ConfigError("trajectory circle_radii must be non-empty");
        for (std::size_t i = 1; i < circle_radii.size(); ++i)
            if (!(circle_radii[i] > circle_radii[i - 1]))
                throw ConfigError("trajectory circle_radii must be strictly increasing");
        for (double r : circle_radii)
            if (!(r > 0.0))
                throw ConfigError("trajectory circle_radii must be positive");
        if (heights.empty())
            throw ConfigError("trajectory heights must be non-empty");
        if (!(speed > 0.0) || speed > kMaxPlatformSpeed)
            throw ConfigError("trajectory speed must be in (0, 0.3] m/s");
        if (!(sample_dt > 0.0))
            throw ConfigError("trajectory sample_dt must be > 0");
        if (!(grid_pitch > 0.0))
            throw ConfigError("trajectory grid_pitch must be > 0");
        if (speed_levels < 1)
            throw ConfigError("trajectory speed_levels must be >= 1");
    }
};

struct CircleSpan
{
    std::size_t first = 0; // index of first pose in the concatenated sequence
    std::size_t count = 0;
    Vec3 center;
    double radius = 0.0;
    double speed = 0.0;
    double start_time = 0.0;
};

struct CircleGridTrajectory
{
    std::vector<PoseSE3> poses;
    std::vector<CircleSpan> circles;
    double sample_dt = 0.0;
};

// Speed level for circle `index`: deterministic hash so speeds decorrelate
// from grid position and radius ordering.
inline double circle_speed(const TrajectorySpec &spec, std::size_t index)
{
    if (spec.speed_levels <= 1)
        return spec.speed;
    std::uint64_t h = derive_stream_seed(0x5eedu, index);
    const int level = static_cast<int>(h % static_cast<std::uint64_t>(spec.speed_levels));
    return spec.speed * static_cast<double>(level + 1) / static_cast<double>(spec.speed_levels);
}

// Concatenated constant-speed circles over a rows x cols grid of centers, at
// every (height, radius) combination. The platform does not rotate unless
// yaw_follows_velocity is set. Timestamps are continuous across circles.
inline CircleGridTrajectory generate_circle_grid_trajectory(const TrajectorySpec &spec,
                                                            const Vec3 &origin)
{
    spec.validate();
    CircleGridTrajectory out;
    out.sample_dt = spec.sample_dt;
    double t = 0.0;
    std::size_t circle_index = 0;
    for (int row = 0; row < spec.grid_rows; ++row)
        for (int col = 0; col < spec.grid_cols; ++col)
            for (double height : spec.heights)
                for (double radius : spec.circle_radii)
                {
                    const Vec3 center = origin + Vec3{col * spec.grid_pitch,
                                                      row * spec.grid_pitch, height};
                    const double v = circle_speed(spec, circle_index);
                    const double omega = v / radius;
                    const double period = 2.0 * kPi / omega;
                    // ceil keeps the last sample within one arc step of closure
                    const auto n = static_cast<std::size_t>(std::ceil(period / spec.sample_dt));
                    if (n < 2)
                        throw ConfigError("trajectory sample_dt too coarse for circle of radius " +
                                          std::to_string(radius));
                    CircleSpan span;
                    span.first = out.poses.size();
                    span.count = n;
                    span.center = center;
                    span.radius = radius;
                    span.speed = v;
                    span.start_time = t;
                    for (std::size_t k = 0; k < n; ++k)
                    {
                        const double tau = k * spec.sample_dt;
                        const double ang = omega * tau;
                        PoseSE3 pose;
                        pose.position = center + Vec3{radius * std::cos(ang),
                                                      radius * std::sin(ang), 0.0};
                        pose.orientation = spec.yaw_follows_velocity
                                               ? quat_yaw(ang + kPi / 2.0)
                                               : Quat{};
                        pose.timestamp = t + tau;
                        out.poses.push_back(pose);
                    }
                    t += n * spec.sample_dt;
                    out.circles.push_back(span);
                    ++circle_index;
                }
    return out;
}

// Ground-truth world velocity on a circle at a given absolute time.
inline Vec3 circle_velocity(const CircleSpan &span, double timestamp)
{
    const double omega = span.speed / span.radius;
    const double ang = omega * (timestamp - span.start_time);
    return {-span.speed * std::sin(ang), span.speed * std::cos(ang), 0.0};
}

} // namespace jamloc

#endif
