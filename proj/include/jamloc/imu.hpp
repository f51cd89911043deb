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

#ifndef JAMLOC_IMU_HPP
#define JAMLOC_IMU_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"
#include "jamloc/rng.hpp"

namespace jamloc
{

struct ImuSample
{
    double timestamp = 0.0;
    Vec3 specific_force; // m/s^2, body frame
    Vec3 angular_rate;   // rad/s, body frame
};

struct ImuNoiseModel
{
    double accel_white_sigma = 0.0; // m/s^2 / sqrt(Hz)
    double gyro_white_sigma = 0.0;  // rad/s / sqrt(Hz)
    Vec3 accel_bias;
    Vec3 gyro_bias;
    double rate = 200.0; // Hz

    void validate() const
    {
        if (accel_white_sigma < 0.0 || gyro_white_sigma < 0.0)
            throw ConfigError("imu noise sigmas must be >= 0");
        if (!(rate > 0.0))
            throw ConfigError("imu rate must be > 0");
    }
};

// K relative poses at the snapshot timestamps of one window, all expressed
// in the frame of the window's first snapshot. Entry 0 is exact identity.
struct RelativePoseSet
{
    double base_timestamp = 0.0;
    struct Entry
    {
        Vec3 delta_position;
        Quat delta_orientation;
    };
    std::vector<Entry> poses;
};

namespace detail
{

// Body angular rate from a central quaternion difference:
// qdot ~ (q[i+1] - q[i-1]) / (2 dt), omega = 2 vec(q^-1 * qdot).
inline Vec3 body_rate(const Quat &prev, const Quat &cur, const Quat &next, double dt)
{
    const Quat qdot{(next.w - prev.w) / (2.0 * dt), (next.x - prev.x) / (2.0 * dt),
                    (next.y - prev.y) / (2.0 * dt), (next.z - prev.z) / (2.0 * dt)};
    const Quat w = cur.conjugate() * qdot;
    return {2.0 * w.x, 2.0 * w.y, 2.0 * w.z};
}

inline std::vector<PoseSE3> resample_poses(const std::vector<PoseSE3> &traj, double rate)
{
    const double dt = 1.0 / rate;
    const double t_begin = traj.front().timestamp;
    const double t_end = traj.back().timestamp;
    const auto n = static_cast<std::size_t>((t_end - t_begin) / dt) + 1;
    std::vector<PoseSE3> out;
    out.reserve(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double t = t_begin + static_cast<double>(i) * dt;
        while (j + 2 < traj.size() && traj[j + 1].timestamp <= t)
            ++j;
        const double span = traj[j + 1].timestamp - traj[j].timestamp;
        const double a = span > 0.0 ? (t - traj[j].timestamp) / span : 0.0;
        PoseSE3 p;
        p.timestamp = t;
        p.position = traj[j].position + a * (traj[j + 1].position - traj[j].position);
        p.orientation = slerp(traj[j].orientation, traj[j + 1].orientation, a);
        out.push_back(p);
    }
    return out;
}

} // namespace detail

// Synthesize IMU measurements along a trajectory: specific force is
// R^T (a_world + g z) with accelerations from central second differences,
// angular rate from quaternion finite differences. White noise of the stated
// density plus the constant biases is added per axis. One sample is emitted
// per interior trajectory node; if the trajectory cadence differs from the
// IMU rate, the poses are first resampled (linear / slerp) onto the rate grid.
inline std::vector<ImuSample> simulate_imu(const std::vector<PoseSE3> &traj,
                                           const ImuNoiseModel &noise, double gravity,
                                           std::uint64_t seed)
{
    noise.validate();
    if (traj.size() < 3)
        throw InsufficientDataError("simulate_imu needs at least 3 poses");

    const double native_dt = (traj.back().timestamp - traj.front().timestamp) /
                             static_cast<double>(traj.size() - 1);
    const double want_dt = 1.0 / noise.rate;
    const bool resample = std::abs(native_dt - want_dt) > 1e-12 * want_dt;
    const std::vector<PoseSE3> &poses = resample ? detail::resample_poses(traj, noise.rate)
                                                 : traj;
    if (poses.size() < 3)
        throw InsufficientDataError("trajectory too short at the requested IMU rate");

    const double dt = resample ? want_dt : native_dt;
    const double accel_sigma = noise.accel_white_sigma * std::sqrt(noise.rate);
    const double gyro_sigma = noise.gyro_white_sigma * std::sqrt(noise.rate);
    const Vec3 g_up{0.0, 0.0, gravity};

    Rng rng(seed);
    std::vector<ImuSample> out;
    out.reserve(poses.size() - 2);
    for (std::size_t i = 1; i + 1 < poses.size(); ++i)
    {
        const Vec3 a_world = (poses[i + 1].position - 2.0 * poses[i].position +
                              poses[i - 1].position) /
                             (dt * dt);
        ImuSample s;
        s.timestamp = poses[i].timestamp;
        s.specific_force = poses[i].orientation.rotate_inverse(a_world + g_up);
        s.angular_rate = detail::body_rate(poses[i - 1].orientation, poses[i].orientation,
                                           poses[i + 1].orientation, dt);
        s.specific_force += noise.accel_bias +
                            Vec3{accel_sigma * rng.gaussian(), accel_sigma * rng.gaussian(),
                                 accel_sigma * rng.gaussian()};
        s.angular_rate += noise.gyro_bias +
                          Vec3{gyro_sigma * rng.gaussian(), gyro_sigma * rng.gaussian(),
                               gyro_sigma * rng.gaussian()};
        out.push_back(s);
    }
    return out;
}

// Strapdown dead reckoning across one snapshot window. Orientation is
// integrated with a midpoint quaternion exponential, velocity and position
// with the trapezoid rule. States at the requested timestamps come from
// linear / slerp interpolation between integration nodes and are rebased so
// the first entry is exact identity. The integration frame is the first
// pose's body frame, assumed level (gravity along -z); initial_velocity is
// expressed in that frame.
inline RelativePoseSet strapdown_relative_poses(const std::vector<ImuSample> &imu,
                                                const std::vector<double> &window,
                                                const Vec3 &initial_velocity, double gravity)
{
    if (window.empty())
        throw InsufficientDataError("strapdown window must contain at least one timestamp");
    if (imu.size() < 2)
        throw InsufficientDataError("strapdown needs at least two IMU samples");
    for (std::size_t i = 1; i < window.size(); ++i)
        if (!(window[i] > window[i - 1]))
            throw ConfigError("strapdown window timestamps must be strictly increasing");
    if (window.front() < imu.front().timestamp - 1e-9 ||
        window.back() > imu.back().timestamp + 1e-9)
        throw CoverageError("snapshot window extends outside the IMU stream");

    // start at the last sample at or before the window start
    std::size_t start = 0;
    while (start + 1 < imu.size() && imu[start + 1].timestamp <= window.front() + 1e-12)
        ++start;

    const Vec3 g_up{0.0, 0.0, gravity};
    struct State
    {
        double t;
        Vec3 p, v;
        Quat q;
    };
    std::vector<State> nodes;
    nodes.reserve(imu.size() - start);

    State cur{imu[start].timestamp, {}, initial_velocity, {}};
    nodes.push_back(cur);
    for (std::size_t i = start; i + 1 < imu.size() && imu[i].timestamp < window.back(); ++i)
    {
        const double dt = imu[i + 1].timestamp - imu[i].timestamp;
        if (!(dt > 0.0))
            throw ConfigError("IMU timestamps must be strictly increasing");
        const Vec3 omega_mid = 0.5 * (imu[i].angular_rate + imu[i + 1].angular_rate);
        const Vec3 a0 = cur.q.rotate(imu[i].specific_force) - g_up;
        State next;
        next.t = imu[i + 1].timestamp;
        next.q = (cur.q * quat_exp(omega_mid * dt)).normalized();
        const Vec3 a1 = next.q.rotate(imu[i + 1].specific_force) - g_up;
        next.v = cur.v + 0.5 * dt * (a0 + a1);
        next.p = cur.p + 0.5 * dt * (cur.v + next.v);
        nodes.push_back(next);
        cur = next;
    }
    if (nodes.size() == 1)
        nodes.push_back(nodes.front()); // single-timestamp window

    const auto state_at = [&nodes](double t) -> State {
        std::size_t j = 0;
        while (j + 2 < nodes.size() && nodes[j + 1].t <= t)
            ++j;
        const double span = nodes[j + 1].t - nodes[j].t;
        const double a = span > 0.0 ? (t - nodes[j].t) / span : 0.0;
        State s;
        s.t = t;
        s.p = nodes[j].p + a * (nodes[j + 1].p - nodes[j].p);
        s.v = nodes[j].v + a * (nodes[j + 1].v - nodes[j].v);
        s.q = slerp(nodes[j].q, nodes[j + 1].q, a);
        return s;
    };

    const State base = state_at(window.front());
    RelativePoseSet rel;
    rel.base_timestamp = window.front();
    rel.poses.reserve(window.size());
    for (std::size_t k = 0; k < window.size(); ++k)
    {
        RelativePoseSet::Entry e;
        if (k == 0)
        {
            e.delta_position = {};
            e.delta_orientation = {};
        }
        else
        {
            const State s = state_at(window[k]);
            e.delta_position = base.q.rotate_inverse(s.p - base.p);
            e.delta_orientation = (base.q.conjugate() * s.q).normalized();
        }
        rel.poses.push_back(e);
    }
    return rel;
}

// CSV stream in the exchange layout: timestamp, fx, fy, fz, wx, wy, wz.
inline void imu_to_csv(const std::vector<ImuSample> &imu, std::ostream &os)
{
    char buf[160];
    os << "timestamp,fx,fy,fz,wx,wy,wz\n";
    for (const auto &s : imu)
    {
        std::snprintf(buf, sizeof buf, "%.9f,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.timestamp,
                      s.specific_force.x, s.specific_force.y, s.specific_force.z,
                      s.angular_rate.x, s.angular_rate.y, s.angular_rate.z);
        os << buf;
    }
}

inline std::vector<ImuSample> imu_from_csv(std::istream &is)
{
    std::vector<ImuSample> out;
    std::string line;
    if (!std::getline(is, line))
        throw FormatError("empty IMU CSV");
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        ImuSample s;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &s.timestamp,
                        &s.specific_force.x, &s.specific_force.y, &s.specific_force.z,
                        &s.angular_rate.x, &s.angular_rate.y, &s.angular_rate.z) != 7)
            throw FormatError("malformed IMU CSV row: " + line);
        out.push_back(s);
    }
    return out;
}

} // namespace jamloc

#endif
