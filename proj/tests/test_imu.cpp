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

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "jamloc/imu.hpp"
#include "jamloc/trajectory.hpp"

using namespace jamloc;

namespace
{

// analytic circle in the xy-plane, identity orientation
std::vector<PoseSE3> circle_poses(double radius, double speed, double rate, double duration,
                                  double height = 0.0)
{
    const double omega = speed / radius;
    std::vector<PoseSE3> out;
    const auto n = static_cast<std::size_t>(duration * rate) + 1;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double t = static_cast<double>(i) / rate;
        PoseSE3 p;
        p.timestamp = t;
        p.position = {radius * std::cos(omega * t), radius * std::sin(omega * t), height};
        out.push_back(p);
    }
    return out;
}

Vec3 circle_pos(double radius, double speed, double t)
{
    const double omega = speed / radius;
    return {radius * std::cos(omega * t), radius * std::sin(omega * t), 0.0};
}

Vec3 circle_vel(double radius, double speed, double t)
{
    const double omega = speed / radius;
    return {-speed * std::sin(omega * t), speed * std::cos(omega * t), 0.0};
}

} // namespace

TEST_CASE("a resting accelerometer reads +g on the z axis")
{
    std::vector<PoseSE3> still(8);
    for (std::size_t i = 0; i < still.size(); ++i)
        still[i].timestamp = static_cast<double>(i) * 0.005;

    ImuNoiseModel noise; // all zeros, 200 Hz
    const auto imu = simulate_imu(still, noise, kGravity, 1);
    REQUIRE(imu.size() == still.size() - 2);
    for (const auto &s : imu)
    {
        CHECK(s.specific_force.x == Catch::Approx(0.0).margin(1e-12));
        CHECK(s.specific_force.y == Catch::Approx(0.0).margin(1e-12));
        CHECK(s.specific_force.z == Catch::Approx(kGravity).margin(1e-9));
        CHECK(s.angular_rate.norm() < 1e-12);
    }
}

TEST_CASE("uniform circular motion shows the centripetal specific force")
{
    const double r = 1.0, v = 0.3;
    const auto traj = circle_poses(r, v, 200.0, 4.0);
    ImuNoiseModel noise;
    const auto imu = simulate_imu(traj, noise, kGravity, 1);

    for (std::size_t i = 0; i < imu.size(); i += 50)
    {
        const Vec3 f = imu[i].specific_force;
        const double horiz = std::hypot(f.x, f.y);
        CHECK(horiz == Catch::Approx(v * v / r).epsilon(1e-4)); // 0.09 m/s^2
        // pointing toward the circle center
        const Vec3 center_dir = normalized(-1.0 * circle_pos(r, v, imu[i].timestamp));
        CHECK(dot(normalized({f.x, f.y, 0.0}), center_dir) == Catch::Approx(1.0).epsilon(1e-6));
        CHECK(f.z == Catch::Approx(kGravity).margin(1e-9));
    }
}

TEST_CASE("white noise density scales to the sample rate")
{
    std::vector<PoseSE3> still(100002);
    const double rate = 200.0;
    for (std::size_t i = 0; i < still.size(); ++i)
        still[i].timestamp = static_cast<double>(i) / rate;

    ImuNoiseModel noise;
    noise.accel_white_sigma = 0.02;
    noise.gyro_white_sigma = 0.003;
    noise.rate = rate;
    const auto imu = simulate_imu(still, noise, kGravity, 99);
    REQUIRE(imu.size() == 100000);

    double var_ax = 0.0, var_gz = 0.0;
    for (const auto &s : imu)
    {
        var_ax += s.specific_force.x * s.specific_force.x;
        var_gz += s.angular_rate.z * s.angular_rate.z;
    }
    var_ax /= static_cast<double>(imu.size());
    var_gz /= static_cast<double>(imu.size());
    CHECK(std::sqrt(var_ax) == Catch::Approx(0.02 * std::sqrt(rate)).epsilon(0.05));
    CHECK(std::sqrt(var_gz) == Catch::Approx(0.003 * std::sqrt(rate)).epsilon(0.05));

    // constant bias shifts the mean
    ImuNoiseModel biased;
    biased.accel_bias = {0.5, 0, 0};
    const auto imu_b = simulate_imu(std::vector<PoseSE3>(still.begin(), still.begin() + 1000),
                                    biased, kGravity, 7);
    double mean = 0.0;
    for (const auto &s : imu_b)
        mean += s.specific_force.x;
    CHECK(mean / static_cast<double>(imu_b.size()) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("simulate_imu rejects trajectories with fewer than 3 poses")
{
    std::vector<PoseSE3> two(2);
    two[1].timestamp = 0.005;
    CHECK_THROWS_AS(simulate_imu(two, ImuNoiseModel{}, kGravity, 1), InsufficientDataError);
}

TEST_CASE("strapdown of all-zero motion stays at identity")
{
    std::vector<ImuSample> imu(200);
    for (std::size_t i = 0; i < imu.size(); ++i)
    {
        imu[i].timestamp = static_cast<double>(i) * 0.005;
        imu[i].specific_force = {0, 0, kGravity};
    }
    const std::vector<double> window{0.0, 0.2, 0.4, 0.6, 0.8};
    const auto rel = strapdown_relative_poses(imu, window, {0, 0, 0}, kGravity);
    REQUIRE(rel.poses.size() == 5);
    CHECK(rel.base_timestamp == 0.0);
    for (const auto &p : rel.poses)
    {
        CHECK(p.delta_position.norm() < 1e-12);
        CHECK(p.delta_orientation.is_identity(1e-12));
    }
}

TEST_CASE("noiseless strapdown tracks a circle within a centimeter")
{
    const double r = 1.0, v = 0.3, rate = 200.0;
    const auto traj = circle_poses(r, v, rate, 2.0);
    const auto imu = simulate_imu(traj, ImuNoiseModel{}, kGravity, 1);

    const double t0 = 0.1;
    std::vector<double> window;
    for (int k = 0; k < 5; ++k)
        window.push_back(t0 + 0.2 * k);
    const auto rel = strapdown_relative_poses(imu, window, circle_vel(r, v, t0), kGravity);
    REQUIRE(rel.poses.size() == 5);
    CHECK(rel.poses[0].delta_position.norm() == 0.0); // exact identity

    for (int k = 1; k < 5; ++k)
    {
        const Vec3 want = circle_pos(r, v, window[k]) - circle_pos(r, v, t0);
        const Vec3 got = rel.poses[k].delta_position;
        CHECK((got - want).norm() < 0.01);
        CHECK((got - want).norm() < 1e-4); // actual accuracy is far better
        CHECK(rel.poses[k].delta_orientation.norm() == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("strapdown integrates yawing trajectories with unit quaternions")
{
    TrajectorySpec spec;
    spec.grid_rows = spec.grid_cols = 1;
    spec.circle_radii = {1.0};
    spec.heights = {0.0};
    spec.speed = 0.25;
    spec.sample_dt = 0.005;
    spec.yaw_follows_velocity = true;
    const auto traj = generate_circle_grid_trajectory(spec, {0, 0, 0});
    const auto imu = simulate_imu(traj.poses, ImuNoiseModel{}, kGravity, 1);

    std::vector<double> window{0.5, 0.7, 0.9, 1.1, 1.3};
    // initial velocity in the first-pose body frame
    const auto &span = traj.circles[0];
    const Vec3 v_world = circle_velocity(span, 0.5);
    const std::size_t i0 = static_cast<std::size_t>(0.5 / spec.sample_dt);
    const Vec3 v_body = traj.poses[i0].orientation.rotate_inverse(v_world);

    const auto rel = strapdown_relative_poses(imu, window, v_body, kGravity);
    for (const auto &p : rel.poses)
        CHECK(p.delta_orientation.norm() == Catch::Approx(1.0).epsilon(1e-12));
    // yaw advances omega * dt between snapshots
    const double omega = spec.speed / 1.0;
    const double got_yaw = 2.0 * std::atan2(rel.poses[4].delta_orientation.z,
                                            rel.poses[4].delta_orientation.w);
    CHECK(got_yaw == Catch::Approx(omega * 0.8).epsilon(0.02));
}

TEST_CASE("dead-reckoning error grows with the injected noise scale")
{
    const double r = 1.0, v = 0.3, rate = 200.0;
    const auto traj = circle_poses(r, v, rate, 1.1);
    const std::vector<double> window{0.1, 0.3, 0.5, 0.7, 0.9};
    const Vec3 v0 = circle_vel(r, v, 0.1);
    const Vec3 want = circle_pos(r, v, 0.9) - circle_pos(r, v, 0.1);

    const double scales[3] = {0.0, 1.0, 4.0};
    double mean_err[3] = {0, 0, 0};
    for (int seed = 0; seed < 50; ++seed)
        for (int level = 0; level < 3; ++level)
        {
            ImuNoiseModel noise;
            noise.accel_white_sigma = 0.02 * scales[level];
            noise.gyro_white_sigma = 0.002 * scales[level];
            noise.rate = rate;
            const auto imu = simulate_imu(traj, noise, kGravity,
                                          derive_stream_seed(4242, seed));
            const auto rel = strapdown_relative_poses(imu, window, v0, kGravity);
            mean_err[level] += (rel.poses[4].delta_position - want).norm();
        }
    CHECK(mean_err[0] < mean_err[1]);
    CHECK(mean_err[1] < mean_err[2]);
}

TEST_CASE("higher IMU rates integrate more accurately")
{
    const double r = 1.0, v = 0.3;
    const std::vector<double> window{0.1, 0.3, 0.5, 0.7, 0.9};
    const Vec3 v0 = circle_vel(r, v, 0.1);
    const Vec3 want = circle_pos(r, v, 0.9) - circle_pos(r, v, 0.1);

    const auto run = [&](double rate) {
        ImuNoiseModel noise;
        noise.rate = rate;
        const auto traj = circle_poses(r, v, rate, 1.1);
        const auto imu = simulate_imu(traj, noise, kGravity, 1);
        const auto rel = strapdown_relative_poses(imu, window, v0, kGravity);
        return (rel.poses[4].delta_position - want).norm();
    };
    const double err_100 = run(100.0);
    const double err_400 = run(400.0);
    CHECK(err_400 < err_100);
}

TEST_CASE("strapdown refuses windows outside the IMU span")
{
    std::vector<ImuSample> imu(10);
    for (std::size_t i = 0; i < imu.size(); ++i)
        imu[i].timestamp = static_cast<double>(i) * 0.01;
    CHECK_THROWS_AS(strapdown_relative_poses(imu, {0.05, 0.5}, {0, 0, 0}, kGravity),
                    CoverageError);
    CHECK_THROWS_AS(strapdown_relative_poses(imu, {-0.5, 0.05}, {0, 0, 0}, kGravity),
                    CoverageError);
    CHECK_THROWS_AS(strapdown_relative_poses(imu, {}, {0, 0, 0}, kGravity),
                    InsufficientDataError);
}

TEST_CASE("imu csv round-trips")
{
    const auto traj = circle_poses(0.9, 0.2, 200.0, 0.5);
    ImuNoiseModel noise;
    noise.accel_white_sigma = 0.01;
    noise.rate = 200.0;
    const auto imu = simulate_imu(traj, noise, kGravity, 3);

    std::ostringstream os;
    imu_to_csv(imu, os);
    std::istringstream is(os.str());
    const auto back = imu_from_csv(is);
    REQUIRE(back.size() == imu.size());
    for (std::size_t i = 0; i < imu.size(); ++i)
    {
        CHECK(back[i].timestamp == Catch::Approx(imu[i].timestamp).margin(1e-9));
        CHECK((back[i].specific_force - imu[i].specific_force).norm() < 1e-9);
        CHECK((back[i].angular_rate - imu[i].angular_rate).norm() < 1e-9);
    }
}
