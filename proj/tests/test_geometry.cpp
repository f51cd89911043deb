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

#include "jamloc/geometry.hpp"
#include "jamloc/rng.hpp"
#include "jamloc/trajectory.hpp"

using namespace jamloc;

TEST_CASE("wrap_angle_deg maps into (-180, 180]")
{
    CHECK(wrap_angle_deg(190.0) == Catch::Approx(-170.0));
    CHECK(wrap_angle_deg(-181.0) == Catch::Approx(179.0));
    CHECK(wrap_angle_deg(0.0) == 0.0);
    CHECK(wrap_angle_deg(180.0) == 180.0);
    CHECK(wrap_angle_deg(-180.0) == 180.0);
    CHECK(wrap_angle_deg(540.0) == 180.0);
}

TEST_CASE("wrap_angle_deg is idempotent and 360-periodic")
{
    Rng rng(11);
    for (int i = 0; i < 500; ++i)
    {
        const double a = rng.uniform(-2000.0, 2000.0);
        const double w = wrap_angle_deg(a);
        CHECK(w > -180.0);
        CHECK(w <= 180.0);
        CHECK(wrap_angle_deg(w) == Catch::Approx(w).margin(1e-12));
        CHECK(wrap_angle_deg(a + 360.0) == Catch::Approx(w).margin(1e-9));
        CHECK(wrap_angle_deg(a - 720.0) == Catch::Approx(w).margin(1e-9));
    }
    CHECK_THROWS_AS(wrap_angle_deg(std::numeric_limits<double>::infinity()), NumericalError);
}

TEST_CASE("relative_to_jammer analytic cases")
{
    SECTION("antenna on +x axis, jammer at origin")
    {
        const auto rec = relative_to_jammer({1, 0, 0}, {0, 0, 0});
        CHECK(rec.delta.x == Catch::Approx(-1.0));
        CHECK(rec.delta.y == 0.0);
        CHECK(rec.distance == Catch::Approx(1.0));
        CHECK(rec.azimuth == Catch::Approx(180.0));
        CHECK(rec.elevation == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("straight down: pole convention pins azimuth to 0")
    {
        const auto rec = relative_to_jammer({0, 0, 1}, {0, 0, 0});
        CHECK(rec.delta.z == Catch::Approx(-1.0));
        CHECK(rec.elevation == Catch::Approx(-90.0));
        CHECK(rec.azimuth == 0.0);
        CHECK(rec.distance == Catch::Approx(1.0));
    }
    SECTION("diagonal")
    {
        const auto rec = relative_to_jammer({0, 0, 0}, {1, 1, std::sqrt(2.0)});
        CHECK(rec.azimuth == Catch::Approx(45.0));
        CHECK(rec.elevation == Catch::Approx(45.0));
        CHECK(rec.distance == Catch::Approx(2.0));
    }
    SECTION("coincident points are rejected")
    {
        CHECK_THROWS_AS(relative_to_jammer({1, 2, 3}, {1, 2, 3}), DegenerateGeometryError);
    }
}

TEST_CASE("angles round-trip the displacement vector")
{
    Rng rng(22);
    for (int i = 0; i < 300; ++i)
    {
        const Vec3 delta{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
        if (delta.norm() < 1e-6)
            continue;
        const auto rec = relative_to_jammer({0, 0, 0}, delta);
        const Vec3 rebuilt = rec.distance * angles_to_direction(rec.azimuth, rec.elevation);
        CHECK((rebuilt - delta).norm() < 1e-9);
        CHECK(rec.distance == Catch::Approx(delta.norm()).epsilon(1e-12));
    }
}

TEST_CASE("quaternion rotation basics")
{
    const Quat yaw90 = quat_yaw(kPi / 2.0);
    const Vec3 r = yaw90.rotate({1, 0, 0});
    CHECK(r.x == Catch::Approx(0.0).margin(1e-12));
    CHECK(r.y == Catch::Approx(1.0));

    // rotate and rotate_inverse are inverses
    Rng rng(5);
    for (int i = 0; i < 50; ++i)
    {
        const Quat q = quat_from_axis_angle(
            {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 1)}, rng.uniform(-3, 3));
        const Vec3 v{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        CHECK((q.rotate_inverse(q.rotate(v)) - v).norm() < 1e-12);
        CHECK(q.norm() == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("circle grid reproduces the campaign layout: 480 circles")
{
    TrajectorySpec spec; // defaults: 4x6 grid, 5 radii, 4 heights
    spec.sample_dt = 0.05;
    const auto traj = generate_circle_grid_trajectory(spec, {0, 0, 0});
    CHECK(traj.circles.size() == 4u * 6u * 5u * 4u);
    CHECK(traj.circles.size() == 480u);
}

TEST_CASE("single circle parametrization")
{
    TrajectorySpec spec;
    spec.grid_rows = spec.grid_cols = 1;
    spec.circle_radii = {1.0};
    spec.heights = {0.0};
    spec.speed = 0.1;
    spec.sample_dt = 0.01;
    const auto traj = generate_circle_grid_trajectory(spec, {0, 0, 0});

    const double period = 2.0 * kPi * 1.0 / 0.1; // 2*pi*10 s
    CHECK(static_cast<double>(traj.circles[0].count) * spec.sample_dt ==
          Catch::Approx(period).margin(spec.sample_dt));

    const auto &first = traj.poses.front();
    CHECK(first.position.x == Catch::Approx(1.0));
    CHECK(first.position.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(first.orientation.is_identity());
}

TEST_CASE("emitted poses move at the configured speed")
{
    TrajectorySpec spec;
    spec.grid_rows = spec.grid_cols = 1;
    spec.circle_radii = {0.8};
    spec.heights = {2.0};
    spec.speed = 0.3;
    spec.sample_dt = 0.01;
    const auto traj = generate_circle_grid_trajectory(spec, {0, 0, 0});

    // angular rate 0.375 rad/s; consecutive samples 0.3*dt apart in arc length
    const double omega = spec.speed / 0.8;
    CHECK(omega == Catch::Approx(0.375));
    for (std::size_t i = 1; i < traj.poses.size(); ++i)
    {
        const double chord = (traj.poses[i].position - traj.poses[i - 1].position).norm();
        const double arc = 2.0 * 0.8 * std::sin(0.5 * omega * spec.sample_dt);
        CHECK(chord == Catch::Approx(arc).epsilon(1e-9));
        CHECK(chord / spec.sample_dt <= kMaxPlatformSpeed + 1e-6);
        CHECK(chord / spec.sample_dt == Catch::Approx(spec.speed).epsilon(1e-4));
    }
}

TEST_CASE("speed cap and circle closure hold across a mixed grid")
{
    TrajectorySpec spec;
    spec.grid_rows = 2;
    spec.grid_cols = 2;
    spec.circle_radii = {0.8, 1.3};
    spec.heights = {3.3, 4.8};
    spec.speed = 0.3;
    spec.speed_levels = 4;
    spec.sample_dt = 0.02;
    const auto traj = generate_circle_grid_trajectory(spec, {1, 2, 0});

    for (const auto &span : traj.circles)
    {
        const double arc_step = span.speed * spec.sample_dt;
        const auto &first = traj.poses[span.first];
        const auto &last = traj.poses[span.first + span.count - 1];
        CHECK((last.position - first.position).norm() <= arc_step + 1e-9);
        CHECK(span.speed <= spec.speed + 1e-12);
        for (std::size_t i = span.first + 1; i < span.first + span.count; ++i)
        {
            const double v = (traj.poses[i].position - traj.poses[i - 1].position).norm() /
                             spec.sample_dt;
            CHECK(v <= kMaxPlatformSpeed + 1e-6);
        }
    }

    // timestamps are continuous and strictly increasing across circles
    for (std::size_t i = 1; i < traj.poses.size(); ++i)
        CHECK(traj.poses[i].timestamp > traj.poses[i - 1].timestamp);
}

TEST_CASE("invalid trajectory specs name the offending field")
{
    TrajectorySpec spec;
    spec.speed = 0.5;
    CHECK_THROWS_WITH(generate_circle_grid_trajectory(spec, {0, 0, 0}),
                      Catch::Matchers::ContainsSubstring("speed"));
    spec.speed = 0.2;
    spec.circle_radii = {1.0, 0.5};
    CHECK_THROWS_WITH(generate_circle_grid_trajectory(spec, {0, 0, 0}),
                      Catch::Matchers::ContainsSubstring("circle_radii"));
    spec.circle_radii = {1.0};
    spec.heights = {};
    CHECK_THROWS_WITH(generate_circle_grid_trajectory(spec, {0, 0, 0}),
                      Catch::Matchers::ContainsSubstring("heights"));
}

TEST_CASE("yaw-follows-velocity mode rotates the platform")
{
    TrajectorySpec spec;
    spec.grid_rows = spec.grid_cols = 1;
    spec.circle_radii = {1.0};
    spec.heights = {1.0};
    spec.speed = 0.2;
    spec.sample_dt = 0.05;
    spec.yaw_follows_velocity = true;
    const auto traj = generate_circle_grid_trajectory(spec, {0, 0, 0});
    CHECK_FALSE(traj.poses[10].orientation.is_identity(1e-3));

    // body +x should align with the velocity direction
    const auto &span = traj.circles[0];
    const Vec3 v = circle_velocity(span, traj.poses[10].timestamp);
    const Vec3 body_x = traj.poses[10].orientation.rotate({1, 0, 0});
    CHECK(dot(normalized(v), body_x) == Catch::Approx(1.0).epsilon(1e-9));
}
