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

#ifndef JAMLOC_RF_HPP
#define JAMLOC_RF_HPP

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"
#include "jamloc/rng.hpp"
#include "jamloc/spectral.hpp"
#include "jamloc/trajectory.hpp"

namespace jamloc
{

constexpr std::size_t kNumChannels = 4;

// One multichannel complex baseband recording.
struct SnapshotIQ
{
    double timestamp = 0.0;
    std::array<std::vector<cplx>, kNumChannels> channels;
    double sample_rate = 40.96e6;

    std::size_t length() const { return channels[0].size(); }
};

struct Reflector
{
    Vec3 point;          // any point on the plane
    Vec3 normal;         // plane normal (normalized on use)
    double gain = 0.5;   // linear amplitude gain of the reflection, <= 1
};

struct ChannelModel
{
    std::vector<Reflector> reflectors;
    double noise_power = 0.0;        // complex variance per sample
    double path_loss_exponent = 1.0; // amplitude falls as 1/d^exponent

    void validate() const
    {
        for (const auto &r : reflectors)
            if (r.gain < 0.0 || r.gain > 1.0)
                throw ConfigError("reflector gain must be within [0, 1]");
        if (noise_power < 0.0)
            throw ConfigError("channel noise_power must be >= 0");
    }
};

struct RecordingConfig
{
    double sample_rate = 40.96e6;      // Hz
    double snapshot_len_s = 3e-3;      // s
    double snapshot_interval_s = 0.2;  // s
    double center_frequency = 1.57542e9;
    double cfo_hz = 0.0;               // injected receiver oscillator offset

    std::size_t snapshot_samples() const
    {
        return static_cast<std::size_t>(std::llround(snapshot_len_s * sample_rate));
    }

    void validate(const JammerSpec &jammer) const
    {
        if (!(sample_rate > 0.0))
            throw ConfigError("recording sample_rate must be > 0");
        if (!(snapshot_len_s > 0.0) || snapshot_len_s >= snapshot_interval_s)
            throw ConfigError("recording snapshot_len_s must be in (0, snapshot_interval_s)");
        if (jammer.bandwidth >= sample_rate)
            throw AliasingError("jammer bandwidth exceeds the recording sample rate");
    }
};

struct Scene
{
    JammerSpec jammer;
    ChannelModel channel;
    ArrayGeometry array = ArrayGeometry::square();
};

// Baseband chirp phase at absolute time t. Sawtooth sweeps run -B/2 -> +B/2
// each period with phase continuous across the reset; the triangular shape
// alternates up and down sweeps.
inline double chirp_phase(const JammerSpec &jammer, double t)
{
    const double bw = jammer.bandwidth;
    const double period = jammer.sweep_period;
    if (!jammer.triangular_sweep)
    {
        double tau = std::fmod(t, period);
        if (tau < 0.0)
            tau += period;
        return 2.0 * kPi * (-0.5 * bw * tau + 0.5 * bw * tau * tau / period);
    }
    double tau = std::fmod(t, 2.0 * period);
    if (tau < 0.0)
        tau += 2.0 * period;
    if (tau < period)
        return 2.0 * kPi * (-0.5 * bw * tau + 0.5 * bw * tau * tau / period);
    const double u = tau - period;
    return 2.0 * kPi * (0.5 * bw * u - 0.5 * bw * u * u / period);
}

// Unit-envelope chirp samples x[k] = exp(j phi(t0 + k / fs)).
inline std::vector<cplx> gen_chirp_baseband(const JammerSpec &jammer, std::size_t n, double fs,
                                            double t0)
{
    jammer.validate();
    if (n == 0)
        throw InsufficientDataError("gen_chirp_baseband requires n > 0");
    if (jammer.bandwidth >= fs)
        throw AliasingError("chirp bandwidth must stay below the sample rate");
    std::vector<cplx> out(n);
    const double dt = 1.0 / fs;
    for (std::size_t k = 0; k < n; ++k)
        out[k] = std::polar(1.0, chirp_phase(jammer, t0 + static_cast<double>(k) * dt));
    return out;
}

// Far-field plane-wave steering coefficients for a source seen along
// `source_dir` (unit vector from the array toward the source):
// a[m] = exp(j 2 pi / lambda * <source_dir, world offset of element m>).
inline std::array<cplx, kNumChannels> array_steering_vector(const ArrayGeometry &geometry,
                                                            const PoseSE3 &pose,
                                                            const Vec3 &source_dir,
                                                            double carrier)
{
    const double n = source_dir.norm();
    if (n == 0.0)
        throw DegenerateGeometryError("steering direction must be nonzero");
    if (std::abs(n - 1.0) > 1e-6)
        throw DegenerateGeometryError("steering direction must be a unit vector");
    const double wavelength = kSpeedOfLight / carrier;
    std::array<cplx, kNumChannels> a;
    for (std::size_t m = 0; m < kNumChannels; ++m)
    {
        const Vec3 world_offset = pose.orientation.rotate(geometry.element_offsets[m]);
        a[m] = std::polar(1.0, 2.0 * kPi / wavelength * dot(source_dir, world_offset));
    }
    return a;
}

namespace detail
{

struct PropagationPath
{
    Vec3 direction;   // unit, from array center toward the (image) source
    double distance;  // m
    double amplitude; // linear
};

// Line of sight plus first-order image sources. A reflection is skipped when
// the source and the receiver sit on opposite sides of the reflector plane.
inline std::vector<PropagationPath> enumerate_paths(const Scene &scene, const Vec3 &rx_center)
{
    std::vector<PropagationPath> paths;
    const double ref_amp = std::pow(10.0, (scene.jammer.power_dbm - 10.0) / 20.0);
    const double gamma = scene.channel.path_loss_exponent;

    const auto add_path = [&](const Vec3 &source, double gain) {
        const Vec3 d = source - rx_center;
        const double dist = d.norm();
        if (dist < 1e-9)
            throw DegenerateGeometryError("receiver coincides with a source position");
        PropagationPath p;
        p.direction = d / dist;
        p.distance = dist;
        p.amplitude = ref_amp * gain / std::pow(dist, gamma);
        paths.push_back(p);
    };

    add_path(scene.jammer.position, 1.0);
    for (const auto &r : scene.channel.reflectors)
    {
        const Vec3 n = normalized(r.normal);
        const double side_src = dot(scene.jammer.position - r.point, n);
        const double side_rx = dot(rx_center - r.point, n);
        if (side_src * side_rx <= 0.0)
            continue; // geometrically impossible reflection
        const Vec3 image = scene.jammer.position - 2.0 * side_src * n;
        add_path(image, r.gain);
    }
    return paths;
}

} // namespace detail

// Render one 4-channel snapshot at a platform pose. Per path, the chirp is
// delayed by a whole number of baseband samples, rotated by the exact carrier
// phase of the path, and weighted with the plane-wave steering coefficients.
// Circular complex white noise of the configured power is added last, so a
// render is the exact sum of its noise-free render and a noise-only render
// with the same seed. Deterministic for a given seed.
inline SnapshotIQ synth_snapshot(const Scene &scene, const PoseSE3 &pose,
                                 const RecordingConfig &cfg, std::uint64_t seed)
{
    scene.jammer.validate();
    scene.channel.validate();
    cfg.validate(scene.jammer);

    const std::size_t n = cfg.snapshot_samples();
    SnapshotIQ snap;
    snap.timestamp = pose.timestamp;
    snap.sample_rate = cfg.sample_rate;
    for (auto &ch : snap.channels)
        ch.assign(n, cplx{0.0, 0.0});

    for (const auto &path : detail::enumerate_paths(scene, pose.position))
    {
        const double delay = path.distance / kSpeedOfLight;
        const auto delay_samples = static_cast<long long>(std::llround(delay * cfg.sample_rate));
        const double t0 = snap.timestamp - static_cast<double>(delay_samples) / cfg.sample_rate;
        const auto chirp = gen_chirp_baseband(scene.jammer, n, cfg.sample_rate, t0);
        const cplx path_gain = std::polar(path.amplitude,
                                          -2.0 * kPi * cfg.center_frequency * delay);
        const auto steer = array_steering_vector(scene.array, pose, path.direction,
                                                 cfg.center_frequency);
        for (std::size_t m = 0; m < kNumChannels; ++m)
        {
            const cplx w = path_gain * steer[m];
            auto &ch = snap.channels[m];
            for (std::size_t k = 0; k < n; ++k)
                ch[k] += w * chirp[k];
        }
    }

    if (cfg.cfo_hz != 0.0)
    {
        const double step = 2.0 * kPi * cfg.cfo_hz / cfg.sample_rate;
        const double base = 2.0 * kPi * cfg.cfo_hz * snap.timestamp;
        for (auto &ch : snap.channels)
            for (std::size_t k = 0; k < n; ++k)
                ch[k] *= std::polar(1.0, base + step * static_cast<double>(k));
    }

    if (scene.channel.noise_power > 0.0)
    {
        Rng rng(seed);
        const double sigma = std::sqrt(0.5 * scene.channel.noise_power);
        for (auto &ch : snap.channels)
            for (std::size_t k = 0; k < n; ++k)
            {
                const auto [re, im] = rng.gaussian_pair();
                ch[k] += cplx{sigma * re, sigma * im};
            }
    }
    return snap;
}

// Contiguous slice of all channels; the timestamp advances by offset / fs.
inline SnapshotIQ crop_window(const SnapshotIQ &s, std::size_t offset, std::size_t len)
{
    if (offset + len > s.length())
        throw BoundsError("crop_window range [" + std::to_string(offset) + ", " +
                          std::to_string(offset + len) + ") exceeds snapshot length " +
                          std::to_string(s.length()));
    SnapshotIQ out;
    out.timestamp = s.timestamp + static_cast<double>(offset) / s.sample_rate;
    out.sample_rate = s.sample_rate;
    for (std::size_t m = 0; m < kNumChannels; ++m)
        out.channels[m].assign(s.channels[m].begin() + static_cast<std::ptrdiff_t>(offset),
                               s.channels[m].begin() + static_cast<std::ptrdiff_t>(offset + len));
    return out;
}

// Convenience wrapper for the spectral module.
inline Spectrogram stft_spectrogram(const SnapshotIQ &s, std::size_t window_len = 512,
                                    std::size_t hop = 256)
{
    std::vector<std::vector<cplx>> chans(kNumChannels);
    for (std::size_t m = 0; m < kNumChannels; ++m)
        chans[m] = s.channels[m];
    return stft_spectrogram(chans, s.sample_rate, s.timestamp, window_len, hop);
}

} // namespace jamloc

#endif
