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

#ifndef JAMLOC_APERTURE_HPP
#define JAMLOC_APERTURE_HPP

#include <array>
#include <cmath>
#include <vector>

#include "jamloc/aoa.hpp"
#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"
#include "jamloc/imu.hpp"
#include "jamloc/rf.hpp"

namespace jamloc
{

// Multi-snapshot observation set: K windows recorded at K platform poses,
// with poses expressed relative to the first entry (entry 0 is identity).
struct ApertureBuffer
{
    struct Entry
    {
        SnapshotIQ window;             // short crop, e.g. 1024 samples
        RelativePoseSet::Entry pose;   // relative to entry 0
    };
    std::vector<Entry> entries;
    double carrier = 1.57542e9;
    ArrayGeometry geometry = ArrayGeometry::square();

    void validate() const
    {
        if (entries.empty())
            throw InsufficientDataError("aperture buffer is empty");
        if (entries.front().pose.delta_position.norm() > 1e-12 ||
            !entries.front().pose.delta_orientation.is_identity(1e-9))
            throw ConfigError("aperture buffer entry 0 must carry the identity pose");
        for (std::size_t k = 1; k < entries.size(); ++k)
            if (!(entries[k].window.timestamp > entries[k - 1].window.timestamp))
                throw ConfigError("aperture buffer timestamps must be strictly increasing");
    }
};

// Cross-snapshot combination. The jammer oscillator cannot be assumed stable
// across the 200 ms snapshot spacing, so the default adds per-snapshot powers
// and draws its benefit from averaging differently-biased single-snapshot
// patterns. The coherent mode phase-aligns windows through the lag-0
// cross-correlation of the reference channel and sums amplitudes before the
// magnitude; it needs an oscillator-locked scene whose waveform repeats with
// the snapshot interval, which holds for the simulator defaults.
enum class ApertureMode
{
    PowerSum,
    Coherent
};

struct ApertureMap
{
    AngleGrid grid;
    std::vector<double> power; // az-major, el inner
    double peak_azimuth = 0.0;
    double peak_elevation = 0.0;
    std::size_t peak_az_index = 0;
    std::size_t peak_el_index = 0;
    double half_power_width_az = 0.0; // deg, at the argmax elevation row

    double at(std::size_t az_idx, std::size_t el_idx) const
    {
        return power[az_idx * grid.elevations.size() + el_idx];
    }
};

namespace detail
{

// Unit-norm spatial signature of a window: dominant eigenvector of its
// covariance, phase-anchored on the reference channel so the anchor choice
// never flips between the windows of one buffer. Channel 0 is the anchor
// unless its component is degenerate.
inline std::array<cplx, kNumChannels> spatial_signature(const SnapshotIQ &window)
{
    const auto eig = hermitian_eig(spatial_covariance(window).matrix);
    std::array<cplx, kNumChannels> v;
    double vmax = 0.0;
    for (std::size_t r = 0; r < kNumChannels; ++r)
    {
        v[r] = eig.eigenvectors.at(r, 0);
        vmax = std::max(vmax, std::abs(v[r]));
    }
    if (vmax == 0.0)
        throw NumericalError("window has no dominant spatial component");
    std::size_t anchor = 0;
    if (std::abs(v[0]) < 0.1 * vmax)
        for (std::size_t r = 1; r < kNumChannels; ++r)
            if (std::abs(v[r]) > std::abs(v[anchor]))
                anchor = r;
    const cplx rot = std::conj(v[anchor]) / std::abs(v[anchor]);
    for (auto &c : v)
        c *= rot;
    return v;
}

// Phase of window k relative to window 0, from the reference channel.
inline cplx interwindow_phasor(const SnapshotIQ &ref, const SnapshotIQ &win)
{
    const std::size_t n = std::min(ref.length(), win.length());
    cplx acc{0, 0};
    for (std::size_t m = 0; m < n; ++m)
        acc += win.channels[0][m] * std::conj(ref.channels[0][m]);
    const double mag = std::abs(acc);
    if (mag == 0.0)
        return cplx{1.0, 0.0};
    return acc / mag;
}

// Circular half-power width along the azimuth axis at one elevation row,
// with linear interpolation at the crossings.
inline double half_power_width(const std::vector<double> &row, std::size_t peak,
                               const std::vector<double> &azimuths)
{
    const std::size_t n = row.size();
    if (n < 2)
        return 360.0;
    const double half = 0.5 * row[peak];
    const double step = (azimuths.back() - azimuths.front()) / static_cast<double>(n - 1);

    const auto walk = [&](long long dir) -> double {
        const auto nn = static_cast<long long>(n);
        double width = 0.0;
        std::size_t prev = peak;
        for (long long moved = 1; moved < nn; ++moved)
        {
            const long long wrapped = ((static_cast<long long>(peak) + dir * moved) % nn + nn) % nn;
            const auto cur = static_cast<std::size_t>(wrapped);
            if (row[cur] < half)
            {
                const double denom = row[prev] - row[cur];
                const double frac = denom > 0.0 ? (row[prev] - half) / denom : 0.5;
                return (static_cast<double>(moved - 1) + frac) * step;
            }
            prev = cur;
            width = static_cast<double>(moved) * step;
        }
        return width; // never dropped below half within a full turn
    };

    return std::min(walk(+1) + walk(-1), 360.0);
}

} // namespace detail

// Delay-and-sum map over platform motion. Each pose contributes a steering
// vector evaluated at its four virtual element positions (rotated offsets
// plus the relative displacement), whose translation term carries the
// inter-pose propagation phase 2 pi / lambda * <u, delta_p>.
inline ApertureMap backprojection_map(const ApertureBuffer &buf, const AngleGrid &grid,
                                      ApertureMode mode = ApertureMode::PowerSum)
{
    buf.validate();
    grid.validate();
    const std::size_t n_el = grid.elevations.size();
    const double wavelength = kSpeedOfLight / buf.carrier;
    const double wavenumber = 2.0 * kPi / wavelength;

    // per-entry signatures, phase-aligned across windows in coherent mode
    std::vector<std::array<cplx, kNumChannels>> sig(buf.entries.size());
    for (std::size_t k = 0; k < buf.entries.size(); ++k)
    {
        sig[k] = detail::spatial_signature(buf.entries[k].window);
        if (mode == ApertureMode::Coherent && k > 0)
        {
            const cplx ph = detail::interwindow_phasor(buf.entries[0].window,
                                                       buf.entries[k].window);
            for (auto &c : sig[k])
                c *= ph;
        }
    }

    // virtual element positions per entry
    std::vector<std::array<Vec3, kNumChannels>> elems(buf.entries.size());
    for (std::size_t k = 0; k < buf.entries.size(); ++k)
        for (std::size_t m = 0; m < kNumChannels; ++m)
            elems[k][m] = buf.entries[k].pose.delta_orientation.rotate(
                              buf.geometry.element_offsets[m]) +
                          buf.entries[k].pose.delta_position;

    ApertureMap out;
    out.grid = grid;
    out.power.resize(grid.size());
    double best = -1.0;
    for (std::size_t ia = 0; ia < grid.azimuths.size(); ++ia)
        for (std::size_t ie = 0; ie < n_el; ++ie)
        {
            const Vec3 u = angles_to_direction(grid.azimuths[ia], grid.elevations[ie]);
            double power_acc = 0.0;
            cplx coherent_acc{0, 0};
            for (std::size_t k = 0; k < buf.entries.size(); ++k)
            {
                cplx corr{0, 0};
                for (std::size_t m = 0; m < kNumChannels; ++m)
                {
                    const cplx steer = std::polar(1.0, wavenumber * dot(u, elems[k][m]));
                    corr += std::conj(steer) * sig[k][m];
                }
                if (mode == ApertureMode::PowerSum)
                    power_acc += std::norm(corr);
                else
                    coherent_acc += corr;
            }
            const double p = mode == ApertureMode::PowerSum ? power_acc
                                                            : std::norm(coherent_acc);
            out.power[ia * n_el + ie] = p;
            if (p > best)
            {
                best = p;
                out.peak_az_index = ia;
                out.peak_el_index = ie;
            }
        }
    out.peak_azimuth = grid.azimuths[out.peak_az_index];
    out.peak_elevation = grid.elevations[out.peak_el_index];

    std::vector<double> row(grid.azimuths.size());
    for (std::size_t ia = 0; ia < grid.azimuths.size(); ++ia)
        row[ia] = out.at(ia, out.peak_el_index);
    out.half_power_width_az = detail::half_power_width(row, out.peak_az_index, grid.azimuths);
    return out;
}

struct ApertureEstimate
{
    double azimuth = 0.0;   // deg
    double elevation = 0.0; // deg
    double quality = 0.0;   // peak power over mean power
};

inline ApertureEstimate aperture_estimate(const ApertureBuffer &buf, const AngleGrid &grid,
                                          ApertureMode mode = ApertureMode::PowerSum)
{
    const auto map = backprojection_map(buf, grid, mode);
    double mean = 0.0;
    for (double p : map.power)
        mean += p;
    mean /= static_cast<double>(map.power.size());
    ApertureEstimate est;
    est.azimuth = map.peak_azimuth;
    est.elevation = map.peak_elevation;
    est.quality = mean > 0.0 ? map.at(map.peak_az_index, map.peak_el_index) / mean : 0.0;
    return est;
}

inline void aperture_map_to_csv(const ApertureMap &map, std::ostream &os)
{
    char buf[96];
    os << "az_deg,el_deg,power\n";
    for (std::size_t ia = 0; ia < map.grid.azimuths.size(); ++ia)
        for (std::size_t ie = 0; ie < map.grid.elevations.size(); ++ie)
        {
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", map.grid.azimuths[ia],
                          map.grid.elevations[ie], map.at(ia, ie));
            os << buf;
        }
}

} // namespace jamloc

#endif
