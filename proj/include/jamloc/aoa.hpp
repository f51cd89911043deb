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

#ifndef JAMLOC_AOA_HPP
#define JAMLOC_AOA_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"
#include "jamloc/linalg.hpp"
#include "jamloc/rf.hpp"

namespace jamloc
{

constexpr std::size_t kAoaFeatureCount = 22;

struct SpatialCovariance
{
    CMatrix matrix; // 4x4 Hermitian
    std::size_t snapshot_count = 0;
};

// R = (1/N) sum x[n] x[n]^H over the 4-vector of channel samples. The upper
// triangle is computed and mirrored, so the result is Hermitian exactly.
inline SpatialCovariance spatial_covariance(const SnapshotIQ &window)
{
    const std::size_t n = window.length();
    if (n == 0)
        throw InsufficientDataError("spatial_covariance needs a non-empty window");
    SpatialCovariance out;
    out.matrix = CMatrix(kNumChannels, kNumChannels);
    out.snapshot_count = n;
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < kNumChannels; ++r)
        for (std::size_t c = r; c < kNumChannels; ++c)
        {
            cplx acc{0, 0};
            const auto &xr = window.channels[r];
            const auto &xc = window.channels[c];
            for (std::size_t k = 0; k < n; ++k)
                acc += xr[k] * std::conj(xc[k]);
            acc *= inv;
            if (r == c)
                out.matrix.at(r, c) = cplx{acc.real(), 0.0};
            else
            {
                out.matrix.at(r, c) = acc;
                out.matrix.at(c, r) = std::conj(acc);
            }
        }
    return out;
}

struct AngleGrid
{
    std::vector<double> azimuths;   // deg, sorted, within (-180, 180]
    std::vector<double> elevations; // deg, sorted, within [-90, 90]

    static AngleGrid regular(double az_step = 1.0, double el_min = -90.0, double el_max = 0.0,
                             double el_step = 1.0)
    {
        AngleGrid g;
        for (double az = -180.0 + az_step; az <= 180.0 + 1e-9; az += az_step)
            g.azimuths.push_back(az > 180.0 ? 180.0 : az);
        for (double el = el_min; el <= el_max + 1e-9; el += el_step)
            g.elevations.push_back(el > el_max ? el_max : el);
        g.validate();
        return g;
    }

    void validate() const
    {
        if (azimuths.empty() || elevations.empty())
            throw ConfigError("angle grid must be non-empty");
        for (std::size_t i = 0; i < azimuths.size(); ++i)
        {
            if (azimuths[i] <= -180.0 || azimuths[i] > 180.0)
                throw ConfigError("grid azimuths must lie in (-180, 180]");
            if (i > 0 && azimuths[i] <= azimuths[i - 1])
                throw ConfigError("grid azimuths must be strictly increasing");
        }
        for (std::size_t i = 0; i < elevations.size(); ++i)
        {
            if (elevations[i] < -90.0 || elevations[i] > 90.0)
                throw ConfigError("grid elevations must lie in [-90, 90]");
            if (i > 0 && elevations[i] <= elevations[i - 1])
                throw ConfigError("grid elevations must be strictly increasing");
        }
    }

    std::size_t size() const { return azimuths.size() * elevations.size(); }
};

// Precomputed steering vectors over a grid; reused across windows whenever
// geometry, carrier and platform orientation are unchanged.
struct SteeringTable
{
    AngleGrid grid;
    std::vector<std::array<cplx, kNumChannels>> vectors; // az-major, el inner
    double carrier = 0.0;

    const std::array<cplx, kNumChannels> &at(std::size_t az_idx, std::size_t el_idx) const
    {
        return vectors[az_idx * grid.elevations.size() + el_idx];
    }
};

inline SteeringTable make_steering_table(const ArrayGeometry &geometry, const AngleGrid &grid,
                                         double carrier, const Quat &orientation = Quat{})
{
    grid.validate();
    SteeringTable table;
    table.grid = grid;
    table.carrier = carrier;
    table.vectors.reserve(grid.size());
    PoseSE3 pose;
    pose.orientation = orientation;
    for (double az : grid.azimuths)
        for (double el : grid.elevations)
            table.vectors.push_back(
                array_steering_vector(geometry, pose, angles_to_direction(az, el), carrier));
    return table;
}

enum class BeamMethod
{
    Bartlett,
    Capon,
    Music
};

inline const char *beam_method_name(BeamMethod m)
{
    switch (m)
    {
    case BeamMethod::Bartlett: return "bartlett";
    case BeamMethod::Capon: return "capon";
    default: return "music";
    }
}

struct BeamscanResult
{
    AngleGrid grid;
    std::vector<double> spectrum; // az-major, el inner; linear power
    double peak_azimuth = 0.0;
    double peak_elevation = 0.0;
    std::size_t peak_az_index = 0;
    std::size_t peak_el_index = 0;

    double at(std::size_t az_idx, std::size_t el_idx) const
    {
        return spectrum[az_idx * grid.elevations.size() + el_idx];
    }
};

namespace detail
{

// quadratic form a^H M a for 4x4 M
inline double quad_form(const CMatrix &m, const std::array<cplx, kNumChannels> &a)
{
    cplx acc{0, 0};
    for (std::size_t r = 0; r < kNumChannels; ++r)
    {
        cplx row{0, 0};
        for (std::size_t c = 0; c < kNumChannels; ++c)
            row += m.at(r, c) * a[c];
        acc += std::conj(a[r]) * row;
    }
    return acc.real();
}

} // namespace detail

// Classical beamscan over a steering table. Bartlett: P = a^H R a. Capon:
// P = 1 / (a^H R^-1 a), with automatic diagonal loading when R is close to
// singular. MUSIC: P = 1 / (a^H En En^H a) with En spanning the noise
// subspace (the 4 - source_count smallest eigenvalues). Argmax ties resolve
// to the lowest azimuth, then the lowest elevation.
inline BeamscanResult beamscan(const SpatialCovariance &cov, const SteeringTable &table,
                               BeamMethod method, std::size_t source_count = 1)
{
    if (cov.matrix.rows != kNumChannels || cov.matrix.cols != kNumChannels)
        throw ShapeError("beamscan expects a 4x4 covariance");
    if (method == BeamMethod::Music && source_count >= kNumChannels)
        throw ConfigError("music source_count must be below the channel count");

    CMatrix scan_matrix; // the matrix whose quadratic form is evaluated per cell
    bool invert_power = false;

    if (method == BeamMethod::Bartlett)
    {
        scan_matrix = cov.matrix;
    }
    else if (method == BeamMethod::Capon)
    {
        const auto eig = hermitian_eig(cov.matrix);
        CMatrix loaded = cov.matrix;
        const double lmax = eig.eigenvalues.front();
        const double lmin = eig.eigenvalues.back();
        if (!(lmax > 0.0))
            throw NumericalError("capon requires a nonzero covariance");
        if (lmin <= 1e-12 * lmax)
        {
            const double eps = 1e-6 * cov.matrix.trace().real() / 4.0;
            for (std::size_t i = 0; i < kNumChannels; ++i)
                loaded.at(i, i) += eps;
        }
        scan_matrix = hermitian_inverse(loaded);
        invert_power = true;
    }
    else
    {
        const auto eig = hermitian_eig(cov.matrix);
        // noise-subspace projector En En^H
        scan_matrix = CMatrix(kNumChannels, kNumChannels);
        for (std::size_t c = source_count; c < kNumChannels; ++c)
            for (std::size_t r = 0; r < kNumChannels; ++r)
                for (std::size_t k = 0; k < kNumChannels; ++k)
                    scan_matrix.at(r, k) += eig.eigenvectors.at(r, c) *
                                            std::conj(eig.eigenvectors.at(k, c));
        invert_power = true;
    }

    BeamscanResult out;
    out.grid = table.grid;
    out.spectrum.resize(table.grid.size());
    const std::size_t n_el = table.grid.elevations.size();
    double best = -1.0;
    for (std::size_t ia = 0; ia < table.grid.azimuths.size(); ++ia)
        for (std::size_t ie = 0; ie < n_el; ++ie)
        {
            double q = detail::quad_form(scan_matrix, table.at(ia, ie));
            q = std::max(q, 0.0);
            const double p = invert_power ? 1.0 / std::max(q, 1e-300) : q;
            out.spectrum[ia * n_el + ie] = p;
            if (p > best)
            {
                best = p;
                out.peak_az_index = ia;
                out.peak_el_index = ie;
            }
        }
    out.peak_azimuth = table.grid.azimuths[out.peak_az_index];
    out.peak_elevation = table.grid.elevations[out.peak_el_index];
    return out;
}

// Convenience overload building a throwaway steering table.
inline BeamscanResult beamscan(const SpatialCovariance &cov, const ArrayGeometry &geometry,
                               const AngleGrid &grid, double carrier, BeamMethod method,
                               std::size_t source_count = 1)
{
    return beamscan(cov, make_steering_table(geometry, grid, carrier), method, source_count);
}

struct PairwisePhaseFeatures
{
    static constexpr std::size_t kPairs = 6;
    std::array<std::pair<std::size_t, std::size_t>, kPairs> pairs{
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    std::array<double, kPairs> mean_phase_rad{};   // arg sum x_i conj(x_j)
    std::array<double, kPairs> circular_std_rad{}; // sqrt(-2 ln |mean phasor|)
    std::array<double, kNumChannels> rss_db{};     // 10 log10 mean |x|^2
};

inline PairwisePhaseFeatures pairwise_phase_features(const SnapshotIQ &window)
{
    const std::size_t n = window.length();
    if (n == 0)
        throw InsufficientDataError("pairwise_phase_features needs a non-empty window");

    PairwisePhaseFeatures out;
    for (std::size_t m = 0; m < kNumChannels; ++m)
    {
        double p = 0.0;
        for (const auto &v : window.channels[m])
            p += std::norm(v);
        if (p == 0.0)
            throw NumericalError("channel " + std::to_string(m) + " has zero power");
        out.rss_db[m] = 10.0 * std::log10(p / static_cast<double>(n));
    }

    for (std::size_t k = 0; k < PairwisePhaseFeatures::kPairs; ++k)
    {
        const auto [i, j] = out.pairs[k];
        cplx weighted{0, 0}; // power-weighted phasor sum
        cplx unit{0, 0};     // unit phasor sum for circular statistics
        std::size_t used = 0;
        for (std::size_t m = 0; m < n; ++m)
        {
            const cplx prod = window.channels[i][m] * std::conj(window.channels[j][m]);
            const double mag = std::abs(prod);
            weighted += prod;
            if (mag > 0.0)
            {
                unit += prod / mag;
                ++used;
            }
        }
        out.mean_phase_rad[k] = std::arg(weighted);
        const double rbar = used > 0 ? std::abs(unit) / static_cast<double>(used) : 0.0;
        const double clipped = std::min(1.0, std::max(rbar, 1e-12));
        out.circular_std_rad[k] = std::sqrt(-2.0 * std::log(clipped));
    }
    return out;
}

// The 22-entry feature vector handed to the fusion model: 6 pairwise mean
// phase differences, 6 pairwise circular stds, 4 per-channel RSS values and
// the (azimuth, elevation) argmax of MUSIC, Capon and Bartlett scans. Every
// entry is scaled into [-1, 1].
struct AoaFeatureVector
{
    std::array<double, kAoaFeatureCount> values{};
};

inline AoaFeatureVector assemble_aoa_features(const SnapshotIQ &window,
                                              const SteeringTable &table)
{
    const auto phase = pairwise_phase_features(window);
    const auto cov = spatial_covariance(window);

    AoaFeatureVector f;
    std::size_t idx = 0;
    for (double v : phase.mean_phase_rad)
        f.values[idx++] = v / kPi;
    for (double v : phase.circular_std_rad)
        f.values[idx++] = std::min(v, kPi) / kPi; // cap keeps the entry within [0, 1]
    for (double v : phase.rss_db)
        f.values[idx++] = std::clamp(v, -100.0, 100.0) / 100.0;
    for (BeamMethod method : {BeamMethod::Music, BeamMethod::Capon, BeamMethod::Bartlett})
    {
        const auto scan = beamscan(cov, table, method);
        f.values[idx++] = scan.peak_azimuth / 180.0;
        f.values[idx++] = scan.peak_elevation / 90.0;
    }
    for (double v : f.values)
        if (!std::isfinite(v) || v < -1.0 || v > 1.0)
            throw NumericalError("aoa feature left the [-1, 1] range");
    return f;
}

inline AoaFeatureVector assemble_aoa_features(const SnapshotIQ &window,
                                              const ArrayGeometry &geometry,
                                              const AngleGrid &grid, double carrier)
{
    return assemble_aoa_features(window, make_steering_table(geometry, grid, carrier));
}

// CSV export of a spatial spectrum: az, el, power_db rows.
inline void beamscan_to_csv(const BeamscanResult &scan, std::ostream &os)
{
    char buf[96];
    os << "az_deg,el_deg,power_db\n";
    for (std::size_t ia = 0; ia < scan.grid.azimuths.size(); ++ia)
        for (std::size_t ie = 0; ie < scan.grid.elevations.size(); ++ie)
        {
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", scan.grid.azimuths[ia],
                          scan.grid.elevations[ie], power_db(scan.at(ia, ie)));
            os << buf;
        }
}

} // namespace jamloc

#endif
